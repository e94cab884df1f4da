#include "biqm/priors.hpp"

#include "biqm/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace biqm {

namespace {

void require_same(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) {
        throw Error(Errc::shape_mismatch, std::string(what) + ": shape mismatch");
    }
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double sigmoid(double x, double nu) {
    if (nu == kStepMode) {
        return x >= 0.0 ? 1.0 : 0.0;
    }
    return 1.0 / (1.0 + std::exp(-2.0 * nu * x));
}

double sigmoid_derivative(double x, double nu) {
    if (nu == kStepMode) {
        return 0.0;
    }
    const double s = sigmoid(x, nu);
    return 2.0 * nu * s * (1.0 - s);
}

GridFunction FilterSpec::omega(const GridFunction& v) const {
    return filtered_difference(filter, v, reference);
}

GridFunction filtered_difference(const OperatorMatrix& w, const GridFunction& v, const GridFunction& v0) {
    require_same(v.size(), v0.size(), "filtered difference");
    require_same(w.entries.cols(), v.size(), "filtered difference");
    return w.entries * (v - v0);
}

double gaussian_energy(const GridFunction& v, const GridFunction& v0, const OperatorMatrix& k0) {
    require_same(v.size(), v0.size(), "gaussian energy");
    require_same(k0.entries.cols(), v.size(), "gaussian energy");
    const GridFunction d = v - v0;
    return 0.5 * d.dot(k0.entries * d);
}

GridFunction gaussian_grad(const GridFunction& v, const GridFunction& v0, const OperatorMatrix& k0) {
    require_same(v.size(), v0.size(), "gaussian gradient");
    require_same(k0.entries.cols(), v.size(), "gaussian gradient");
    return k0.entries * (v - v0);
}

GridFunction periodic_template(double amplitude, double period, double phase, int n) {
    if (period == 0.0) {
        throw Error(Errc::invalid_parameter, "template period must be nonzero");
    }
    GridFunction t(n);
    for (int j = 0; j < n; ++j) {
        const double x = j + 1;
        t(j) = amplitude * std::sin(2.0 * std::numbers::pi * x / period + phase);
    }
    return t;
}

void validate_field(const FieldState& field) {
    for (Eigen::Index i = 0; i < field.values.size(); ++i) {
        const double b = field.values(i);
        const bool ok = field.kind == FieldKind::binary_hyperfield ? (b == 0.0 || b == 1.0)
                                                                   : (b >= 0.0 && b <= 1.0);
        if (!ok) {
            throw Error(Errc::invalid_parameter, "field value out of range at index " + std::to_string(i));
        }
    }
}

int count_discontinuities(const GridFunction& field) {
    int nd = 0;
    for (Eigen::Index i = 0; i + 1 < field.size(); ++i) {
        if (field(i) != field(i + 1)) {
            ++nd;
        }
    }
    return nd;
}

FieldState auxiliary_field(const GridFunction& v, const FilterSpec& first, const FilterSpec& second,
                           double nu, double vartheta) {
    if (!(nu > 0.0)) {
        throw Error(Errc::invalid_parameter, "sigmoid steepness must be positive");
    }
    const GridFunction w1 = first.omega(v);
    const GridFunction w2 = second.omega(v);
    FieldState out{FieldKind::auxiliary, GridFunction(v.size()), nu};
    for (Eigen::Index x = 0; x < v.size(); ++x) {
        const double u = w1(x) * w1(x) - w2(x) * w2(x);
        out.values(x) = sigmoid(u - vartheta, nu);
    }
    return out;
}

double aux_prior_energy(const FieldState& field, const AuxPenalty& penalty) {
    switch (penalty.mode) {
    case AuxMode::none:
        return 0.0;
    case AuxMode::count:
        return 0.5 * penalty.tau * count_discontinuities(field.values);
    case AuxMode::quadratic: {
        const GridFunction w = filtered_difference(penalty.filter, field.values, penalty.target);
        return 0.5 * penalty.tau * w.squaredNorm();
    }
    case AuxMode::sigmoid: {
        const GridFunction w = filtered_difference(penalty.filter, field.values, penalty.target);
        double s = 0.0;
        for (Eigen::Index x = 0; x < w.size(); ++x) {
            s += sigmoid(w(x) * w(x) - penalty.threshold, penalty.steepness);
        }
        return 0.5 * penalty.tau * s;
    }
    }
    return 0.0;
}

GridFunction aux_prior_field_gradient(const FieldState& field, const AuxPenalty& penalty) {
    const Eigen::Index n = field.values.size();
    switch (penalty.mode) {
    case AuxMode::none:
    case AuxMode::count:
        return GridFunction::Zero(n);
    case AuxMode::quadratic: {
        const GridFunction w = filtered_difference(penalty.filter, field.values, penalty.target);
        return penalty.tau * (penalty.filter.entries.transpose() * w);
    }
    case AuxMode::sigmoid: {
        const GridFunction w = filtered_difference(penalty.filter, field.values, penalty.target);
        GridFunction s(n);
        for (Eigen::Index x = 0; x < n; ++x) {
            s(x) = sigmoid_derivative(w(x) * w(x) - penalty.threshold, penalty.steepness) * w(x);
        }
        return penalty.tau * (penalty.filter.entries.transpose() * s);
    }
    }
    return GridFunction::Zero(n);
}

double global_mix_energy(const GridFunction& v, double theta, const GaussianPrior& first,
                         const GaussianPrior& second, MixMode mode) {
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw Error(Errc::invalid_parameter, "mixing hyperparameter must lie in [0, 1]");
    }
    if (mode == MixMode::energy) {
        return (1.0 - theta) * gaussian_energy(v, first.mean, first.inv_cov) +
               theta * gaussian_energy(v, second.mean, second.inv_cov);
    }
    const GridFunction mean = (1.0 - theta) * first.mean + theta * second.mean;
    const OperatorMatrix k{(1.0 - theta) * first.inv_cov.entries + theta * second.inv_cov.entries, true};
    return gaussian_energy(v, mean, k);
}

LogNormalization log_normalization(const OperatorMatrix& k0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k0.entries, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw Error(Errc::numerical_failure, "eigensolver failed in log normalization");
    }
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double top = lam.cwiseAbs().maxCoeff();
    if (lam(0) < -1e-10 * top) {
        throw Error(Errc::not_psd, "inverse covariance has a negative eigenvalue");
    }
    const double eps = 1e-10 * (lam(lam.size() - 1) - lam(0));
    LogNormalization out;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) > eps && lam(i) > 0.0) {
            out.value -= 0.5 * std::log(lam(i) / (2.0 * std::numbers::pi));
            ++out.rank;
        } else {
            ++out.zero_modes;
        }
    }
    return out;
}

OperatorMatrix mixed_filter(const FieldState& theta, const OperatorMatrix& w1, const OperatorMatrix& w2) {
    require_same(w1.entries.rows(), theta.values.size(), "mixed filter");
    require_same(w2.entries.rows(), theta.values.size(), "mixed filter");
    Eigen::MatrixXd w = w1.entries;
    for (Eigen::Index x = 0; x < w.rows(); ++x) {
        w.row(x) = (1.0 - theta.values(x)) * w1.entries.row(x) + theta.values(x) * w2.entries.row(x);
    }
    return {std::move(w), false};
}

double hyperfield_energy(const GridFunction& v, const FieldState& theta, const FilterSpec& first,
                         const FilterSpec& second, bool include_normalization) {
    validate_field(theta);
    const GridFunction w1 = first.omega(v);
    const GridFunction w2 = second.omega(v);
    const GridFunction& t = theta.values;
    double s = 0.0;
    for (Eigen::Index x = 0; x < v.size(); ++x) {
        const double m = (1.0 - t(x)) * w1(x) + t(x) * w2(x);
        s += m * m;
    }
    double e = 0.5 * s;
    if (include_normalization) {
        e += log_normalization(mixed_filter(theta, first.filter, second.filter).transpose_product()).value;
    }
    return e;
}

double switched_hyperfield_energy(const GridFunction& v, const FieldState& theta, const FilterSpec& first,
                                  const FilterSpec& second) {
    validate_field(theta);
    const GridFunction w1 = first.omega(v);
    const GridFunction w2 = second.omega(v);
    const GridFunction& t = theta.values;
    double s = 0.0;
    for (Eigen::Index x = 0; x < v.size(); ++x) {
        s += (1.0 - t(x)) * w1(x) * w1(x) + t(x) * w2(x) * w2(x);
    }
    return 0.5 * s;
}

EffectiveTemplate effective_template(const GridFunction& v0_tilde, const OperatorMatrix& k) {
    require_same(k.entries.cols(), v0_tilde.size(), "effective template");
    const Eigen::Index n = v0_tilde.size();
    Eigen::MatrixXd k0 = Eigen::MatrixXd::Identity(n, n) + k.entries;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(k0);
    if (!lu.isInvertible()) {
        throw Error(Errc::singular, "I + K is singular");
    }
    GridFunction mean = lu.solve(v0_tilde);
    return {std::move(mean), OperatorMatrix{std::move(k0), k.symmetric}};
}

namespace {

GridFunction local_template(const GridFunction& v1, const GridFunction& v2, double t) {
    return (1.0 - t) * v1 + t * v2;
}

Eigen::RowVectorXd local_filter_row(const OperatorMatrix& w1, const OperatorMatrix& w2, Eigen::Index x,
                                    double t) {
    return (1.0 - t) * w1.entries.row(x) + t * w2.entries.row(x);
}

}  // namespace

double two_hyperfield_direct_energy(const GridFunction& v, const GridFunction& v1, const GridFunction& v2,
                                    const OperatorMatrix& w1, const OperatorMatrix& w2,
                                    const GridFunction& theta, const GridFunction& theta_prime) {
    double s = 0.0;
    for (Eigen::Index x = 0; x < v.size(); ++x) {
        const double w = local_filter_row(w1, w2, x, theta_prime(x)).dot(v - local_template(v1, v2, theta(x)));
        s += w * w;
    }
    return 0.5 * s;
}

double TwoHyperfieldForm::energy(const GridFunction& v) const {
    return gaussian_energy(v, mean, inv_cov) + constant;
}

TwoHyperfieldForm effective_two_hyperfield(const GridFunction& v1, const GridFunction& v2,
                                           const OperatorMatrix& w1, const OperatorMatrix& w2,
                                           const GridFunction& theta, const GridFunction& theta_prime) {
    const Eigen::Index n = v1.size();
    Eigen::MatrixXd k0 = Eigen::MatrixXd::Zero(n, n);
    GridFunction rhs = GridFunction::Zero(n);
    double local = 0.0;
    for (Eigen::Index x = 0; x < n; ++x) {
        const Eigen::RowVectorXd row = local_filter_row(w1, w2, x, theta_prime(x));
        const GridFunction vx = local_template(v1, v2, theta(x));
        const double proj = row.dot(vx);
        k0 += row.transpose() * row;
        rhs += row.transpose() * proj;
        local += proj * proj;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(k0);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0) {
        throw Error(Errc::singular, "effective inverse covariance is singular");
    }
    TwoHyperfieldForm out;
    out.mean = ldlt.solve(rhs);
    out.constant = 0.5 * (local - out.mean.dot(k0 * out.mean));
    out.inv_cov = OperatorMatrix{0.5 * (k0 + k0.transpose()), true};
    return out;
}

FieldState SwitchingPrior::field(const GridFunction& v) const {
    if (frozen) {
        return FieldState{FieldKind::auxiliary, *frozen, steepness};
    }
    return auxiliary_field(v, first, second, steepness, threshold);
}

namespace {

double switching_energy(const SwitchingPrior& p, const GridFunction& v) {
    const FieldState b = p.field(v);
    const GridFunction w1 = p.first.omega(v);
    const GridFunction w2 = p.second.omega(v);
    double s = 0.0;
    if (p.combination == Combination::switched) {
        for (Eigen::Index x = 0; x < v.size(); ++x) {
            const double bx = b.values(x);
            s += p.lambda1 * (1.0 - bx) * w1(x) * w1(x) + p.lambda2 * bx * w2(x) * w2(x);
        }
    } else {
        const double r1 = std::sqrt(p.lambda1);
        const double r2 = std::sqrt(p.lambda2);
        for (Eigen::Index x = 0; x < v.size(); ++x) {
            const double bx = b.values(x);
            const double m = (1.0 - bx) * r1 * w1(x) + bx * r2 * w2(x);
            s += m * m;
        }
    }
    return 0.5 * s + aux_prior_energy(b, p.penalty);
}

}  // namespace

double switch_energy_fixed_reference(const GridFunction& v, const GridFunction& v0, const GridFunction& b,
                                     double lambda1, double lambda2) {
    require_same(v.size(), v0.size(), "switch energy");
    require_same(v.size(), b.size(), "switch energy");
    double s = 0.0;
    for (Eigen::Index x = 0; x < v.size(); ++x) {
        const double d = v(x) - v0(x);
        s += d * d * (1.0 - b(x));
    }
    const OperatorMatrix lap = build_laplacian(static_cast<int>(v.size()), true);
    return 0.5 * lambda1 * s + 0.5 * lambda2 * v.dot(lap.entries * v);
}

double switch_energy_two_references(const GridFunction& v, const GridFunction& v1, const GridFunction& v2,
                                    const GridFunction& b, double lambda1, double lambda2) {
    require_same(v.size(), b.size(), "switch energy");
    const OperatorMatrix grad = build_shift_difference(static_cast<int>(v.size()), 1);
    const GridFunction w1 = filtered_difference(grad, v, v1);
    const GridFunction w2 = filtered_difference(grad, v, v2);
    double s = 0.0;
    for (Eigen::Index x = 0; x < v.size(); ++x) {
        s += lambda1 * (1.0 - b(x)) * w1(x) * w1(x) + lambda2 * b(x) * w2(x) * w2(x);
    }
    return 0.5 * s;
}

double cup_psi(double x, double a, double b, double gamma, double x0) {
    const double r = std::pow(std::abs(x - x0) / b, gamma);
    return a * (1.0 - 1.0 / (1.0 + r));
}

double cup_psi_derivative(double x, double a, double b, double gamma, double x0) {
    const double t = x - x0;
    if (t == 0.0) {
        return 0.0;
    }
    const double s = std::abs(t) / b;
    const double r = std::pow(s, gamma);
    const double dr = gamma * std::pow(s, gamma - 1.0) / b;
    return (t > 0.0 ? 1.0 : -1.0) * a * dr / ((1.0 + r) * (1.0 + r));
}

double cup_energy(const GridFunction& omega, double a, double b, double gamma, double x0) {
    if (!(a > 0.0) || !(b > 0.0) || !(gamma > 0.0)) {
        throw Error(Errc::invalid_parameter, "cup parameters a, b, gamma must be positive");
    }
    double s = 0.0;
    for (Eigen::Index x = 0; x < omega.size(); ++x) {
        s += cup_psi(omega(x), a, b, gamma, x0);
    }
    return 0.5 * s;
}

double PriorModel::energy(const GridFunction& v) const {
    return std::visit(
        Overloaded{
            [&](const GaussianPrior& p) { return gaussian_energy(v, p.mean, p.inv_cov); },
            [&](const GlobalMixPrior& p) { return global_mix_energy(v, p.theta, p.first, p.second, p.mode); },
            [&](const HyperfieldPrior& p) {
                return hyperfield_energy(v, p.theta, p.first, p.second, p.include_normalization) +
                       aux_prior_energy(p.theta, p.hyperprior);
            },
            [&](const SwitchingPrior& p) { return switching_energy(p, v); },
            [&](const CupPrior& p) { return cup_energy(p.omega.omega(v), p.a, p.b, p.gamma, p.x0); },
            [&](const CompositePrior& p) {
                double e = 0.0;
                for (const PriorModel& part : p.parts) {
                    e += part.energy(v);
                }
                return e;
            },
        },
        impl_);
}

std::optional<FieldState> PriorModel::field(const GridFunction& v) const {
    return std::visit(
        Overloaded{
            [&](const HyperfieldPrior& p) -> std::optional<FieldState> { return p.theta; },
            [&](const SwitchingPrior& p) -> std::optional<FieldState> { return p.field(v); },
            [&](const CompositePrior& p) -> std::optional<FieldState> {
                for (const PriorModel& part : p.parts) {
                    if (auto f = part.field(v)) {
                        return f;
                    }
                }
                return std::nullopt;
            },
            [&](const auto&) -> std::optional<FieldState> { return std::nullopt; },
        },
        impl_);
}

OperatorMatrix PriorModel::metric(int n) const {
    Eigen::MatrixXd a = std::visit(
        Overloaded{
            [&](const GaussianPrior& p) -> Eigen::MatrixXd { return p.inv_cov.entries; },
            [&](const GlobalMixPrior& p) -> Eigen::MatrixXd {
                return (1.0 - p.theta) * p.first.inv_cov.entries + p.theta * p.second.inv_cov.entries;
            },
            [&](const HyperfieldPrior& p) -> Eigen::MatrixXd {
                return mixed_filter(p.theta, p.first.filter, p.second.filter).transpose_product().entries;
            },
            [&](const SwitchingPrior& p) -> Eigen::MatrixXd {
                return p.lambda1 * p.first.filter.transpose_product().entries +
                       p.lambda2 * p.second.filter.transpose_product().entries;
            },
            [&](const CupPrior& p) -> Eigen::MatrixXd {
                return (p.a / (p.b * p.b)) * p.omega.filter.transpose_product().entries;
            },
            [&](const CompositePrior& p) -> Eigen::MatrixXd {
                Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
                for (const PriorModel& part : p.parts) {
                    sum += part.metric(n).entries;
                }
                return sum;
            },
        },
        impl_);
    Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
    return {std::move(sym), true};
}

}  // namespace biqm
