#include "biqm/gradients.hpp"

#include "biqm/errors.hpp"

#include <cmath>
#include <sstream>

namespace biqm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Divided differences D(a,g) = (p_a - p_g) / (E_a - E_g), written through expm1
// from the lower level so nearby levels do not cancel.
Eigen::MatrixXd weight_differences(const Ensemble& e, DegeneracyPolicy policy,
                                   std::vector<std::pair<int, int>>& pairs) {
    const int n = e.size();
    const double eps = 1e-9 * e.spectral_range();
    const double beta = e.beta;
    Eigen::MatrixXd d(n, n);
    for (int a = 0; a < n; ++a) {
        d(a, a) = -beta * e.weights(a);
        for (int g = a + 1; g < n; ++g) {
            const double gap = e.energies(g) - e.energies(a);
            if (std::abs(gap) < eps || gap == 0.0) {
                pairs.emplace_back(a, g);
                d(a, g) = d(g, a) = -beta * 0.5 * (e.weights(a) + e.weights(g));
                continue;
            }
            const int lo = gap > 0.0 ? a : g;
            const double delta = std::abs(gap);
            const double value = e.weights(lo) * std::expm1(-beta * delta) / delta;
            d(a, g) = d(g, a) = value;
        }
    }
    if (!pairs.empty() && policy == DegeneracyPolicy::raise) {
        // Pairs carrying no thermal weight do not contribute.
        std::vector<std::pair<int, int>> occupied;
        for (const auto& [a, g] : pairs) {
            if (e.weights(a) > 0.0 || e.weights(g) > 0.0) {
                occupied.emplace_back(a, g);
            }
        }
        if (!occupied.empty() && beta > 0.0) {
            std::ostringstream msg;
            msg << "degenerate occupied levels:";
            for (const auto& [a, g] : occupied) {
                msg << " (" << a << "," << g << ")";
            }
            throw DegenerateSpectrumError(msg.str(), occupied);
        }
    }
    return d;
}

}  // namespace

LikelihoodGradientTerms likelihood_gradient_terms(const Ensemble& e, const Eigen::VectorXd& counts,
                                                  DegeneracyPolicy policy) {
    const int n = e.size();
    if (counts.size() != n) {
        throw Error(Errc::shape_mismatch, "counts length differs from lattice size");
    }
    LikelihoodGradientTerms out;
    const GridFunction p = likelihood_density(e);
    Eigen::VectorXd ratio = Eigen::VectorXd::Zero(n);
    for (int x = 0; x < n; ++x) {
        if (counts(x) == 0.0) {
            continue;
        }
        if (p(x) <= 0.0) {
            throw Error(Errc::numerical_failure, "datum at zero-probability position");
        }
        ratio(x) = counts(x) / p(x);
    }
    const Eigen::MatrixXd& phi = e.states;
    // S(a,g) = sum_y c(y)/p(y) phi_a(y) phi_g(y)
    const Eigen::MatrixXd s = phi.transpose() * ratio.asDiagonal() * phi;
    Eigen::MatrixXd d = weight_differences(e, policy, out.degenerate_pairs);
    out.regularization_applied = !out.degenerate_pairs.empty();

    Eigen::MatrixXd off = d.cwiseProduct(s);
    const Eigen::VectorXd diag = off.diagonal();
    off.diagonal().setZero();
    // G(x) = sum_{a,g} phi_a(x) M(a,g) phi_g(x)
    out.perturbation = (phi * off).cwiseProduct(phi).rowwise().sum();
    out.covariance = phi.array().square().matrix() * diag + e.beta * counts.sum() * p;
    return out;
}

GradientReport grad_log_likelihood(const Ensemble& e, const Eigen::VectorXd& counts, DegeneracyPolicy policy) {
    LikelihoodGradientTerms t = likelihood_gradient_terms(e, counts, policy);
    GradientReport r;
    r.gradient = t.perturbation + t.covariance;
    r.degenerate_pairs = std::move(t.degenerate_pairs);
    r.regularization_applied = t.regularization_applied;
    return r;
}

GradientReport grad_log_likelihood(const Ensemble& e, const SampleSet& data, DegeneracyPolicy policy) {
    return grad_log_likelihood(e, sample_counts(data, e.size()), policy);
}

GridFunction grad_eigenvalue(const Ensemble& e, int alpha) {
    if (alpha < 0 || alpha >= e.size()) {
        throw Error(Errc::invalid_range, "eigenvalue index out of range");
    }
    return e.states.col(alpha).array().square().matrix();
}

GridFunction grad_log_partition(const Ensemble& e) {
    return -e.beta * likelihood_density(e);
}

GridFunction grad_average_energy(const Ensemble& e) {
    const double u = average_energy(e);
    const Eigen::VectorXd w =
        e.weights.array() * (1.0 - e.beta * (e.energies.array() - u));
    return e.states.array().square().matrix() * w;
}

double energy_penalty(const Ensemble& e, double mu, double kappa) {
    const double d = average_energy(e) - kappa;
    return 0.5 * mu * d * d;
}

GridFunction grad_energy_penalty(const Ensemble& e, double mu, double kappa) {
    if (!(mu >= 0.0)) {
        throw Error(Errc::invalid_parameter, "energy penalty weight must be nonnegative");
    }
    const double d = average_energy(e) - kappa;
    return mu * d * grad_average_energy(e);
}

namespace {

GridFunction switching_gradient(const SwitchingPrior& p, const GridFunction& v) {
    const FieldState b = p.field(v);
    const GridFunction w1 = p.first.omega(v);
    const GridFunction w2 = p.second.omega(v);
    const Eigen::Index n = v.size();
    GridFunction de1(n), de2(n), deb(n);
    if (p.combination == Combination::switched) {
        for (Eigen::Index x = 0; x < n; ++x) {
            const double bx = b.values(x);
            de1(x) = p.lambda1 * (1.0 - bx) * w1(x);
            de2(x) = p.lambda2 * bx * w2(x);
            deb(x) = 0.5 * (p.lambda2 * w2(x) * w2(x) - p.lambda1 * w1(x) * w1(x));
        }
    } else {
        const double r1 = std::sqrt(p.lambda1);
        const double r2 = std::sqrt(p.lambda2);
        for (Eigen::Index x = 0; x < n; ++x) {
            const double bx = b.values(x);
            const double m = (1.0 - bx) * r1 * w1(x) + bx * r2 * w2(x);
            de1(x) = m * (1.0 - bx) * r1;
            de2(x) = m * bx * r2;
            deb(x) = m * (r2 * w2(x) - r1 * w1(x));
        }
    }
    if (!p.frozen && p.steepness != kStepMode) {
        deb += aux_prior_field_gradient(b, p.penalty);
        // dB(x)/dv = sigma'(u - vartheta) * 2 (W1(x,:) omega1(x) - W2(x,:) omega2(x))
        for (Eigen::Index x = 0; x < n; ++x) {
            const double u = w1(x) * w1(x) - w2(x) * w2(x);
            const double c = 2.0 * deb(x) * sigmoid_derivative(u - p.threshold, p.steepness);
            de1(x) += c * w1(x);
            de2(x) -= c * w2(x);
        }
    }
    return p.first.filter.entries.transpose() * de1 + p.second.filter.entries.transpose() * de2;
}

GridFunction hyperfield_gradient(const HyperfieldPrior& p, const GridFunction& v) {
    const GridFunction w1 = p.first.omega(v);
    const GridFunction w2 = p.second.omega(v);
    const GridFunction& t = p.theta.values;
    const GridFunction one_minus = (1.0 - t.array()).matrix();
    const GridFunction m = one_minus.cwiseProduct(w1) + t.cwiseProduct(w2);
    return p.first.filter.entries.transpose() * one_minus.cwiseProduct(m) +
           p.second.filter.entries.transpose() * t.cwiseProduct(m);
}

GridFunction cup_gradient(const CupPrior& p, const GridFunction& v) {
    const GridFunction w = p.omega.omega(v);
    GridFunction d(w.size());
    for (Eigen::Index x = 0; x < w.size(); ++x) {
        d(x) = 0.5 * cup_psi_derivative(w(x), p.a, p.b, p.gamma, p.x0);
    }
    return p.omega.filter.entries.transpose() * d;
}

GridFunction prior_gradient(const PriorModel& model, const GridFunction& v) {
    return std::visit(
        Overloaded{
            [&](const GaussianPrior& p) -> GridFunction { return gaussian_grad(v, p.mean, p.inv_cov); },
            [&](const GlobalMixPrior& p) -> GridFunction {
                if (p.mode == MixMode::energy) {
                    return (1.0 - p.theta) * gaussian_grad(v, p.first.mean, p.first.inv_cov) +
                           p.theta * gaussian_grad(v, p.second.mean, p.second.inv_cov);
                }
                const GridFunction mean = (1.0 - p.theta) * p.first.mean + p.theta * p.second.mean;
                const Eigen::MatrixXd k =
                    (1.0 - p.theta) * p.first.inv_cov.entries + p.theta * p.second.inv_cov.entries;
                return k * (v - mean);
            },
            [&](const HyperfieldPrior& p) -> GridFunction { return hyperfield_gradient(p, v); },
            [&](const SwitchingPrior& p) -> GridFunction { return switching_gradient(p, v); },
            [&](const CupPrior& p) -> GridFunction { return cup_gradient(p, v); },
            [&](const CompositePrior& p) -> GridFunction {
                GridFunction g = GridFunction::Zero(v.size());
                for (const PriorModel& part : p.parts) {
                    g += prior_gradient(part, v);
                }
                return g;
            },
        },
        model.variant());
}

}  // namespace

GradientReport grad_prior(const PriorModel& model, const GridFunction& v) {
    if (!v.allFinite()) {
        throw Error(Errc::invalid_potential, "prior gradient at non-finite potential");
    }
    GradientReport r;
    r.gradient = prior_gradient(model, v);
    return r;
}

FdCheck fd_check(const std::function<double(const GridFunction&)>& energy,
                 const std::function<GridFunction(const GridFunction&)>& gradient, const GridFunction& v,
                 double h) {
    if (!(h > 0.0)) {
        throw Error(Errc::invalid_parameter, "finite-difference step must be positive");
    }
    const GridFunction g = gradient(v);
    GridFunction fd(v.size());
    GridFunction probe = v;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        probe(i) = v(i) + h;
        const double up = energy(probe);
        probe(i) = v(i) - h;
        const double down = energy(probe);
        probe(i) = v(i);
        fd(i) = (up - down) / (2.0 * h);
    }
    const double scale = std::max(fd.cwiseAbs().maxCoeff(), 1e-12);
    FdCheck out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double err = std::abs(g(i) - fd(i)) / scale;
        if (err > out.max_error || out.worst_index < 0) {
            out.max_error = err;
            out.worst_index = static_cast<int>(i);
        }
    }
    return out;
}

}  // namespace biqm
