#include "biqm/optimizer.hpp"

#include "biqm/errors.hpp"

#include <cmath>
#include <string>

namespace biqm {

Preconditioner::Preconditioner(const OperatorMatrix& a, std::vector<bool> free_mask, PreconditionerKind kind)
    : kind_(kind), free_(std::move(free_mask)) {
    n_ = a.size();
    if (static_cast<int>(free_.size()) != n_) {
        throw Error(Errc::shape_mismatch, "free mask length differs from operator size");
    }
    for (int i = 0; i < n_; ++i) {
        if (free_[i]) {
            index_.push_back(i);
        }
    }
    const int m = static_cast<int>(index_.size());
    Eigen::MatrixXd restricted(m, m);
    if (kind_ == PreconditionerKind::identity) {
        restricted.setIdentity();
    } else {
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                restricted(r, c) = a.entries(index_[r], index_[c]);
            }
        }
        restricted += 1e-10 * Eigen::MatrixXd::Identity(m, m);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(restricted);
    if (llt.info() != Eigen::Success) {
        throw Error(Errc::not_psd, "preconditioner is not positive definite on the free indices");
    }
    seed_inverse_ = llt.solve(Eigen::MatrixXd::Identity(m, m));
    seed_inverse_ = 0.5 * (seed_inverse_ + seed_inverse_.transpose());
    inverse_ = seed_inverse_;
}

Eigen::VectorXd Preconditioner::restrict(const GridFunction& g) const {
    Eigen::VectorXd r(index_.size());
    for (std::size_t k = 0; k < index_.size(); ++k) {
        r(k) = g(index_[k]);
    }
    return r;
}

GridFunction Preconditioner::direction(const GridFunction& gradient) const {
    const Eigen::VectorXd d = -(inverse_ * restrict(gradient));
    GridFunction out = GridFunction::Zero(n_);
    for (std::size_t k = 0; k < index_.size(); ++k) {
        out(index_[k]) = d(k);
    }
    return out;
}

double Preconditioner::norm(const GridFunction& gradient) const {
    const Eigen::VectorXd g = restrict(gradient);
    return std::sqrt(std::max(0.0, g.dot(seed_inverse_ * g)));
}

void Preconditioner::update(const GridFunction& s_full, const GridFunction& y_full) {
    if (kind_ != PreconditionerKind::quasi_newton) {
        return;
    }
    const Eigen::VectorXd s = restrict(s_full);
    const Eigen::VectorXd y = restrict(y_full);
    const double sy = s.dot(y);
    if (!(sy > 1e-12 * s.norm() * y.norm()) || !std::isfinite(sy)) {
        return;  // curvature condition fails; keep the current metric
    }
    const double rho = 1.0 / sy;
    const Eigen::VectorXd hy = inverse_ * y;
    // H+ = (I - rho s y^T) H (I - rho y s^T) + rho s s^T
    inverse_ += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
    inverse_ = 0.5 * (inverse_ + inverse_.transpose());
}

void Preconditioner::reset() {
    inverse_ = seed_inverse_;
}

LineSearchResult line_search(const ObjectiveFn& objective, const GridFunction& v, const Evaluation& at,
                             const GridFunction& direction, const LineSearchParams& params) {
    const double slope = at.gradient.dot(direction);
    if (!(slope < 0.0)) {
        throw Error(Errc::stalled_step, "line search direction is not a descent direction");
    }
    double eta = params.initial_step;
    for (int k = 0; k <= params.max_backtracks; ++k) {
        GridFunction trial = v + eta * direction;
        Evaluation e;
        bool ok = true;
        try {
            e = objective(trial);
        } catch (const DegenerateSpectrumError&) {
            ok = false;
        }
        if (ok && std::isfinite(e.value)) {
            if (e.value <= at.value + params.sufficient_decrease * eta * slope) {
                return {eta, std::move(trial), std::move(e), k, false};
            }
            // Near the optimum the decrease drops below the rounding of the objective;
            // accept when the value is flat within slack and the slope has decreased.
            const double new_slope = e.gradient.dot(direction);
            if (e.value <= at.value + params.roundoff_slack &&
                new_slope <= (1.0 - 2.0 * params.sufficient_decrease) * std::abs(slope)) {
                return {eta, std::move(trial), std::move(e), k, true};
            }
        }
        eta *= params.shrink;
    }
    throw Error(Errc::stalled_step, "no acceptable step after " + std::to_string(params.max_backtracks) +
                                        " backtracks");
}

IterationState map_step(const IterationState& state, const ObjectiveFn& objective, Preconditioner& metric,
                        double tolerance, const LineSearchParams& params) {
    IterationState next = state;
    next.grad_norm = metric.norm(state.eval.gradient);
    if (next.grad_norm <= tolerance || next.grad_norm == 0.0) {
        next.converged = true;
        return next;
    }
    GridFunction d = metric.direction(state.eval.gradient);
    if (!(state.eval.gradient.dot(d) < 0.0)) {
        metric.reset();
        d = metric.direction(state.eval.gradient);
    }
    LineSearchResult ls;
    try {
        ls = line_search(objective, state.v, state.eval, d, params);
    } catch (const Error& err) {
        if (err.code() != Errc::stalled_step || metric.kind() != PreconditionerKind::quasi_newton) {
            throw;
        }
        metric.reset();
        ls = line_search(objective, state.v, state.eval, metric.direction(state.eval.gradient), params);
    }
    metric.update(ls.v - state.v, ls.eval.gradient - state.eval.gradient);
    next.v = std::move(ls.v);
    next.eval = std::move(ls.eval);
    next.step = ls.step;
    next.iteration = state.iteration + 1;
    next.grad_norm = metric.norm(next.eval.gradient);
    next.converged = next.grad_norm <= tolerance;
    return next;
}

void validate_schedule(const AnnealSchedule& s) {
    if (!(s.cooling > 0.0 && s.cooling < 1.0)) {
        throw Error(Errc::invalid_parameter, "cooling factor must lie in (0, 1)");
    }
    if (!(s.initial_temperature > 0.0) || !(s.final_temperature > 0.0)) {
        throw Error(Errc::invalid_parameter, "temperatures must be positive");
    }
    if (s.moves_per_temperature < 0) {
        throw Error(Errc::invalid_parameter, "moves per temperature must be nonnegative");
    }
}

bool metropolis_accept(double delta, double beta_ann, CounterRng& rng) {
    if (delta <= 0.0) {
        return true;
    }
    const double u = rng.uniform();
    return u < std::exp(-beta_ann * delta);
}

void segment_flip(GridFunction& field, CounterRng& rng) {
    const auto n = static_cast<std::uint64_t>(field.size());
    std::uint64_t a = rng.below(n + 1);
    std::uint64_t b = rng.below(n);
    if (b >= a) {
        ++b;  // distinct from a, uniform over the remaining n values
    }
    if (a > b) {
        std::swap(a, b);
    }
    for (std::uint64_t x = a; x < b; ++x) {
        field(static_cast<Eigen::Index>(x)) = 1.0 - field(static_cast<Eigen::Index>(x));
    }
}

namespace {

void sweep(GridFunction& current, double& current_e, AnnealResult& best, const FieldEnergy& energy,
           double beta_ann, long moves, CounterRng& rng) {
    GridFunction trial;
    for (long k = 0; k < moves; ++k) {
        trial = current;
        segment_flip(trial, rng);
        const double e = energy(trial);
        ++best.proposals;
        if (metropolis_accept(e - current_e, beta_ann, rng)) {
            ++best.accepted;
            current.swap(trial);
            current_e = e;
            if (current_e < best.energy) {
                best.energy = current_e;
                best.field.values = current;
            }
        }
    }
}

}  // namespace

AnnealResult metropolis_sweep(const FieldState& initial, const FieldEnergy& energy, double beta_ann, long moves,
                              CounterRng& rng) {
    validate_field(initial);
    GridFunction current = initial.values;
    double current_e = energy(current);
    AnnealResult best{initial, current_e, 0, 0};
    sweep(current, current_e, best, energy, beta_ann, moves, rng);
    return best;
}

AnnealResult anneal_binary_field(const FieldState& initial, const FieldEnergy& energy,
                                 const AnnealSchedule& schedule, CounterRng& rng) {
    validate_schedule(schedule);
    validate_field(initial);
    const long moves = schedule.moves_per_temperature > 0 ? schedule.moves_per_temperature
                                                          : 50L * static_cast<long>(initial.values.size());
    GridFunction current = initial.values;
    double current_e = energy(current);
    AnnealResult best{initial, current_e, 0, 0};
    for (double t = schedule.initial_temperature; t >= schedule.final_temperature * (1.0 - 1e-12);
         t *= schedule.cooling) {
        sweep(current, current_e, best, energy, 1.0 / t, moves, rng);
    }
    return best;
}

}  // namespace biqm
