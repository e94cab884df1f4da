#pragma once

#include "biqm/lattice.hpp"
#include "biqm/priors.hpp"
#include "biqm/rng.hpp"

#include <functional>
#include <vector>

namespace biqm {

/// Negative log posterior and its gradient at one potential.
struct Evaluation {
    double value = 0.0;
    GridFunction gradient;
};

using ObjectiveFn = std::function<Evaluation(const GridFunction&)>;

enum class PreconditionerKind {
    prior_operator,  // fixed A = K0 on the free indices
    identity,        // fixed A = I
    quasi_newton,    // BFGS inverse metric seeded with K0
};

/// Search metric on the free (unconstrained) indices.
class Preconditioner {
public:
    Preconditioner(const OperatorMatrix& a, std::vector<bool> free_mask, PreconditionerKind kind);

    /// -H g on free indices, zero on constrained ones.
    GridFunction direction(const GridFunction& gradient) const;
    /// sqrt(g^T A0^-1 g) over free indices with the fixed seed metric.
    double norm(const GridFunction& gradient) const;
    /// BFGS update with step s and gradient change y; ignored unless quasi-newton.
    void update(const GridFunction& s, const GridFunction& y);
    /// Back to the seed metric.
    void reset();

    PreconditionerKind kind() const { return kind_; }
    const std::vector<bool>& free_mask() const { return free_; }

private:
    Eigen::VectorXd restrict(const GridFunction& g) const;

    PreconditionerKind kind_;
    std::vector<bool> free_;
    std::vector<int> index_;
    int n_ = 0;
    Eigen::MatrixXd seed_inverse_;
    Eigen::MatrixXd inverse_;
};

struct LineSearchParams {
    double initial_step = 1.0;
    double shrink = 0.5;
    double sufficient_decrease = 1e-4;
    int max_backtracks = 40;
    /// Objective slack for accepting a step whose decrease is lost in rounding,
    /// provided the directional derivative has dropped as required.
    double roundoff_slack = 1e-12;
};

struct LineSearchResult {
    double step = 0.0;
    GridFunction v;
    Evaluation eval;
    int backtracks = 0;
    bool roundoff_accept = false;
};

/// Armijo backtracking for minimization along a descent direction.
/// Throws stalled_step if no step in initial_step * shrink^k, k <= max_backtracks, qualifies.
LineSearchResult line_search(const ObjectiveFn& objective, const GridFunction& v, const Evaluation& at,
                             const GridFunction& direction, const LineSearchParams& params = {});

struct SchedulePhase {
    double mu = 0.0;
    double nu = kStepMode;
    double anneal_beta = 0.0;
    int stage = 0;
};

struct IterationState {
    GridFunction v;
    Evaluation eval;
    double step = 0.0;
    int iteration = 0;
    double grad_norm = 0.0;
    SchedulePhase phase;
    bool converged = false;
};

/// One preconditioned step. Converged states and zero gradients are returned unchanged.
IterationState map_step(const IterationState& state, const ObjectiveFn& objective, Preconditioner& metric,
                        double tolerance, const LineSearchParams& params = {});

struct AnnealSchedule {
    double initial_temperature = 1.0;
    double cooling = 0.95;
    int moves_per_temperature = 0;  // 0 selects 50 * N
    double final_temperature = 1e-3;

    bool operator==(const AnnealSchedule&) const = default;
};

void validate_schedule(const AnnealSchedule& schedule);

struct AnnealResult {
    FieldState field;
    double energy = 0.0;
    long proposals = 0;
    long accepted = 0;
};

using FieldEnergy = std::function<double(const GridFunction&)>;

/// Metropolis rule: accept with probability min(1, exp(-beta_ann * delta)).
bool metropolis_accept(double delta, double beta_ann, CounterRng& rng);

/// Flip all values on [x1, x2) for uniformly drawn 0 <= x1 < x2 <= N.
void segment_flip(GridFunction& field, CounterRng& rng);

/// Fixed-temperature Metropolis sweep over segment flips; updates field and energy in place.
AnnealResult metropolis_sweep(const FieldState& initial, const FieldEnergy& energy, double beta_ann, long moves,
                              CounterRng& rng);

/// Geometric cooling; returns the best field visited.
AnnealResult anneal_binary_field(const FieldState& initial, const FieldEnergy& energy,
                                 const AnnealSchedule& schedule, CounterRng& rng);

}  // namespace biqm
