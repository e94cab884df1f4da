#pragma once

#include "biqm/ensemble.hpp"
#include "biqm/priors.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace biqm {

struct GradientReport {
    GridFunction gradient;
    std::vector<std::pair<int, int>> degenerate_pairs;
    bool regularization_applied = false;
};

/// How near-degenerate occupied pairs are handled in the perturbation sums.
enum class DegeneracyPolicy {
    raise,            // throw DegenerateSpectrumError
    confluent_limit,  // use the exact derivative limit -beta p_alpha for the pair
};

/// The two groups of the likelihood gradient.
struct LikelihoodGradientTerms {
    GridFunction perturbation;  // eigenfunction-perturbation sums, alpha != gamma
    GridFunction covariance;    // -beta thermal covariance term
    std::vector<std::pair<int, int>> degenerate_pairs;
    bool regularization_applied = false;
};

/// d/dv(x) of sum_i ln p(x_i | v), from sample counts.
LikelihoodGradientTerms likelihood_gradient_terms(const Ensemble& e, const Eigen::VectorXd& counts,
                                                  DegeneracyPolicy policy = DegeneracyPolicy::raise);
GradientReport grad_log_likelihood(const Ensemble& e, const SampleSet& data,
                                   DegeneracyPolicy policy = DegeneracyPolicy::raise);
GradientReport grad_log_likelihood(const Ensemble& e, const Eigen::VectorXd& counts,
                                   DegeneracyPolicy policy = DegeneracyPolicy::raise);

/// dE_alpha / dv(x) = |phi_alpha(x)|^2.
GridFunction grad_eigenvalue(const Ensemble& e, int alpha);

/// d ln Z / dv(x) = -beta p(x).
GridFunction grad_log_partition(const Ensemble& e);

/// dU / dv(x) = < |phi(x)|^2 [1 - beta (E - U)] >.
GridFunction grad_average_energy(const Ensemble& e);

/// E_U = (mu / 2)(U - kappa)^2.
double energy_penalty(const Ensemble& e, double mu, double kappa);
GridFunction grad_energy_penalty(const Ensemble& e, double mu, double kappa);

/// Gradient of the prior energy (negative log prior) for every variant.
GradientReport grad_prior(const PriorModel& model, const GridFunction& v);

struct FdCheck {
    double max_error = 0.0;  // max_i |g_i - fd_i| / max(max_i |fd_i|, 1e-12)
    int worst_index = -1;
};

/// Central differences of energy against gradient at v.
FdCheck fd_check(const std::function<double(const GridFunction&)>& energy,
                 const std::function<GridFunction(const GridFunction&)>& gradient, const GridFunction& v,
                 double h);

}  // namespace biqm
