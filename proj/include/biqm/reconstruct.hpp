#pragma once

#include "biqm/config.hpp"
#include "biqm/ensemble.hpp"
#include "biqm/gradients.hpp"
#include "biqm/priors.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace biqm {

struct TraceEntry {
    int iteration = 0;
    double objective = 0.0;
    double grad_norm = 0.0;
    double mu = 0.0;
    double nu = 0.0;  // sigmoid steepness; inf in step mode, 0 without a switching field
    int segment = 0;  // increments at every schedule change or field update
};

struct Diagnostics {
    double rmse = 0.0;
    double rmse_bands = 0.0;  // outside the impurity band
    double kl_rec = 0.0;      // KL(p_emp || p_rec)
    double kl_true = 0.0;     // KL(p_emp || p_true)
    double average_energy = 0.0;
    double kappa = 0.0;
    double energy_gap = 0.0;  // |U(v*) - kappa|
    double true_average_energy = 0.0;
    double final_objective = 0.0;
    double final_grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string termination;  // converged | max-iterations | stalled
    int stages = 0;
    int segments = 0;
    int field_updates = 0;
    int jitter_retries = 0;
    int period_shift = 0;
    bool period_rounded = false;
    int field_ones_impurity = 0;
    int field_ones_outside = 0;
    int field_discontinuities = 0;
};

struct ReconstructionResult {
    ReconstructionConfig config;
    SampleSet data;
    GridFunction v_star;
    GridFunction v_true;
    GridFunction v_template;
    GridFunction p_rec;
    GridFunction p_true;
    GridFunction p_emp;
    std::optional<FieldState> field;
    std::vector<TraceEntry> trace;
    Diagnostics diagnostics;
};

/// Indices held at v = 0: wrap fixes x = N (the periodic seam), ends fixes x = 1 and x = N.
std::vector<bool> free_mask(BoundaryKind boundary, int n);

/// KL(p || q) over the support of p.
double kl_divergence(const GridFunction& p, const GridFunction& q);

/// Prior of the configuration. For switching priors nu is the sigmoid steepness and
/// frozen fixes B; for hyperfield priors frozen carries theta.
PriorModel build_prior(const ReconstructionConfig& config, double nu,
                       const std::optional<GridFunction>& frozen = std::nullopt);

/// Data drawn from the true potential, or read from file.
SampleSet make_data(const ReconstructionConfig& config);

ReconstructionResult reconstruct(const ReconstructionConfig& config);
ReconstructionResult reconstruct(const ReconstructionConfig& config, const SampleSet& data);

ReconstructionResult run_preset(const std::string& name, std::uint64_t seed,
                                const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace biqm
