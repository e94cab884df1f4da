#include "biqm/checks.hpp"

#include "biqm/datagen.hpp"
#include "biqm/ensemble.hpp"
#include "biqm/gradients.hpp"
#include "biqm/presets.hpp"
#include "biqm/priors.hpp"
#include "biqm/reconstruct.hpp"
#include "biqm/rng.hpp"

namespace biqm {

GridFunction random_potential(int n, std::uint64_t seed, double amplitude) {
    CounterRng rng(seed);
    GridFunction v(n);
    for (int j = 0; j < n; ++j) {
        v(j) = amplitude * (2.0 * rng.uniform() - 1.0);
    }
    return v;
}

namespace {

constexpr double kStep = 1e-5;
constexpr double kSpectralTol = 1e-4;
constexpr double kEigenTol = 1e-5;
constexpr double kPriorTol = 1e-6;

std::vector<std::pair<std::string, PriorModel>> prior_variants(int n, std::uint64_t seed) {
    const GridFunction zero = GridFunction::Zero(n);
    const GridFunction v1 = periodic_template(1.0, 6.0, 0.0, n);
    const GridFunction v2 = periodic_template(0.5, 12.0, 0.3, n);
    const OperatorMatrix lap = build_laplacian(n, true);
    const OperatorMatrix eye{Eigen::MatrixXd::Identity(n, n), true};
    const OperatorMatrix grad = build_shift_difference(n, 1);
    const OperatorMatrix k0{0.2 * lap.entries, true};

    std::vector<std::pair<std::string, PriorModel>> out;
    out.emplace_back("prior/gaussian", GaussianPrior{zero, k0});
    out.emplace_back("prior/periodic-gaussian", GaussianPrior{v1, build_periodic_invcov(n, 6, 0.2, 1.0)});
    out.emplace_back("prior/rbf-gaussian", GaussianPrior{v2, build_rbf_invcov(n, 0.8)});
    out.emplace_back("prior/global-mix-energy",
                     GlobalMixPrior{{v1, k0}, {v2, eye}, 0.3, MixMode::energy});
    out.emplace_back("prior/global-mix-template",
                     GlobalMixPrior{{v1, k0}, {v2, eye}, 0.3, MixMode::template_mix});
    {
        HyperfieldPrior h;
        h.first = {grad, v1};
        h.second = {eye, v2};
        h.theta = FieldState{FieldKind::real_hyperfield, (random_potential(n, seed ^ 0x51, 0.5).array() + 0.5).matrix(),
                             kStepMode};
        h.include_normalization = true;
        out.emplace_back("prior/hyperfield", h);
    }
    {
        SwitchingPrior s;
        s.first = {eye, v1};
        s.second = {OperatorMatrix{Eigen::MatrixXd::Zero(n, n), true}, zero};
        s.lambda1 = 0.2;
        s.lambda2 = 0.2;
        s.steepness = 2.0;
        s.threshold = 0.15;
        s.penalty = AuxPenalty{AuxMode::quadratic, 0.7, grad, zero, 0.0, 1.0};
        CompositePrior c;
        c.parts.emplace_back(s);
        c.parts.emplace_back(GaussianPrior{zero, k0});
        out.emplace_back("prior/switch-fixed-sigmoid", c);
    }
    {
        SwitchingPrior s;
        s.first = {grad, v1 * (2.0 / 3.0)};
        s.second = {grad, v2};
        s.lambda1 = 1.5;
        s.lambda2 = 0.5;
        s.steepness = 2.0;
        s.threshold = 0.05;
        s.penalty = AuxPenalty{AuxMode::sigmoid, 0.4, grad, zero, 0.1, 1.5};
        out.emplace_back("prior/switch-two-sigmoid", s);
        s.combination = Combination::mixed;
        out.emplace_back("prior/switch-two-mixed", s);
    }
    {
        const GridFunction far = GridFunction::Constant(n, 3.0);
        out.emplace_back("prior/cup", CupPrior{{eye, far}, 5.0, 10.0, 0.7, 0.0});
    }
    return out;
}

}  // namespace

std::vector<GradientCheck> run_gradient_suite(std::uint64_t seed, int count) {
    const int n = 36;
    const double mass = 0.25;
    const double beta = 4.0;
    std::vector<GradientCheck> rows;
    const GridFunction v_true = true_potential(n);

    for (int k = 0; k < count; ++k) {
        const std::uint64_t s = seed * 1000003ULL + static_cast<std::uint64_t>(k);
        const GridFunction v = v_true + random_potential(n, s, 0.5);
        const Ensemble e = diagonalize(build_hamiltonian(v, mass), beta);
        const SampleSet data = sample_positions(likelihood_density(e), 200, s);
        const Eigen::VectorXd counts = sample_counts(data, n);

        auto ensemble_at = [&](const GridFunction& x) { return diagonalize(build_hamiltonian(x, mass), beta); };

        rows.push_back({"likelihood", k,
                        fd_check([&](const GridFunction& x) { return log_likelihood(data, ensemble_at(x)).value; },
                                 [&](const GridFunction& x) {
                                     return grad_log_likelihood(ensemble_at(x), counts).gradient;
                                 },
                                 v, kStep)
                            .max_error,
                        kSpectralTol});
        for (int alpha : {0, 1, n / 2, n - 1}) {
            rows.push_back({"eigenvalue/" + std::to_string(alpha), k,
                            fd_check([&](const GridFunction& x) { return ensemble_at(x).energies(alpha); },
                                     [&](const GridFunction& x) { return grad_eigenvalue(ensemble_at(x), alpha); },
                                     v, kStep)
                                .max_error,
                            kEigenTol});
        }
        rows.push_back({"log-partition", k,
                        fd_check([&](const GridFunction& x) { return ensemble_at(x).log_z; },
                                 [&](const GridFunction& x) { return grad_log_partition(ensemble_at(x)); }, v,
                                 kStep)
                            .max_error,
                        kEigenTol});
        rows.push_back({"energy-penalty", k,
                        fd_check([&](const GridFunction& x) { return energy_penalty(ensemble_at(x), 1000.0, -0.33); },
                                 [&](const GridFunction& x) {
                                     return grad_energy_penalty(ensemble_at(x), 1000.0, -0.33);
                                 },
                                 v, kStep)
                            .max_error,
                        kEigenTol});
        for (const auto& [name, model] : prior_variants(n, s)) {
            const PriorModel& m = model;
            rows.push_back({name, k,
                            fd_check([&](const GridFunction& x) { return m.energy(x); },
                                     [&](const GridFunction& x) { return grad_prior(m, x).gradient; }, v, kStep)
                                .max_error,
                            kPriorTol});
        }
        {
            ReconstructionConfig c = preset_config("fig-p162");
            const double kappa = average_energy(ensemble_at(v_true));
            const PriorModel prior = build_prior(c, 0.0);
            auto objective = [&](const GridFunction& x) {
                const Ensemble ex = ensemble_at(x);
                return prior.energy(x) - log_likelihood(counts, likelihood_density(ex)).value +
                       energy_penalty(ex, c.mu, kappa);
            };
            auto gradient = [&](const GridFunction& x) {
                const Ensemble ex = ensemble_at(x);
                return GridFunction(grad_prior(prior, x).gradient - grad_log_likelihood(ex, counts).gradient +
                                    grad_energy_penalty(ex, c.mu, kappa));
            };
            rows.push_back({"posterior/fig-p162", k, fd_check(objective, gradient, v, kStep).max_error,
                            kSpectralTol});
        }
    }
    return rows;
}

}  // namespace biqm
