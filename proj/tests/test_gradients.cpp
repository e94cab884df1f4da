#include "biqm/checks.hpp"
#include "biqm/datagen.hpp"
#include "biqm/errors.hpp"
#include "biqm/gradients.hpp"

#include <doctest.h>

#include <cmath>

using namespace biqm;

namespace {

constexpr double kMass = 0.25;
constexpr double kBeta = 4.0;
constexpr double kStep = 1e-5;

Ensemble solve(const GridFunction& v, double beta = kBeta) {
    return diagonalize(build_hamiltonian(v, kMass), beta);
}

}  // namespace

TEST_SUITE("gradients") {

TEST_CASE("infinite temperature gives a vanishing likelihood gradient") {
    const SampleSet data = sample_positions(likelihood_density(solve(true_potential(36))), 200, 4);
    const Ensemble e = solve(GridFunction::Zero(36), 0.0);
    const GradientReport r = grad_log_likelihood(e, data, DegeneracyPolicy::confluent_limit);
    CHECK(r.gradient.cwiseAbs().maxCoeff() <= 1e-12);

    const Ensemble rough = solve(random_potential(36, 3), 0.0);
    const LikelihoodGradientTerms terms =
        likelihood_gradient_terms(rough, sample_counts(data, 36), DegeneracyPolicy::confluent_limit);
    CHECK(terms.covariance.isZero(0.0));
}

TEST_CASE("degenerate spectrum raises with the pair list") {
    const SampleSet data{{0, 5, 9}, 0, 36};
    const Ensemble e = solve(GridFunction::Zero(36));
    try {
        grad_log_likelihood(e, data, DegeneracyPolicy::raise);
        FAIL("expected a degenerate-spectrum error");
    } catch (const DegenerateSpectrumError& err) {
        CHECK(err.pairs().size() == 17);
    }
    const GradientReport r = grad_log_likelihood(e, data, DegeneracyPolicy::confluent_limit);
    CHECK(r.regularization_applied);
    CHECK(r.degenerate_pairs.size() == 17);
    CHECK(r.gradient.allFinite());
}

TEST_CASE("eigenvalue gradients") {
    for (int s = 0; s < 10; ++s) {
        const GridFunction v = true_potential(36) + random_potential(36, 200 + s, 0.5);
        for (int alpha : {0, 1, 18, 35}) {
            const FdCheck r = fd_check([&](const GridFunction& x) { return solve(x).energies(alpha); },
                                       [&](const GridFunction& x) { return grad_eigenvalue(solve(x), alpha); }, v,
                                       kStep);
            CHECK(r.max_error <= 1e-5);
        }
    }
}

TEST_CASE("likelihood gradient at a perturbed true potential") {
    const GridFunction vt = true_potential(36);
    const SampleSet data = sample_positions(likelihood_density(solve(vt)), 200, 17);
    for (int s = 0; s < 10; ++s) {
        const GridFunction v = vt + random_potential(36, 300 + s, 0.5);
        const FdCheck r = fd_check([&](const GridFunction& x) { return log_likelihood(data, solve(x)).value; },
                                   [&](const GridFunction& x) { return grad_log_likelihood(solve(x), data).gradient; },
                                   v, kStep);
        CHECK(r.max_error <= 1e-4);
    }
}

TEST_CASE("log partition gradient is the Gibbs identity") {
    for (int s = 0; s < 10; ++s) {
        const GridFunction v = random_potential(36, 400 + s);
        const FdCheck r = fd_check([&](const GridFunction& x) { return solve(x).log_z; },
                                   [&](const GridFunction& x) { return grad_log_partition(solve(x)); }, v, kStep);
        CHECK(r.max_error <= 1e-5);
        const Ensemble e = solve(v);
        CHECK((grad_log_partition(e) + kBeta * likelihood_density(e)).cwiseAbs().maxCoeff() <= 1e-15);
    }
}

TEST_CASE("energy penalty gradient") {
    const GridFunction vt = true_potential(36);
    const Ensemble e = solve(vt);
    const double u = average_energy(e);
    CHECK(grad_energy_penalty(e, 1000.0, u).isZero(0.0));

    const Ensemble hot = solve(vt, 0.0);
    const double uh = average_energy(hot);
    const GridFunction g = grad_energy_penalty(hot, 10.0, -0.33);
    CHECK((g.array() - 10.0 * (uh + 0.33) / 36.0).abs().maxCoeff() <= 1e-12);

    for (int s = 0; s < 10; ++s) {
        const GridFunction v = vt + random_potential(36, 500 + s, 0.5);
        const FdCheck r = fd_check([&](const GridFunction& x) { return energy_penalty(solve(x), 1000.0, -0.33); },
                                   [&](const GridFunction& x) { return grad_energy_penalty(solve(x), 1000.0, -0.33); },
                                   v, kStep);
        CHECK(r.max_error <= 1e-5);
    }
}

TEST_CASE("prior gradients at their minima") {
    const int n = 12;
    const GridFunction v0 = random_potential(n, 1);
    CHECK(grad_prior(PriorModel{GaussianPrior{v0, build_laplacian(n)}}, v0).gradient.isZero(0.0));
    const CupPrior cup{FilterSpec{build_shift_difference(n, 1), v0}, 5.0, 10.0, 0.7, 0.0};
    CHECK(grad_prior(PriorModel{cup}, v0).gradient.isZero(0.0));
}

TEST_CASE("gradient suite passes on ten potentials") {
    const std::vector<GradientCheck> checks = run_gradient_suite(1, 10);
    CHECK(checks.size() >= 10);
    for (const GradientCheck& c : checks) {
        INFO(c.name << " potential " << c.potential << " error " << c.error);
        CHECK(c.passed());
    }
}

TEST_CASE("finite difference harness") {
    const GridFunction v = random_potential(20, 9);
    const auto energy = [](const GridFunction& x) { return 0.5 * x.squaredNorm(); };
    const FdCheck good = fd_check(energy, [](const GridFunction& x) { return x; }, v, kStep);
    CHECK(good.max_error <= 1e-10);
    const FdCheck bad = fd_check(energy, [](const GridFunction& x) { GridFunction g = 2.0 * x; return g; }, v, kStep);
    CHECK(bad.max_error == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(bad.worst_index >= 0);
    CHECK_THROWS_AS(fd_check(energy, [](const GridFunction& x) { return x; }, v, 0.0), Error);
}

}
