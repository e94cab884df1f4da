#include "oracles.hpp"

#include "biqm/checks.hpp"
#include "biqm/errors.hpp"
#include "biqm/optimizer.hpp"
#include "biqm/reconstruct.hpp"

#include <doctest.h>

#include <cmath>

using namespace biqm;

namespace {

ObjectiveFn quadratic(const Eigen::MatrixXd& k, const GridFunction& center) {
    return [k, center](const GridFunction& v) {
        const GridFunction d = v - center;
        return Evaluation{0.5 * d.dot(k * d), k * d};
    };
}

Eigen::MatrixXd spd(int n) {
    return build_laplacian(n).entries + 0.3 * Eigen::MatrixXd::Identity(n, n);
}

IterationState start(const ObjectiveFn& f, const GridFunction& v) {
    IterationState s;
    s.v = v;
    s.eval = f(v);
    return s;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("zero gradient leaves the state unchanged") {
    const int n = 8;
    const GridFunction c = random_potential(n, 2);
    const ObjectiveFn f = quadratic(spd(n), c);
    Preconditioner a({spd(n), true}, std::vector<bool>(n, true), PreconditionerKind::prior_operator);
    const IterationState next = map_step(start(f, c), f, a, 1e-6);
    CHECK(next.converged);
    CHECK(next.v == c);
    CHECK(next.iteration == 0);
}

TEST_CASE("Newton step is exact on a quadratic") {
    const int n = 10;
    const Eigen::MatrixXd k = spd(n);
    const GridFunction c = random_potential(n, 3);
    const ObjectiveFn f = quadratic(k, c);
    for (PreconditionerKind kind : {PreconditionerKind::prior_operator, PreconditionerKind::quasi_newton}) {
        Preconditioner a({k, true}, std::vector<bool>(n, true), kind);
        const IterationState next = map_step(start(f, GridFunction::Zero(n)), f, a, 1e-12);
        CHECK(next.step == 1.0);
        CHECK((next.v - c).cwiseAbs().maxCoeff() <= 1e-9);  // metric carries a 1e-10 ridge
    }
}

TEST_CASE("constrained coordinates are never moved") {
    const int n = 10;
    const Eigen::MatrixXd k = spd(n);
    const ObjectiveFn f = quadratic(k, random_potential(n, 4));
    std::vector<bool> mask(n, true);
    mask[n - 1] = false;
    Preconditioner a({k, true}, mask, PreconditionerKind::quasi_newton);
    IterationState s = start(f, GridFunction::Zero(n));
    for (int it = 0; it < 20 && !s.converged; ++it) {
        const double before = s.eval.value;
        s = map_step(s, f, a, 1e-10);
        CHECK(s.v(n - 1) == 0.0);
        CHECK(s.eval.value <= before + 1e-12);
    }
    CHECK(s.converged);
}

TEST_CASE("free mask by boundary kind") {
    const std::vector<bool> wrap = free_mask(BoundaryKind::wrap, 6);
    CHECK(wrap == std::vector<bool>{true, true, true, true, true, false});
    const std::vector<bool> ends = free_mask(BoundaryKind::ends, 6);
    CHECK(ends == std::vector<bool>{false, true, true, true, true, false});
    CHECK(free_mask(BoundaryKind::none, 6) == std::vector<bool>(6, true));
}

TEST_CASE("line search on a parabola") {
    const ObjectiveFn f = [](const GridFunction& v) {
        const double d = v(0) - 3.0;
        return Evaluation{d * d, GridFunction::Constant(1, 2.0 * d)};
    };
    const GridFunction v0 = GridFunction::Zero(1);
    const Evaluation at = f(v0);
    const LineSearchResult r = line_search(f, v0, at, GridFunction::Constant(1, 1.0));
    CHECK(r.eval.value < at.value);
    CHECK(r.step == 1.0);
    CHECK(r.v(0) == 1.0);

    const LineSearchResult far = line_search(f, v0, at, GridFunction::Constant(1, 100.0));
    CHECK(far.eval.value < at.value);
    CHECK(far.backtracks > 0);

    try {
        line_search(f, v0, at, GridFunction::Constant(1, -1.0));
        FAIL("expected stalled step");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::stalled_step);
    }
}

TEST_CASE("Metropolis rule") {
    CounterRng rng(1);
    CHECK(metropolis_accept(-1.0, 100.0, rng));
    CHECK(metropolis_accept(0.0, 100.0, rng));
    CHECK_FALSE(metropolis_accept(1e3, 100.0, rng));

    const int n = 12;
    const FieldState init{FieldKind::binary_hyperfield, GridFunction::Zero(n)};
    const FieldEnergy e = [](const GridFunction& b) { return 10.0 * b.sum(); };
    const AnnealResult r = metropolis_sweep(init, e, 0.0, 10000, rng);
    CHECK(r.proposals == 10000);
    CHECK(r.accepted == 10000);
}

TEST_CASE("segment flip changes one contiguous block") {
    CounterRng rng(21);
    for (int k = 0; k < 500; ++k) {
        GridFunction b = GridFunction::Zero(9);
        segment_flip(b, rng);
        CHECK(b.sum() >= 1.0);
        CHECK(count_discontinuities(b) <= 2);
        int first = -1;
        int last = -1;
        for (int j = 0; j < 9; ++j) {
            if (b(j) == 1.0) {
                last = j;
                if (first < 0) {
                    first = j;
                }
            }
        }
        CHECK(b.segment(first, last - first + 1).sum() == last - first + 1);
    }
}

TEST_CASE("annealer finds the enumerated optimum") {
    const int n = 12;
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const GridFunction h = random_potential(n, 900 + seed);
        const FieldEnergy energy = [&](const GridFunction& b) { return h.dot(b) + 0.35 * count_discontinuities(b); };
        const auto [best, mask] = oracle::enumerate_minimum(n, energy);
        CounterRng rng(seed);
        const AnnealResult r = anneal_binary_field(FieldState{FieldKind::binary_hyperfield, GridFunction::Zero(n)},
                                                   energy, AnnealSchedule{}, rng);
        if (r.energy <= best) {
            ++hits;
        }
        CHECK(r.energy == energy(r.field.values));
        (void)mask;
    }
    CHECK(hits >= 9);
}

TEST_CASE("schedule validation") {
    CHECK_NOTHROW(validate_schedule(AnnealSchedule{}));
    CHECK_THROWS_AS(validate_schedule(AnnealSchedule{1.0, 1.0, 0, 1e-3}), Error);
    CHECK_THROWS_AS(validate_schedule(AnnealSchedule{1.0, 0.9, 0, 0.0}), Error);
    CHECK_THROWS_AS(validate_schedule(AnnealSchedule{1.0, 0.9, -1, 1e-3}), Error);
}

TEST_CASE("without data the posterior mode is the prior mean") {
    ReconstructionConfig c;
    c.first_template = TemplateSpec{TemplateKind::sine, 1.0, 6.0, 0.0};
    c.tolerance = 1e-10;
    c.mu = 0.0;
    const ReconstructionResult r = reconstruct(c, SampleSet{{}, c.seed, c.lattice_size});
    CHECK(r.diagnostics.converged);
    CHECK((r.v_star - r.v_template).cwiseAbs().maxCoeff() <= 1e-8);
}

}
