#include "oracles.hpp"

#include "biqm/checks.hpp"
#include "biqm/datagen.hpp"
#include "biqm/errors.hpp"
#include "biqm/gradients.hpp"
#include "biqm/priors.hpp"
#include "biqm/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace biqm;

namespace {

OperatorMatrix identity(int n) {
    return {Eigen::MatrixXd::Identity(n, n), true};
}

GridFunction random_binary(int n, CounterRng& rng) {
    GridFunction b(n);
    for (int j = 0; j < n; ++j) {
        b(j) = static_cast<double>(rng.below(2));
    }
    return b;
}

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    CounterRng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            m(i, j) = 2.0 * rng.uniform() - 1.0;
        }
    }
    return m;
}

}  // namespace

TEST_SUITE("priors") {

TEST_CASE("gaussian energy basics") {
    const int n = 8;
    const GridFunction v0 = random_potential(n, 1);
    CHECK(gaussian_energy(v0, v0, build_laplacian(n)) == 0.0);
    CHECK(gaussian_grad(v0, v0, build_laplacian(n)).isZero(0.0));
    GridFunction unit = v0;
    unit(3) += 1.0;
    CHECK(gaussian_energy(unit, v0, identity(n)) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(gaussian_energy(GridFunction::Zero(7), v0, identity(n)), Error);
}

TEST_CASE("gaussian gradient matches central differences") {
    const OperatorMatrix k{0.2 * build_laplacian(36).entries, true};
    const GridFunction v0 = GridFunction::Zero(36);
    for (int s = 0; s < 10; ++s) {
        const GridFunction v = random_potential(36, 40 + s);
        const FdCheck r = fd_check([&](const GridFunction& x) { return gaussian_energy(x, v0, k); },
                                   [&](const GridFunction& x) { return gaussian_grad(x, v0, k); }, v, 1e-5);
        CHECK(r.max_error <= 1e-8);
    }
}

TEST_CASE("filtered difference") {
    const int n = 6;
    GridFunction v(n);
    v << 0.3, -1.0, 2.5, 0.0, 4.0, -0.7;
    const GridFunction w = filtered_difference(build_shift_difference(n, 1), v, GridFunction::Zero(n));
    for (int x = 0; x < n - 1; ++x) {
        CHECK(w(x) == v(x + 1) - v(x));
    }
    CHECK(filtered_difference(build_shift_difference(n, 1), v, v).isZero(0.0));

    for (int k = 0; k < 20; ++k) {
        const OperatorMatrix wm{random_matrix(9, 9, 500 + k), false};
        const GridFunction a = random_potential(9, 600 + k);
        const GridFunction b = random_potential(9, 700 + k);
        const GridFunction om = filtered_difference(wm, a, b);
        const double lhs = 0.5 * om.squaredNorm();
        const double rhs = gaussian_energy(a, b, wm.transpose_product());
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, lhs));
    }
}

TEST_CASE("periodic template") {
    const GridFunction t = periodic_template(1.0, 6.0, 0.0, 36);
    for (int j = 0; j < 36; ++j) {
        CHECK(t(j) == std::sin(2.0 * std::numbers::pi * (j + 1) / 6.0));
    }
    CHECK(periodic_template(0.0, 6.0, 0.3, 36).isZero(0.0));
    const GridFunction v1 = periodic_template(2.0 / 3.0, 6.0, 0.0, 36);
    CHECK(v1(0) == doctest::Approx(2.0 / 3.0 * std::sin(std::numbers::pi / 3.0)));
    CHECK_THROWS_AS(periodic_template(1.0, 0.0, 0.0, 36), Error);
}

TEST_CASE("global mixing") {
    const int n = 10;
    const GaussianPrior a{random_potential(n, 1), build_laplacian(n)};
    const GaussianPrior b{random_potential(n, 2), identity(n)};
    const GridFunction v = random_potential(n, 3);
    for (MixMode mode : {MixMode::energy, MixMode::template_mix}) {
        CHECK(global_mix_energy(v, 0.0, a, b, mode) == doctest::Approx(gaussian_energy(v, a.mean, a.inv_cov)));
        CHECK(global_mix_energy(v, 1.0, a, b, mode) == doctest::Approx(gaussian_energy(v, b.mean, b.inv_cov)));
    }
    const GaussianPrior c{random_potential(n, 4), identity(n)};
    const double diff = global_mix_energy(v, 0.5, b, c, MixMode::template_mix) -
                        global_mix_energy(v, 0.5, b, c, MixMode::energy);
    CHECK(diff == doctest::Approx(-0.125 * (b.mean - c.mean).squaredNorm()).epsilon(1e-12));
    CHECK_THROWS_AS(global_mix_energy(v, 1.5, a, b, MixMode::energy), Error);
}

TEST_CASE("log normalization") {
    const LogNormalization id = log_normalization(identity(4));
    CHECK(id.value == doctest::Approx(2.0 * std::log(2.0 * std::numbers::pi)).epsilon(1e-14));
    CHECK(id.rank == 4);
    CHECK(id.zero_modes == 0);

    const OperatorMatrix k = build_laplacian(6);
    const OperatorMatrix k2{2.0 * k.entries, true};
    const LogNormalization a = log_normalization(k);
    const LogNormalization b = log_normalization(k2);
    CHECK(a.rank == 5);
    CHECK(a.zero_modes == 1);
    CHECK(a.value - b.value == doctest::Approx(0.5 * a.rank * std::log(2.0)).epsilon(1e-12));

    // Periodic N = 6 Laplacian spectrum: 2 - 2 cos(2 pi k / 6), k = 1..5.
    double oracle_value = 0.0;
    for (int q = 1; q < 6; ++q) {
        const double lam = 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * q / 6.0);
        oracle_value -= 0.5 * std::log(lam / (2.0 * std::numbers::pi));
    }
    CHECK(a.value == doctest::Approx(oracle_value).epsilon(1e-12));

    const OperatorMatrix bad{-identity(3).entries, true};
    try {
        log_normalization(bad);
        FAIL("expected not-PSD error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::not_psd);
    }
}

TEST_CASE("hyperfield energy forms") {
    const int n = 12;
    const FilterSpec f1{build_shift_difference(n, 1), random_potential(n, 10)};
    const FilterSpec f2{build_shift_difference(n, 3), random_potential(n, 11)};
    const GridFunction v = random_potential(n, 12);

    const FieldState zero{FieldKind::binary_hyperfield, GridFunction::Zero(n)};
    CHECK(hyperfield_energy(v, zero, f1, f2, false) == doctest::Approx(0.5 * f1.omega(v).squaredNorm()));

    CounterRng rng(5);
    for (int k = 0; k < 100; ++k) {
        const FieldState t{FieldKind::binary_hyperfield, random_binary(n, rng)};
        CHECK(hyperfield_energy(v, t, f1, f2, false) == switched_hyperfield_energy(v, t, f1, f2));
    }

    const FieldState bad{FieldKind::binary_hyperfield, GridFunction::Constant(n, 0.5)};
    CHECK_THROWS_AS(hyperfield_energy(v, bad, f1, f2, false), Error);
    const FieldState real{FieldKind::real_hyperfield, GridFunction::Constant(n, 0.5)};
    CHECK_NOTHROW(hyperfield_energy(v, real, f1, f2, false));
}

TEST_CASE("normalization is constant in theta when filters coincide") {
    const int n = 10;
    const FilterSpec f1{build_shift_difference(n, 1), random_potential(n, 20)};
    const FilterSpec f2{build_shift_difference(n, 1), random_potential(n, 21)};
    CounterRng rng(9);
    const FieldState a{FieldKind::binary_hyperfield, random_binary(n, rng)};
    const double za = log_normalization(mixed_filter(a, f1.filter, f2.filter).transpose_product()).value;
    for (int k = 0; k < 10; ++k) {
        const FieldState b{FieldKind::real_hyperfield, GridFunction::Constant(n, 0.1 * k)};
        const double zb = log_normalization(mixed_filter(b, f1.filter, f2.filter).transpose_product()).value;
        CHECK(std::abs(za - zb) <= 1e-10);
    }
}

TEST_CASE("effective template") {
    const int n = 12;
    const GridFunction t = random_potential(n, 30);
    const EffectiveTemplate plain = effective_template(t, OperatorMatrix{Eigen::MatrixXd::Zero(n, n), true});
    CHECK((plain.mean - t).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(plain.inv_cov.entries == Eigen::MatrixXd::Identity(n, n));

    const OperatorMatrix lap = build_laplacian(n);
    const EffectiveTemplate smooth = effective_template(t, lap);
    const oracle::Eigen_ modes = oracle::jacobi(lap.entries);
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXd phi(n);
        for (int j = 0; j < n; ++j) {
            phi(j) = modes.vectors[k][j];
        }
        CHECK(phi.dot(smooth.mean) == doctest::Approx(phi.dot(t) / (1.0 + modes.values[k])).epsilon(1e-9).scale(1.0));
    }

    double reference = 0.0;
    for (int s = 0; s < 10; ++s) {
        const GridFunction v = random_potential(n, 40 + s, 3.0);
        const double lhs = 0.5 * (v - t).squaredNorm() + 0.5 * v.dot(lap.entries * v);
        const double c = lhs - gaussian_energy(v, smooth.mean, smooth.inv_cov);
        if (s == 0) {
            reference = c;
        }
        CHECK(std::abs(c - reference) <= 1e-10);
    }

    const OperatorMatrix minus_id{-Eigen::MatrixXd::Identity(n, n), true};
    CHECK_THROWS_AS(effective_template(t, minus_id), Error);
}

TEST_CASE("two-hyperfield effective form differs from the direct form by a constant") {
    const int n = 12;
    const GridFunction v1 = periodic_template(1.0, 6.0, 0.0, n);
    const GridFunction v2 = periodic_template(1.0, 4.0, 0.5, n);
    const OperatorMatrix w1 = identity(n);
    const OperatorMatrix w2{identity(n).entries + 0.5 * build_shift_difference(n, 1).entries, false};
    CounterRng rng(3);
    const GridFunction th = random_binary(n, rng);
    GridFunction thp(n);
    for (int j = 0; j < n; ++j) {
        thp(j) = rng.uniform();
    }
    const TwoHyperfieldForm form = effective_two_hyperfield(v1, v2, w1, w2, th, thp);
    for (int s = 0; s < 10; ++s) {
        const GridFunction v = random_potential(n, 90 + s, 2.0);
        CHECK(std::abs(form.energy(v) - two_hyperfield_direct_energy(v, v1, v2, w1, w2, th, thp)) <= 1e-10);
    }
}

TEST_CASE("auxiliary field conventions") {
    const int n = 8;
    const GridFunction v = random_potential(n, 2);
    const FilterSpec f{identity(n), GridFunction::Zero(n)};
    const FieldState tie = auxiliary_field(v, f, f, kStepMode, 0.0);
    CHECK(tie.values == GridFunction::Ones(n));
    const FieldState off = auxiliary_field(v, f, f, kStepMode, 0.1);
    CHECK(off.values.isZero(0.0));
    const FieldState mid = auxiliary_field(v, f, f, 3.0, 0.0);
    CHECK((mid.values.array() - 0.5).abs().maxCoeff() == 0.0);
    const FieldState soft = auxiliary_field(v, f, FilterSpec{identity(n), v}, 2.0, 0.1);
    CHECK(soft.values.minCoeff() > 0.0);
    CHECK(soft.values.maxCoeff() < 1.0);
    CHECK_THROWS_AS(auxiliary_field(v, f, f, 0.0, 0.0), Error);
    CHECK(sigmoid(0.0, kStepMode) == 1.0);
    CHECK(sigmoid(-1e-300, kStepMode) == 0.0);
}

TEST_CASE("auxiliary field for the fixed-reference configuration") {
    const GridFunction vt = true_potential(36);
    const GridFunction v0 = periodic_template(1.0, 6.0, 0.0, 36);
    const FilterSpec first{identity(36), v0};
    const FilterSpec second{OperatorMatrix{Eigen::MatrixXd::Zero(36, 36), true}, GridFunction::Zero(36)};
    const FieldState b = auxiliary_field(vt, first, second, kStepMode, 0.15);
    for (int x = 0; x < 36; ++x) {
        const double d = vt(x) - v0(x);
        CHECK(b.values(x) == (d * d - 0.15 >= 0.0 ? 1.0 : 0.0));
    }
}

TEST_CASE("discontinuity count and count penalty") {
    CHECK(count_discontinuities(GridFunction::Ones(36)) == 0);
    GridFunction band = GridFunction::Zero(36);
    band.segment(12, 12).setOnes();
    CHECK(count_discontinuities(band) == 2);
    GridFunction wrap = GridFunction::Zero(36);
    wrap(0) = 1.0;
    CHECK(count_discontinuities(wrap) == 1);

    AuxPenalty count{AuxMode::count, 20.0};
    const FieldState f{FieldKind::binary_hyperfield, band};
    CHECK(aux_prior_energy(f, count) == 20.0);
    CHECK(aux_prior_energy(FieldState{FieldKind::binary_hyperfield, GridFunction::Ones(36)}, count) == 0.0);
}

TEST_CASE("quadratic auxiliary penalty equals a first-difference sum of squares") {
    const int n = 16;
    CounterRng rng(8);
    const GridFunction b = random_binary(n, rng);
    AuxPenalty quad{AuxMode::quadratic, 3.0, build_shift_difference(n, 1), GridFunction::Zero(n)};
    double s = 0.0;
    for (int x = 0; x < n; ++x) {
        const double d = b((x + 1) % n) - b(x);
        s += d * d;
    }
    CHECK(aux_prior_energy(FieldState{FieldKind::auxiliary, b}, quad) == doctest::Approx(1.5 * s).epsilon(1e-15));
}

TEST_CASE("fixed-reference switching energy") {
    const int n = 36;
    const GridFunction vt = true_potential(n);
    const GridFunction v0 = periodic_template(1.0, 6.0, 0.0, n);
    const OperatorMatrix lap = build_laplacian(n);
    const double smooth = 0.5 * 0.2 * vt.dot(lap.entries * vt);
    CHECK(switch_energy_fixed_reference(vt, v0, GridFunction::Zero(n), 0.2, 0.2) ==
          doctest::Approx(0.5 * 0.2 * (vt - v0).squaredNorm() + smooth).epsilon(1e-14));
    CHECK(switch_energy_fixed_reference(vt, v0, GridFunction::Ones(n), 0.2, 0.2) ==
          doctest::Approx(smooth).epsilon(1e-14));

    const FilterSpec first{identity(n), v0};
    const FilterSpec second{OperatorMatrix{Eigen::MatrixXd::Zero(n, n), true}, GridFunction::Zero(n)};
    const GridFunction b = auxiliary_field(vt, first, second, kStepMode, 0.15).values;
    double term = 0.0;
    for (int x = 0; x < n; ++x) {
        term += 0.5 * 0.2 * (vt(x) - v0(x)) * (vt(x) - v0(x)) * (1.0 - b(x));
        for (int y : {(x + 1) % n}) {
            term += 0.5 * 0.2 * (vt(y) - vt(x)) * (vt(y) - vt(x));
        }
    }
    CHECK(switch_energy_fixed_reference(vt, v0, b, 0.2, 0.2) == doctest::Approx(term).epsilon(1e-12));
}

TEST_CASE("two-reference switching energy") {
    const int n = 36;
    const GridFunction v1 = periodic_template(2.0 / 3.0, 6.0, 0.0, n);
    const GridFunction v2 = random_potential(n, 4);
    const OperatorMatrix grad = build_shift_difference(n, 1);
    const FilterSpec f1{grad, v1};
    const FilterSpec f2{grad, v2};
    const GridFunction b = auxiliary_field(v1, f1, f2, kStepMode, 0.0).values;
    const double e = switch_energy_two_references(v1, v1, v2, b, 10.0, 10.0);
    const GridFunction w2 = f2.omega(v1);
    double only_second = 0.0;
    for (int x = 0; x < n; ++x) {
        only_second += 5.0 * b(x) * w2(x) * w2(x);
    }
    CHECK(e == doctest::Approx(only_second).epsilon(1e-14));

    CounterRng rng(1);
    const GridFunction v = random_potential(n, 5);
    const double base = switch_energy_two_references(v, v1, v1, GridFunction::Zero(n), 10.0, 10.0);
    for (int k = 0; k < 5; ++k) {
        CHECK(switch_energy_two_references(v, v1, v1, random_binary(n, rng), 10.0, 10.0) ==
              doctest::Approx(base).epsilon(1e-13));
    }
}

TEST_CASE("cup function") {
    CHECK(cup_energy(GridFunction::Zero(5), 5.0, 10.0, 0.7, 0.0) == 0.0);
    CHECK(cup_energy(GridFunction::Constant(5, 1.5), 5.0, 10.0, 0.7, 1.5) == 0.0);
    CHECK(cup_psi(10.0, 5.0, 10.0, 0.7, 0.0) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(std::abs(cup_psi(1e6, 5.0, 10.0, 0.7, 0.0) - 5.0) <= 0.05);
    double previous = 0.0;
    for (int k = 0; k <= 100; ++k) {
        const double t = 0.25 * k;
        CHECK(cup_psi(0.3 + t, 5.0, 10.0, 0.7, 0.3) == cup_psi(0.3 - t, 5.0, 10.0, 0.7, 0.3));
        const double p = cup_psi(t, 5.0, 10.0, 0.7, 0.0);
        CHECK(p >= previous);
        previous = p;
    }
    CHECK(cup_psi_derivative(0.0, 5.0, 10.0, 0.7, 0.0) == 0.0);
    CHECK_THROWS_AS(cup_energy(GridFunction::Zero(3), -1.0, 10.0, 0.7, 0.0), Error);
}

TEST_CASE("composite energy is the exact sum of parts") {
    const int n = 12;
    const GridFunction v = random_potential(n, 6);
    const GaussianPrior g{GridFunction::Zero(n), build_laplacian(n)};
    const CupPrior c{FilterSpec{build_shift_difference(n, 1), GridFunction::Zero(n)}};
    const PriorModel composite{CompositePrior{{PriorModel{g}, PriorModel{c}}}};
    CHECK(composite.energy(v) == PriorModel{g}.energy(v) + PriorModel{c}.energy(v));
}

}
