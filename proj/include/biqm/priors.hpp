#pragma once

#include "biqm/lattice.hpp"

#include <limits>
#include <optional>
#include <variant>
#include <vector>

namespace biqm {

/// Steepness value selecting the step function Theta instead of a sigmoid.
inline constexpr double kStepMode = std::numeric_limits<double>::infinity();

/// sigma(x) = 1 / (1 + exp(-2 nu x)); for nu = kStepMode, Theta(x) with Theta(0) = 1.
double sigmoid(double x, double nu);
/// d sigma / dx = 2 nu sigma (1 - sigma); zero in step mode.
double sigmoid_derivative(double x, double nu);

/// omega = W (v - reference).
struct FilterSpec {
    OperatorMatrix filter;
    GridFunction reference;

    GridFunction omega(const GridFunction& v) const;
};

GridFunction filtered_difference(const OperatorMatrix& w, const GridFunction& v, const GridFunction& v0);

double gaussian_energy(const GridFunction& v, const GridFunction& v0, const OperatorMatrix& k0);
GridFunction gaussian_grad(const GridFunction& v, const GridFunction& v0, const OperatorMatrix& k0);

/// theta1 * sin(2 pi x / theta2 + theta3) sampled on x = 1..n.
GridFunction periodic_template(double amplitude, double period, double phase, int n);

enum class FieldKind { binary_hyperfield, real_hyperfield, auxiliary };

struct FieldState {
    FieldKind kind = FieldKind::binary_hyperfield;
    GridFunction values;
    double steepness = kStepMode;
};

/// Throws invalid_parameter when values violate the kind's range.
void validate_field(const FieldState& field);

/// N_d: adjacent index pairs (no wraparound) with differing values.
int count_discontinuities(const GridFunction& field);

/// B(x) = sigma(|omega1(x)|^2 - |omega2(x)|^2 - vartheta).
FieldState auxiliary_field(const GridFunction& v, const FilterSpec& first, const FilterSpec& second,
                           double nu, double vartheta);

enum class AuxMode { none, count, quadratic, sigmoid };

/// Hyperprior on a binary or auxiliary field.
struct AuxPenalty {
    AuxMode mode = AuxMode::none;
    double tau = 0.0;
    OperatorMatrix filter;  // W_B, quadratic and sigmoid modes
    GridFunction target;    // t_B
    double threshold = 0.0;
    double steepness = 1.0;
};

double aux_prior_energy(const FieldState& field, const AuxPenalty& penalty);
/// dE_B / dB; zero for count mode.
GridFunction aux_prior_field_gradient(const FieldState& field, const AuxPenalty& penalty);

struct GaussianPrior {
    GridFunction mean;
    OperatorMatrix inv_cov;
};

enum class MixMode { energy, template_mix };

struct GlobalMixPrior {
    GaussianPrior first;
    GaussianPrior second;
    double theta = 0.0;
    MixMode mode = MixMode::energy;
};

double global_mix_energy(const GridFunction& v, double theta, const GaussianPrior& first,
                         const GaussianPrior& second, MixMode mode);

struct LogNormalization {
    double value = 0.0;
    int rank = 0;
    int zero_modes = 0;
};

/// -1/2 sum ln(lambda_i / 2 pi) over eigenvalues above 1e-10 * spectral range.
LogNormalization log_normalization(const OperatorMatrix& k0);

/// Local mixing: omega(x) = (1 - theta(x)) omega1(x) + theta(x) omega2(x).
struct HyperfieldPrior {
    FilterSpec first;
    FilterSpec second;
    FieldState theta;
    bool include_normalization = false;
    AuxPenalty hyperprior;
};

double hyperfield_energy(const GridFunction& v, const FieldState& theta, const FilterSpec& first,
                         const FilterSpec& second, bool include_normalization);
/// 1/2 sum [(1 - theta)|omega1|^2 + theta |omega2|^2]; equals the mixed form for binary theta.
double switched_hyperfield_energy(const GridFunction& v, const FieldState& theta, const FilterSpec& first,
                                  const FilterSpec& second);
/// Inverse covariance of the mixed filter, rows (1 - theta(x)) W1(x,:) + theta(x) W2(x,:).
OperatorMatrix mixed_filter(const FieldState& theta, const OperatorMatrix& w1, const OperatorMatrix& w2);

struct EffectiveTemplate {
    GridFunction mean;
    OperatorMatrix inv_cov;
};

/// v0 = (I + K)^-1 v0_tilde, K0 = I + K.
EffectiveTemplate effective_template(const GridFunction& v0_tilde, const OperatorMatrix& k);

/// Two hyperfields: theta mixes per-point templates, theta_prime mixes per-point filter rows.
double two_hyperfield_direct_energy(const GridFunction& v, const GridFunction& v1, const GridFunction& v2,
                                    const OperatorMatrix& w1, const OperatorMatrix& w2,
                                    const GridFunction& theta, const GridFunction& theta_prime);

struct TwoHyperfieldForm {
    GridFunction mean;
    OperatorMatrix inv_cov;
    double constant = 0.0;

    double energy(const GridFunction& v) const;
};

TwoHyperfieldForm effective_two_hyperfield(const GridFunction& v1, const GridFunction& v2,
                                           const OperatorMatrix& w1, const OperatorMatrix& w2,
                                           const GridFunction& theta, const GridFunction& theta_prime);

enum class Combination { switched, mixed };

/// Non-Gaussian prior with B = B(v) switching between two filtered differences.
struct SwitchingPrior {
    FilterSpec first;
    FilterSpec second;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double steepness = kStepMode;
    double threshold = 0.0;
    Combination combination = Combination::switched;
    AuxPenalty penalty;
    std::optional<GridFunction> frozen;  // B held fixed instead of recomputed from v

    FieldState field(const GridFunction& v) const;
};

double switch_energy_fixed_reference(const GridFunction& v, const GridFunction& v0, const GridFunction& b,
                                     double lambda1, double lambda2);
double switch_energy_two_references(const GridFunction& v, const GridFunction& v1, const GridFunction& v2,
                                    const GridFunction& b, double lambda1, double lambda2);

struct CupPrior {
    FilterSpec omega;
    double a = 5.0;
    double b = 10.0;
    double gamma = 0.7;
    double x0 = 0.0;
};

/// psi(x) = a (1 - 1 / (1 + (|x - x0| / b)^gamma)).
double cup_psi(double x, double a, double b, double gamma, double x0);
/// psi'(x); taken as 0 at x = x0.
double cup_psi_derivative(double x, double a, double b, double gamma, double x0);
double cup_energy(const GridFunction& omega, double a, double b, double gamma, double x0);

class PriorModel;

struct CompositePrior {
    std::vector<PriorModel> parts;
};

class PriorModel {
public:
    using Variant =
        std::variant<GaussianPrior, GlobalMixPrior, HyperfieldPrior, SwitchingPrior, CupPrior, CompositePrior>;

    PriorModel(GaussianPrior p) : impl_(std::move(p)) {}
    PriorModel(GlobalMixPrior p) : impl_(std::move(p)) {}
    PriorModel(HyperfieldPrior p) : impl_(std::move(p)) {}
    PriorModel(SwitchingPrior p) : impl_(std::move(p)) {}
    PriorModel(CupPrior p) : impl_(std::move(p)) {}
    PriorModel(CompositePrior p) : impl_(std::move(p)) {}

    const Variant& variant() const { return impl_; }
    Variant& variant() { return impl_; }

    double energy(const GridFunction& v) const;
    /// Switching field B(v) or hyperfield theta of the first component that has one.
    std::optional<FieldState> field(const GridFunction& v) const;
    /// Quadratic part used as preconditioner: sum of the filters' W^T W weighted by lambdas.
    OperatorMatrix metric(int n) const;

private:
    Variant impl_;
};

}  // namespace biqm
