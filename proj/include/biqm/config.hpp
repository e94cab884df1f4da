#pragma once

#include "biqm/optimizer.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace biqm {

enum class DataSource { sample, file };
enum class PriorKind { gaussian, switch_fixed, switch_two, hyperfield, cup };
enum class CovarianceKind { laplacian, periodic, multiperiod, rbf, identity };
enum class TemplateKind { zero, sine, signed_square_sine };
enum class InitialGuess { zero, template_mean, piecewise, annealed, chain };
enum class BoundaryKind { wrap, ends, none };
enum class DegeneracyMode { confluent, jitter, raise };

struct TemplateSpec {
    TemplateKind kind = TemplateKind::zero;
    double amplitude = 1.0;
    double period = 6.0;
    double phase = 0.0;

    bool operator==(const TemplateSpec&) const = default;
};

GridFunction make_template(const TemplateSpec& spec, int n);

struct ReconstructionConfig {
    std::string preset;
    std::uint64_t seed = 1;

    int lattice_size = 36;
    double mass = 0.25;
    double beta = 4.0;

    DataSource data_source = DataSource::sample;
    int sample_count = 200;
    std::string data_file;

    PriorKind prior_kind = PriorKind::gaussian;
    CovarianceKind covariance = CovarianceKind::laplacian;
    double lambda = 0.2;
    double gamma = 1.0;
    double period = 6.0;
    bool periodic_shift = true;
    int multiperiod_kmax = 2;
    double rbf_sigma = 1.0;
    TemplateSpec first_template;
    TemplateSpec second_template;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double threshold = 0.0;
    double tau = 0.0;
    Combination combination = Combination::switched;
    bool normalization = false;
    double nu_start = 1.0;
    double nu_final = 1000.0;
    int nu_stages = 0;  // 0: step function from the start
    double cup_a = 5.0;
    double cup_b = 10.0;
    double cup_gamma = 0.7;
    double cup_x0 = 0.0;

    double mu = 0.0;
    bool kappa_auto = true;
    double kappa = 0.0;

    PreconditionerKind preconditioner = PreconditionerKind::quasi_newton;
    double tolerance = 1e-6;
    double stage_tolerance = 1e-3;
    int max_iterations = 5000;
    int mu_stages = 10;
    double mu_start_ratio = 1e-3;
    int field_rounds = 50;
    int field_update_interval = 50;
    BoundaryKind boundary = BoundaryKind::wrap;
    DegeneracyMode degeneracy = DegeneracyMode::confluent;

    AnnealSchedule anneal;

    InitialGuess initial = InitialGuess::zero;
    int impurity_first = 13;  // lattice coordinate x, inclusive
    int impurity_last = 24;
    std::string chain_preset;

    bool operator==(const ReconstructionConfig&) const = default;
};

/// Range checks; throws ConfigError naming the offending key.
void validate_config(const ReconstructionConfig& config);

/// Sets one key ("section.name") from its textual value.
void apply_setting(ReconstructionConfig& config, const std::string& key, const std::string& value, int line = 0);

/// Grammar (one statement per line):
///   '#' starts a comment; blank lines are ignored
///   '[' section ']' opens a section
///   name '=' value sets section.name; values run to the end of the line, trimmed
/// A 'preset' key in [run] is applied first, before any other key.
ReconstructionConfig parse_config(std::istream& in);
ReconstructionConfig parse_config_file(const std::string& path);
ReconstructionConfig parse_config_string(const std::string& text);

std::string serialize_config(const ReconstructionConfig& config);

/// All accepted keys in serialization order.
std::vector<std::string> config_keys();

/// Shortest text that reads back to the same double.
std::string format_real(double x);

}  // namespace biqm
