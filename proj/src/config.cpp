#include "biqm/config.hpp"

#include "biqm/errors.hpp"
#include "biqm/presets.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace biqm {

GridFunction make_template(const TemplateSpec& spec, int n) {
    switch (spec.kind) {
    case TemplateKind::zero:
        return GridFunction::Zero(n);
    case TemplateKind::sine:
        return periodic_template(spec.amplitude, spec.period, spec.phase, n);
    case TemplateKind::signed_square_sine: {
        const GridFunction s = periodic_template(1.0, spec.period, spec.phase, n);
        return spec.amplitude * s.cwiseProduct(s.cwiseAbs());
    }
    }
    return GridFunction::Zero(n);
}

std::string format_real(double x) {
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

namespace {

using Config = ReconstructionConfig;

template <class E>
using NameTable = std::vector<std::pair<E, const char*>>;

const NameTable<DataSource> kSources{{DataSource::sample, "sample"}, {DataSource::file, "file"}};
const NameTable<PriorKind> kPriors{{PriorKind::gaussian, "gaussian"},
                                   {PriorKind::switch_fixed, "switch-fixed"},
                                   {PriorKind::switch_two, "switch-two"},
                                   {PriorKind::hyperfield, "hyperfield"},
                                   {PriorKind::cup, "cup"}};
const NameTable<CovarianceKind> kCovariances{{CovarianceKind::laplacian, "laplacian"},
                                             {CovarianceKind::periodic, "periodic"},
                                             {CovarianceKind::multiperiod, "multiperiod"},
                                             {CovarianceKind::rbf, "rbf"},
                                             {CovarianceKind::identity, "identity"}};
const NameTable<TemplateKind> kTemplates{{TemplateKind::zero, "zero"},
                                         {TemplateKind::sine, "sine"},
                                         {TemplateKind::signed_square_sine, "signed-square-sine"}};
const NameTable<Combination> kCombinations{{Combination::switched, "switched"}, {Combination::mixed, "mixed"}};
const NameTable<PreconditionerKind> kPreconditioners{{PreconditionerKind::quasi_newton, "quasi-newton"},
                                                     {PreconditionerKind::prior_operator, "prior"},
                                                     {PreconditionerKind::identity, "identity"}};
const NameTable<BoundaryKind> kBoundaries{
    {BoundaryKind::wrap, "wrap"}, {BoundaryKind::ends, "ends"}, {BoundaryKind::none, "none"}};
const NameTable<DegeneracyMode> kDegeneracy{{DegeneracyMode::confluent, "confluent"},
                                            {DegeneracyMode::jitter, "jitter"},
                                            {DegeneracyMode::raise, "raise"}};
const NameTable<InitialGuess> kGuesses{{InitialGuess::zero, "zero"},
                                       {InitialGuess::template_mean, "template"},
                                       {InitialGuess::piecewise, "piecewise"},
                                       {InitialGuess::annealed, "annealed"},
                                       {InitialGuess::chain, "chain"}};

[[noreturn]] void bad_value(const std::string& key, const std::string& value, int line, const std::string& want) {
    std::ostringstream msg;
    if (line > 0) {
        msg << "line " << line << ": ";
    }
    msg << "invalid value '" << value << "' for " << key << " (expected " << want << ")";
    throw ConfigError(msg.str(), line, key);
}

template <class E>
E parse_enum(const NameTable<E>& table, const std::string& key, const std::string& value, int line) {
    std::string want;
    for (const auto& [e, name] : table) {
        if (value == name) {
            return e;
        }
        want += want.empty() ? "" : "|";
        want += name;
    }
    bad_value(key, value, line, want);
}

template <class E>
std::string enum_name(const NameTable<E>& table, E e) {
    for (const auto& [x, name] : table) {
        if (x == e) {
            return name;
        }
    }
    return "?";
}

double parse_real(const std::string& key, const std::string& value, int line) {
    double x = 0.0;
    const char* first = value.data();
    const char* last = first + value.size();
    if (!value.empty() && value.front() == '+') {
        ++first;
    }
    auto res = std::from_chars(first, last, x);
    if (res.ec != std::errc{} || res.ptr != last || std::isnan(x)) {
        bad_value(key, value, line, "a real number");
    }
    return x;
}

long long parse_integer(const std::string& key, const std::string& value, int line) {
    long long x = 0;
    auto res = std::from_chars(value.data(), value.data() + value.size(), x);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
        bad_value(key, value, line, "an integer");
    }
    return x;
}

int parse_int(const std::string& key, const std::string& value, int line) {
    const long long x = parse_integer(key, value, line);
    if (x < -2147483647LL || x > 2147483647LL) {
        bad_value(key, value, line, "a 32-bit integer");
    }
    return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value, int line) {
    std::uint64_t x = 0;
    auto res = std::from_chars(value.data(), value.data() + value.size(), x);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
        bad_value(key, value, line, "an unsigned 64-bit integer");
    }
    return x;
}

bool parse_bool(const std::string& key, const std::string& value, int line) {
    if (value == "true") {
        return true;
    }
    if (value == "false") {
        return false;
    }
    bad_value(key, value, line, "true|false");
}

struct Entry {
    const char* key;
    std::function<std::string(const Config&)> get;
    std::function<void(Config&, const std::string&, int)> set;
};

#define BIQM_REAL(name, field)                                                              \
    Entry {                                                                                 \
        name, [](const Config& c) { return format_real(c.field); },                         \
            [](Config& c, const std::string& v, int l) { c.field = parse_real(name, v, l); } \
    }
#define BIQM_INT(name, field)                                                              \
    Entry {                                                                                \
        name, [](const Config& c) { return std::to_string(c.field); },                     \
            [](Config& c, const std::string& v, int l) { c.field = parse_int(name, v, l); } \
    }
#define BIQM_BOOL(name, field)                                                              \
    Entry {                                                                                 \
        name, [](const Config& c) { return std::string(c.field ? "true" : "false"); },      \
            [](Config& c, const std::string& v, int l) { c.field = parse_bool(name, v, l); } \
    }
#define BIQM_ENUM(name, field, table)                                                              \
    Entry {                                                                                        \
        name, [](const Config& c) { return enum_name(table, c.field); },                           \
            [](Config& c, const std::string& v, int l) { c.field = parse_enum(table, name, v, l); } \
    }
#define BIQM_STRING(name, field) \
    Entry { name, [](const Config& c) { return c.field; }, [](Config& c, const std::string& v, int) { c.field = v; } }

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table{
        BIQM_STRING("run.preset", preset),
        Entry{"run.seed", [](const Config& c) { return std::to_string(c.seed); },
              [](Config& c, const std::string& v, int l) { c.seed = parse_u64("run.seed", v, l); }},
        BIQM_INT("lattice.size", lattice_size),
        BIQM_REAL("lattice.mass", mass),
        BIQM_REAL("lattice.beta", beta),
        BIQM_ENUM("data.source", data_source, kSources),
        BIQM_INT("data.count", sample_count),
        BIQM_STRING("data.file", data_file),
        BIQM_ENUM("prior.kind", prior_kind, kPriors),
        BIQM_ENUM("prior.covariance", covariance, kCovariances),
        BIQM_REAL("prior.lambda", lambda),
        BIQM_REAL("prior.gamma", gamma),
        BIQM_REAL("prior.period", period),
        BIQM_BOOL("prior.periodic_shift", periodic_shift),
        BIQM_INT("prior.multiperiod_kmax", multiperiod_kmax),
        BIQM_REAL("prior.rbf_sigma", rbf_sigma),
        BIQM_ENUM("prior.template", first_template.kind, kTemplates),
        BIQM_REAL("prior.template_amplitude", first_template.amplitude),
        BIQM_REAL("prior.template_period", first_template.period),
        BIQM_REAL("prior.template_phase", first_template.phase),
        BIQM_ENUM("prior.second_template", second_template.kind, kTemplates),
        BIQM_REAL("prior.second_amplitude", second_template.amplitude),
        BIQM_REAL("prior.second_period", second_template.period),
        BIQM_REAL("prior.second_phase", second_template.phase),
        BIQM_REAL("prior.lambda1", lambda1),
        BIQM_REAL("prior.lambda2", lambda2),
        BIQM_REAL("prior.threshold", threshold),
        BIQM_REAL("prior.tau", tau),
        BIQM_ENUM("prior.combination", combination, kCombinations),
        BIQM_BOOL("prior.normalization", normalization),
        BIQM_REAL("prior.nu_start", nu_start),
        BIQM_REAL("prior.nu_final", nu_final),
        BIQM_INT("prior.nu_stages", nu_stages),
        BIQM_REAL("prior.cup_a", cup_a),
        BIQM_REAL("prior.cup_b", cup_b),
        BIQM_REAL("prior.cup_gamma", cup_gamma),
        BIQM_REAL("prior.cup_x0", cup_x0),
        BIQM_REAL("energy.mu", mu),
        Entry{"energy.kappa",
              [](const Config& c) { return c.kappa_auto ? std::string("auto") : format_real(c.kappa); },
              [](Config& c, const std::string& v, int l) {
                  if (v == "auto") {
                      c.kappa_auto = true;
                  } else {
                      c.kappa_auto = false;
                      c.kappa = parse_real("energy.kappa", v, l);
                  }
              }},
        BIQM_ENUM("optimizer.preconditioner", preconditioner, kPreconditioners),
        BIQM_REAL("optimizer.tolerance", tolerance),
        BIQM_REAL("optimizer.stage_tolerance", stage_tolerance),
        BIQM_INT("optimizer.max_iterations", max_iterations),
        BIQM_INT("optimizer.mu_stages", mu_stages),
        BIQM_REAL("optimizer.mu_start_ratio", mu_start_ratio),
        BIQM_INT("optimizer.field_rounds", field_rounds),
        BIQM_INT("optimizer.field_update_interval", field_update_interval),
        BIQM_ENUM("optimizer.boundary", boundary, kBoundaries),
        BIQM_ENUM("optimizer.degeneracy", degeneracy, kDegeneracy),
        BIQM_REAL("anneal.initial_temperature", anneal.initial_temperature),
        BIQM_REAL("anneal.cooling", anneal.cooling),
        BIQM_INT("anneal.moves", anneal.moves_per_temperature),
        BIQM_REAL("anneal.final_temperature", anneal.final_temperature),
        BIQM_ENUM("initial.guess", initial, kGuesses),
        BIQM_INT("initial.impurity_first", impurity_first),
        BIQM_INT("initial.impurity_last", impurity_last),
        BIQM_STRING("initial.chain_preset", chain_preset),
    };
    return table;
}

#undef BIQM_REAL
#undef BIQM_INT
#undef BIQM_BOOL
#undef BIQM_ENUM
#undef BIQM_STRING

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void range_error(const std::string& key, const std::string& what) {
    throw ConfigError(key + " " + what, 0, key);
}

void require(bool ok, const char* key, const char* what) {
    if (!ok) {
        range_error(key, what);
    }
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const Entry& e : entries()) {
        keys.emplace_back(e.key);
    }
    return keys;
}

void apply_setting(ReconstructionConfig& config, const std::string& key, const std::string& value, int line) {
    for (const Entry& e : entries()) {
        if (key == e.key) {
            e.set(config, value, line);
            return;
        }
    }
    std::ostringstream msg;
    if (line > 0) {
        msg << "line " << line << ": ";
    }
    msg << "unknown key '" << key << "'";
    throw ConfigError(msg.str(), line, key);
}

void validate_config(const ReconstructionConfig& c) {
    require(c.lattice_size >= 2, "lattice.size", "must be at least 2");
    require(c.mass > 0.0 && std::isfinite(c.mass), "lattice.mass", "must be positive");
    require(c.beta >= 0.0 && std::isfinite(c.beta), "lattice.beta", "must be nonnegative");
    require(c.sample_count >= 0, "data.count", "must be nonnegative");
    require(c.data_source != DataSource::file || !c.data_file.empty(), "data.file", "is required for file data");
    require(c.lambda >= 0.0, "prior.lambda", "must be nonnegative");
    require(c.gamma >= 0.0, "prior.gamma", "must be nonnegative");
    if (c.prior_kind == PriorKind::gaussian &&
        (c.covariance == CovarianceKind::periodic || c.covariance == CovarianceKind::multiperiod)) {
        const int shift = static_cast<int>(std::nearbyint(c.period));
        require(shift >= 1 && shift < c.lattice_size, "prior.period", "must round to 1..N-1");
        if (c.covariance == CovarianceKind::multiperiod) {
            require(c.multiperiod_kmax >= 1, "prior.multiperiod_kmax", "must be at least 1");
            require(static_cast<long>(c.multiperiod_kmax) * shift < c.lattice_size, "prior.multiperiod_kmax",
                    "times the period must stay below N");
        }
    }
    require(c.rbf_sigma >= 0.0, "prior.rbf_sigma", "must be nonnegative");
    require(c.first_template.period != 0.0, "prior.template_period", "must be nonzero");
    require(c.second_template.period != 0.0, "prior.second_period", "must be nonzero");
    require(c.lambda1 >= 0.0, "prior.lambda1", "must be nonnegative");
    require(c.lambda2 >= 0.0, "prior.lambda2", "must be nonnegative");
    require(c.tau >= 0.0, "prior.tau", "must be nonnegative");
    require(c.nu_start > 0.0, "prior.nu_start", "must be positive");
    require(c.nu_final >= c.nu_start, "prior.nu_final", "must be at least prior.nu_start");
    require(c.nu_stages >= 0, "prior.nu_stages", "must be nonnegative");
    require(c.cup_a > 0.0, "prior.cup_a", "must be positive");
    require(c.cup_b > 0.0, "prior.cup_b", "must be positive");
    require(c.cup_gamma > 0.0, "prior.cup_gamma", "must be positive");
    require(c.mu >= 0.0 && std::isfinite(c.mu), "energy.mu", "must be nonnegative");
    require(std::isfinite(c.kappa), "energy.kappa", "must be finite");
    require(c.tolerance > 0.0, "optimizer.tolerance", "must be positive");
    require(c.stage_tolerance > 0.0, "optimizer.stage_tolerance", "must be positive");
    require(c.max_iterations >= 1, "optimizer.max_iterations", "must be at least 1");
    require(c.mu_stages >= 1, "optimizer.mu_stages", "must be at least 1");
    require(c.mu_start_ratio > 0.0 && c.mu_start_ratio <= 1.0, "optimizer.mu_start_ratio", "must lie in (0, 1]");
    require(c.field_rounds >= 1, "optimizer.field_rounds", "must be at least 1");
    require(c.field_update_interval >= 1, "optimizer.field_update_interval", "must be at least 1");
    require(c.anneal.initial_temperature > 0.0, "anneal.initial_temperature", "must be positive");
    require(c.anneal.cooling > 0.0 && c.anneal.cooling < 1.0, "anneal.cooling", "must lie in (0, 1)");
    require(c.anneal.moves_per_temperature >= 0, "anneal.moves", "must be nonnegative");
    require(c.anneal.final_temperature > 0.0, "anneal.final_temperature", "must be positive");
    require(c.impurity_first >= 1 && c.impurity_first <= c.impurity_last && c.impurity_last <= c.lattice_size,
            "initial.impurity_first", "and initial.impurity_last must satisfy 1 <= first <= last <= N");
    require(c.initial != InitialGuess::chain || !c.chain_preset.empty(), "initial.chain_preset",
            "is required for chained initial guesses");
    if (c.initial == InitialGuess::annealed) {
        require(c.prior_kind == PriorKind::switch_two || c.prior_kind == PriorKind::hyperfield, "initial.guess",
                "annealed requires a two-template prior");
    }
}

ReconstructionConfig parse_config(std::istream& in) {
    struct Statement {
        std::string key;
        std::string value;
        int line;
    };
    std::vector<Statement> statements;
    std::string section;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header", lineno);
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'name = value'", lineno);
        }
        const std::string name = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (name.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": missing key name", lineno);
        }
        if (section.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": key '" + name + "' outside any section",
                              lineno);
        }
        statements.push_back({section + "." + name, value, lineno});
    }

    ReconstructionConfig config;
    for (const Statement& s : statements) {
        if (s.key == "run.preset" && !s.value.empty()) {
            try {
                config = preset_config(s.value);
            } catch (const Error& e) {
                throw ConfigError("line " + std::to_string(s.line) + ": " + e.what(), s.line, s.key);
            }
        }
    }
    for (const Statement& s : statements) {
        apply_setting(config, s.key, s.value, s.line);
    }
    validate_config(config);
    return config;
}

ReconstructionConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

ReconstructionConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::io, "cannot read config file " + path);
    }
    return parse_config(in);
}

std::string serialize_config(const ReconstructionConfig& config) {
    std::ostringstream out;
    std::string section;
    for (const Entry& e : entries()) {
        const std::string key = e.key;
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) {
                out << '\n';
            }
            out << '[' << sec << "]\n";
            section = sec;
        }
        out << key.substr(dot + 1) << " = " << e.get(config) << '\n';
    }
    return out.str();
}

}  // namespace biqm
