#include "biqm/checks.hpp"
#include "biqm/config.hpp"
#include "biqm/datagen.hpp"
#include "biqm/ensemble.hpp"
#include "biqm/errors.hpp"
#include "biqm/optimizer.hpp"
#include "biqm/output.hpp"
#include "biqm/presets.hpp"
#include "biqm/reconstruct.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

std::vector<std::pair<std::string, std::string>> split_overrides(const std::vector<std::string>& raw) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& item : raw) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw biqm::ConfigError("override '" + item + "' must have the form key=value", 0, item);
        }
        out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return out;
}

biqm::ReconstructionConfig load_config(const std::string& path, const std::string& preset,
                                       std::optional<std::uint64_t> seed, const std::vector<std::string>& overrides) {
    biqm::ReconstructionConfig c;
    if (!path.empty()) {
        c = biqm::parse_config_file(path);
    } else if (!preset.empty()) {
        c = biqm::preset_config(preset);
    }
    if (seed) {
        c.seed = *seed;
    }
    for (const auto& [k, v] : split_overrides(overrides)) {
        biqm::apply_setting(c, k, v);
    }
    biqm::validate_config(c);
    return c;
}

void report(const biqm::ReconstructionResult& r, const std::vector<std::string>& files) {
    for (const auto& [k, v] : biqm::diagnostics_rows(r)) {
        std::cout << k << " = " << v << '\n';
    }
    for (const std::string& f : files) {
        std::cout << "wrote " << f << '\n';
    }
}

int run_anneal_demo(std::uint64_t seed) {
    const int n = 12;
    biqm::CounterRng field_rng(seed);
    Eigen::VectorXd h(n);
    for (int j = 0; j < n; ++j) {
        h(j) = 2.0 * field_rng.uniform() - 1.0;
    }
    const double coupling = 0.6;
    const biqm::FieldEnergy energy = [&](const biqm::GridFunction& b) {
        return h.dot(b) + coupling * biqm::count_discontinuities(b);
    };
    double best = 0.0;
    unsigned best_mask = 0;
    biqm::GridFunction b(n);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        for (int j = 0; j < n; ++j) {
            b(j) = (mask >> j) & 1u;
        }
        const double e = energy(b);
        if (mask == 0 || e < best) {
            best = e;
            best_mask = mask;
        }
    }
    std::cout << "enumeration optimum " << biqm::format_csv_real(best) << " mask " << best_mask << '\n';
    int hits = 0;
    for (int run = 0; run < 10; ++run) {
        biqm::CounterRng rng(seed * 31 + static_cast<std::uint64_t>(run) + 1);
        const biqm::FieldState start{biqm::FieldKind::binary_hyperfield, biqm::GridFunction::Zero(n), biqm::kStepMode};
        const biqm::AnnealResult r = biqm::anneal_binary_field(start, energy, {}, rng);
        const bool hit = r.energy == best;
        hits += hit ? 1 : 0;
        std::cout << "run " << run << " energy " << biqm::format_csv_real(r.energy) << " accepted " << r.accepted
                  << "/" << r.proposals << (hit ? " optimum" : "") << '\n';
    }
    std::cout << "annealer reached the optimum in " << hits << "/10 runs\n";
    return hits >= 9 ? kExitOk : kExitNumerical;
}

int run_check_gradients(std::uint64_t seed, int count) {
    const std::vector<biqm::GradientCheck> rows = biqm::run_gradient_suite(seed, count);
    int failed = 0;
    for (const biqm::GradientCheck& r : rows) {
        std::cout << (r.passed() ? "ok   " : "FAIL ") << r.name << " potential=" << r.potential
                  << " error=" << biqm::format_csv_real(r.error) << " tol=" << r.tolerance << '\n';
        failed += r.passed() ? 0 : 1;
    }
    std::cout << rows.size() - failed << "/" << rows.size() << " gradient checks passed\n";
    return failed == 0 ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian inverse quantum mechanics: sampling and MAP reconstruction of 1D potentials"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset;
    std::string out_dir = "out";
    std::uint64_t seed_value = 1;
    std::vector<std::string> overrides;
    int count = 10;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed_value, "random seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--override", overrides, "key=value setting applied last")->take_all();
    };

    CLI::App* sample = app.add_subcommand("sample", "draw position measurements from the true potential");
    add_common(sample);
    sample->add_option("--config", config_path, "config file");
    sample->add_option("--preset", preset, "preset name");

    CLI::App* rec = app.add_subcommand("reconstruct", "MAP reconstruction from a config file");
    add_common(rec);
    rec->add_option("--config", config_path, "config file")->required();

    CLI::App* pre = app.add_subcommand("preset", "run a named experiment preset");
    add_common(pre);
    pre->add_option("--preset", preset, "one of fig-p162 fig-p19 fig-p22 fig-p155 fig-p31 fig-p102 fig-p75 fig-p120")
        ->required();

    CLI::App* grad = app.add_subcommand("check-gradients", "finite-difference check of all analytic gradients");
    grad->add_option("--seed", seed_value, "random seed");
    grad->add_option("--count", count, "number of random potentials");

    CLI::App* demo = app.add_subcommand("anneal-demo", "annealer against exhaustive enumeration on 12 sites");
    demo->add_option("--seed", seed_value, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    auto seed_opt = [&](CLI::App* sub) -> std::optional<std::uint64_t> {
        if (sub->count("--seed") > 0) {
            return seed_value;
        }
        return std::nullopt;
    };

    try {
        if (sample->parsed()) {
            const biqm::ReconstructionConfig c = load_config(config_path, preset, seed_opt(sample), overrides);
            const biqm::SampleSet s = biqm::make_data(c);
            std::filesystem::create_directories(out_dir);
            const std::string path = (std::filesystem::path(out_dir) / "samples.txt").string();
            biqm::save_sample_set(path, s);
            std::cout << "wrote " << path << " (" << s.n() << " samples, seed " << s.seed << ")\n";
            return kExitOk;
        }
        if (rec->parsed() || pre->parsed()) {
            const biqm::ReconstructionConfig c =
                rec->parsed() ? load_config(config_path, "", seed_opt(rec), overrides)
                              : load_config("", preset, seed_opt(pre), overrides);
            const biqm::ReconstructionResult r = biqm::reconstruct(c);
            report(r, biqm::emit_csv(r, out_dir));
            return kExitOk;
        }
        if (grad->parsed()) {
            return run_check_gradients(seed_value, count);
        }
        if (demo->parsed()) {
            return run_anneal_demo(seed_value);
        }
    } catch (const biqm::Error& e) {
        std::cerr << "error [" << biqm::errc_name(e.code()) << "]: " << e.what() << '\n';
        return biqm::is_config_error(e.code()) ? kExitConfig : kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}
