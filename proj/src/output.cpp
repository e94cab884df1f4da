#include "biqm/output.hpp"

#include "biqm/config.hpp"
#include "biqm/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace biqm {

std::string format_csv_real(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

std::vector<std::pair<std::string, std::string>> diagnostics_rows(const ReconstructionResult& r) {
    const Diagnostics& d = r.diagnostics;
    auto real = [](double x) { return format_csv_real(x); };
    auto integer = [](long x) { return std::to_string(x); };
    return {
        {"preset", r.config.preset},
        {"seed", std::to_string(r.config.seed)},
        {"samples", integer(r.data.n())},
        {"rmse", real(d.rmse)},
        {"rmse_bands", real(d.rmse_bands)},
        {"kl_emp_rec", real(d.kl_rec)},
        {"kl_emp_true", real(d.kl_true)},
        {"average_energy", real(d.average_energy)},
        {"kappa", real(d.kappa)},
        {"kappa_reference", real(-0.330)},
        {"true_average_energy", real(d.true_average_energy)},
        {"energy_gap", real(d.energy_gap)},
        {"final_objective", real(d.final_objective)},
        {"final_grad_norm", real(d.final_grad_norm)},
        {"iterations", integer(d.iterations)},
        {"converged", d.converged ? "true" : "false"},
        {"termination", d.termination},
        {"stages", integer(d.stages)},
        {"segments", integer(d.segments)},
        {"field_updates", integer(d.field_updates)},
        {"jitter_retries", integer(d.jitter_retries)},
        {"period_shift", integer(d.period_shift)},
        {"period_rounded", d.period_rounded ? "true" : "false"},
        {"field_ones_impurity", integer(d.field_ones_impurity)},
        {"field_ones_outside", integer(d.field_ones_outside)},
        {"field_discontinuities", integer(d.field_discontinuities)},
    };
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(Errc::io, "cannot write " + path.string());
    }
    return out;
}

void close_csv(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) {
        throw Error(Errc::io, "write failed for " + path.string());
    }
}

}  // namespace

std::vector<std::string> emit_csv(const ReconstructionResult& r, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error(Errc::io, "cannot create directory " + dir + ": " + ec.message());
    }
    const fs::path root(dir);
    std::vector<std::string> written;
    const Eigen::Index n = r.v_star.size();

    {
        const fs::path p = root / "potentials.csv";
        std::ofstream out = open_csv(p);
        out << "x,v_true,v_rec,v0_template\n";
        for (Eigen::Index j = 0; j < n; ++j) {
            out << (j + 1) << ',' << format_csv_real(r.v_true(j)) << ',' << format_csv_real(r.v_star(j)) << ','
                << format_csv_real(r.v_template(j)) << '\n';
        }
        close_csv(out, p);
        written.push_back(p.string());
    }
    {
        const fs::path p = root / "densities.csv";
        std::ofstream out = open_csv(p);
        out << "x,p_emp,p_true,p_rec\n";
        for (Eigen::Index j = 0; j < n; ++j) {
            out << (j + 1) << ',' << format_csv_real(r.p_emp(j)) << ',' << format_csv_real(r.p_true(j)) << ','
                << format_csv_real(r.p_rec(j)) << '\n';
        }
        close_csv(out, p);
        written.push_back(p.string());
    }
    if (r.field) {
        const fs::path p = root / "field.csv";
        std::ofstream out = open_csv(p);
        out << "x,field\n";
        for (Eigen::Index j = 0; j < n; ++j) {
            out << (j + 1) << ',' << format_csv_real(r.field->values(j)) << '\n';
        }
        close_csv(out, p);
        written.push_back(p.string());
    }
    {
        const fs::path p = root / "trace.csv";
        std::ofstream out = open_csv(p);
        out << "iter,neg_log_post,grad_norm,mu,nu\n";
        for (const TraceEntry& t : r.trace) {
            out << t.iteration << ',' << format_csv_real(t.objective) << ',' << format_csv_real(t.grad_norm) << ','
                << format_csv_real(t.mu) << ',' << format_csv_real(t.nu) << '\n';
        }
        close_csv(out, p);
        written.push_back(p.string());
    }
    {
        const fs::path p = root / "diagnostics.csv";
        std::ofstream out = open_csv(p);
        out << "key,value\n";
        for (const auto& [k, v] : diagnostics_rows(r)) {
            out << k << ',' << v << '\n';
        }
        close_csv(out, p);
        written.push_back(p.string());
    }
    return written;
}

}  // namespace biqm
