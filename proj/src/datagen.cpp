#include "biqm/datagen.hpp"

#include "biqm/errors.hpp"
#include "biqm/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace biqm {

Band impurity_band(int n) {
    if (n == 36) {
        return {12, 23};
    }
    return {n / 3, (2 * n) / 3 - 1};
}

GridFunction true_potential(int n) {
    if (n < 2) {
        throw Error(Errc::invalid_size, "lattice size must be at least 2");
    }
    const Band band = impurity_band(n);
    GridFunction v(n);
    for (int j = 0; j < n; ++j) {
        const double x = j + 1;
        const double period = (j >= band.first && j <= band.last) ? 12.0 : 6.0;
        v(j) = std::sin(2.0 * std::numbers::pi * x / period);
    }
    return v;
}

SampleSet sample_positions(const GridFunction& density, int n, std::uint64_t seed) {
    if (n < 0) {
        throw Error(Errc::invalid_parameter, "sample count must be nonnegative");
    }
    if (density.size() == 0 || !density.allFinite() || density.minCoeff() < 0.0) {
        throw Error(Errc::invalid_density, "density must be finite and nonnegative");
    }
    Eigen::VectorXd cdf(density.size());
    double acc = 0.0;
    for (Eigen::Index j = 0; j < density.size(); ++j) {
        acc += density(j);
        cdf(j) = acc;
    }
    if (!(acc > 0.0)) {
        throw Error(Errc::invalid_density, "density is identically zero");
    }
    CounterRng rng(seed);
    SampleSet s;
    s.seed = seed;
    s.lattice_size = static_cast<int>(density.size());
    s.positions.reserve(n);
    const Eigen::Index last = density.size() - 1;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform() * acc;
        Eigen::Index j = 0;
        while (j < last && (cdf(j) < u || density(j) == 0.0)) {
            ++j;
        }
        s.positions.push_back(static_cast<int>(j));
    }
    return s;
}

GridFunction empirical_density(const SampleSet& samples, int n) {
    if (samples.positions.empty()) {
        throw Error(Errc::empty_samples, "empirical density of an empty sample set");
    }
    GridFunction p = GridFunction::Zero(n);
    for (int x : samples.positions) {
        if (x < 0 || x >= n) {
            throw Error(Errc::invalid_range, "sample index outside lattice");
        }
        p(x) += 1.0;
    }
    return p / static_cast<double>(samples.positions.size());
}

void write_sample_set(std::ostream& out, const SampleSet& samples) {
    out << "# seed=" << samples.seed << " n=" << samples.n() << " N=" << samples.lattice_size << '\n';
    for (int x : samples.positions) {
        out << x << '\n';
    }
}

SampleSet read_sample_set(std::istream& in) {
    SampleSet s;
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(Errc::io, "sample file is empty");
    }
    long long n = -1;
    {
        unsigned long long seed = 0;
        int lattice = 0;
        if (std::sscanf(line.c_str(), "# seed=%llu n=%lld N=%d", &seed, &n, &lattice) != 3) {
            throw Error(Errc::io, "sample file header must read '# seed=<u64> n=<int> N=<int>'");
        }
        s.seed = seed;
        s.lattice_size = lattice;
    }
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        int x = 0;
        if (!(ls >> x) || x < 0 || x >= s.lattice_size) {
            throw Error(Errc::io, "bad sample index on line " + std::to_string(lineno));
        }
        s.positions.push_back(x);
    }
    if (static_cast<long long>(s.positions.size()) != n) {
        throw Error(Errc::io, "sample count does not match header");
    }
    return s;
}

void save_sample_set(const std::string& path, const SampleSet& samples) {
    std::ofstream out(path);
    if (!out) {
        throw Error(Errc::io, "cannot write " + path);
    }
    write_sample_set(out, samples);
    if (!out) {
        throw Error(Errc::io, "write failed for " + path);
    }
}

SampleSet load_sample_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::io, "cannot read " + path);
    }
    return read_sample_set(in);
}

}  // namespace biqm
