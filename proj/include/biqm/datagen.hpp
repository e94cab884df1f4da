#pragma once

#include "biqm/lattice.hpp"
#include "biqm/sample_set.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace biqm {

/// sin(2 pi x / 6) outside the impurity band, sin(2 pi x / 12) inside; x = 1..n.
/// For n = 36 the band is 13..24; otherwise it scales to (n/3, 2n/3].
GridFunction true_potential(int n);

/// Lattice indices (0-based, inclusive) of the impurity band for lattice size n.
struct Band {
    int first;
    int last;
};
Band impurity_band(int n);

/// Inverse-CDF draws: smallest j with cumulative sum >= u * total.
SampleSet sample_positions(const GridFunction& density, int n, std::uint64_t seed);

GridFunction empirical_density(const SampleSet& samples, int n);

void write_sample_set(std::ostream& out, const SampleSet& samples);
SampleSet read_sample_set(std::istream& in);
void save_sample_set(const std::string& path, const SampleSet& samples);
SampleSet load_sample_set(const std::string& path);

}  // namespace biqm
