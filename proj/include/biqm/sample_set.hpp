#pragma once

#include <cstdint>
#include <vector>

namespace biqm {

/// Position measurements as lattice indices 0..N-1.
struct SampleSet {
    std::vector<int> positions;
    std::uint64_t seed = 0;
    int lattice_size = 0;

    int n() const { return static_cast<int>(positions.size()); }
    bool operator==(const SampleSet&) const = default;
};

}  // namespace biqm
