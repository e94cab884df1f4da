#pragma once

#include "biqm/lattice.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace biqm {

struct GradientCheck {
    std::string name;
    int potential = 0;
    double error = 0.0;
    double tolerance = 0.0;

    bool passed() const { return error <= tolerance; }
};

/// Central differences at h = 1e-5 for every analytic gradient on `count` seeded random
/// potentials of the 36-site lattice.
std::vector<GradientCheck> run_gradient_suite(std::uint64_t seed, int count);

/// Uniform random potential in [-amplitude, amplitude].
GridFunction random_potential(int n, std::uint64_t seed, double amplitude = 1.0);

}  // namespace biqm
