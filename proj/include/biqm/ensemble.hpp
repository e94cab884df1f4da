#pragma once

#include "biqm/lattice.hpp"
#include "biqm/sample_set.hpp"

#include <utility>
#include <vector>

namespace biqm {

/// Full spectrum of a Hamiltonian with Boltzmann weights at inverse temperature beta.
struct Ensemble {
    Eigen::VectorXd energies;  // ascending
    Eigen::MatrixXd states;    // orthonormal columns
    Eigen::VectorXd weights;   // p_alpha, sums to 1
    double beta = 0.0;
    double log_z = 0.0;

    int size() const { return static_cast<int>(energies.size()); }
    double spectral_range() const;
};

/// H = (1/2m)(-Delta, periodic) + diag(v).
OperatorMatrix build_hamiltonian(const GridFunction& v, double mass);

Ensemble diagonalize(const OperatorMatrix& h, double beta);

/// p(x) = sum_alpha p_alpha |phi_alpha(x)|^2.
GridFunction likelihood_density(const Ensemble& e);

struct LogLikelihood {
    double value = 0.0;
    bool zero_probability = false;  // value is -inf
    bool empty = false;             // no data, value is 0
};

/// Histogram of positions; throws invalid_range for out-of-lattice indices.
Eigen::VectorXd sample_counts(const SampleSet& data, int n);

LogLikelihood log_likelihood(const SampleSet& data, const Ensemble& e);
/// Same sum from precomputed counts and density.
LogLikelihood log_likelihood(const Eigen::VectorXd& counts, const GridFunction& density);

double average_energy(const Ensemble& e);

/// Pairs (alpha < gamma) with |E_alpha - E_gamma| below rel_tol * spectral range.
std::vector<std::pair<int, int>> near_degenerate_pairs(const Ensemble& e, double rel_tol = 1e-9);

}  // namespace biqm
