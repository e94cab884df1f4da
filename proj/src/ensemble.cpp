#include "biqm/ensemble.hpp"

#include "biqm/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace biqm {

double Ensemble::spectral_range() const {
    return energies.size() == 0 ? 0.0 : energies(energies.size() - 1) - energies(0);
}

OperatorMatrix build_hamiltonian(const GridFunction& v, double mass) {
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw Error(Errc::invalid_parameter, "mass must be positive");
    }
    if (!v.allFinite()) {
        throw Error(Errc::invalid_potential, "potential has non-finite entries");
    }
    const int n = static_cast<int>(v.size());
    OperatorMatrix h = build_laplacian(n, true);
    h.entries *= 1.0 / (2.0 * mass);
    h.entries.diagonal() += v;
    return h;
}

Ensemble diagonalize(const OperatorMatrix& h, double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw Error(Errc::invalid_parameter, "beta must be finite and nonnegative");
    }
    if (h.entries.rows() != h.entries.cols()) {
        throw Error(Errc::shape_mismatch, "Hamiltonian must be square");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.entries);
    if (es.info() != Eigen::Success) {
        throw Error(Errc::numerical_failure, "symmetric eigensolver did not converge");
    }
    Ensemble e;
    e.energies = es.eigenvalues();
    e.states = es.eigenvectors();
    e.beta = beta;
    const double e0 = e.energies(0);
    e.weights = (-beta * (e.energies.array() - e0)).exp();
    const double z = e.weights.sum();
    e.weights /= z;
    e.log_z = -beta * e0 + std::log(z);
    return e;
}

GridFunction likelihood_density(const Ensemble& e) {
    return e.states.array().square().matrix() * e.weights;
}

Eigen::VectorXd sample_counts(const SampleSet& data, int n) {
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
    for (int x : data.positions) {
        if (x < 0 || x >= n) {
            throw Error(Errc::invalid_range, "sample index " + std::to_string(x) + " outside lattice");
        }
        counts(x) += 1.0;
    }
    return counts;
}

LogLikelihood log_likelihood(const Eigen::VectorXd& counts, const GridFunction& density) {
    LogLikelihood out;
    double total = 0.0;
    for (Eigen::Index x = 0; x < counts.size(); ++x) {
        if (counts(x) == 0.0) {
            continue;
        }
        if (density(x) <= 0.0) {
            out.zero_probability = true;
            out.value = -std::numeric_limits<double>::infinity();
            return out;
        }
        total += counts(x) * std::log(density(x));
    }
    out.empty = counts.sum() == 0.0;
    out.value = total;
    return out;
}

LogLikelihood log_likelihood(const SampleSet& data, const Ensemble& e) {
    const Eigen::VectorXd counts = sample_counts(data, e.size());
    return log_likelihood(counts, likelihood_density(e));
}

double average_energy(const Ensemble& e) {
    return e.weights.dot(e.energies);
}

std::vector<std::pair<int, int>> near_degenerate_pairs(const Ensemble& e, double rel_tol) {
    std::vector<std::pair<int, int>> pairs;
    const double eps = rel_tol * e.spectral_range();
    for (int a = 0; a < e.size(); ++a) {
        for (int g = a + 1; g < e.size(); ++g) {
            const double gap = std::abs(e.energies(a) - e.energies(g));
            if (gap < eps || gap == 0.0) {
                pairs.emplace_back(a, g);
            }
        }
    }
    return pairs;
}

}  // namespace biqm
