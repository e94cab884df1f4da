#include "biqm/lattice.hpp"

#include "biqm/errors.hpp"

#include <cmath>
#include <string>

namespace biqm {

GridFunction OperatorMatrix::apply(const GridFunction& v) const {
    if (v.size() != entries.cols()) {
        throw Error(Errc::shape_mismatch, "operator applied to grid function of wrong length");
    }
    return entries * v;
}

OperatorMatrix OperatorMatrix::transpose_product() const {
    Eigen::MatrixXd k = entries.transpose() * entries;
    // Symmetrize exactly; the product is symmetric up to summation order only.
    Eigen::MatrixXd sym = 0.5 * (k + k.transpose());
    return {std::move(sym), true};
}

bool OperatorMatrix::operator==(const OperatorMatrix& other) const {
    return symmetric == other.symmetric && entries.rows() == other.entries.rows() &&
           entries.cols() == other.entries.cols() && entries == other.entries;
}

void require_grid(const GridFunction& v, int n, const char* what) {
    if (v.size() != n) {
        throw Error(Errc::shape_mismatch, std::string(what) + ": expected length " + std::to_string(n) +
                                              ", got " + std::to_string(v.size()));
    }
    if (!v.allFinite()) {
        throw Error(Errc::invalid_potential, std::string(what) + ": non-finite entry");
    }
}

namespace {

void require_size(int n) {
    if (n < 2) {
        throw Error(Errc::invalid_size, "lattice size must be at least 2, got " + std::to_string(n));
    }
}

void require_shift(int n, int theta) {
    if (theta < 1 || theta >= n) {
        throw Error(Errc::invalid_shift, "shift must satisfy 1 <= theta < N, got " + std::to_string(theta));
    }
}

}  // namespace

OperatorMatrix build_laplacian(int n, bool periodic) {
    require_size(n);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    if (periodic) {
        for (int i = 0; i < n; ++i) {
            m(i, i) += 2.0;
            m(i, (i + 1) % n) -= 1.0;
            m(i, (i + n - 1) % n) -= 1.0;
        }
    } else {
        for (int i = 0; i + 1 < n; ++i) {
            m(i, i) += 1.0;
            m(i + 1, i + 1) += 1.0;
            m(i, i + 1) -= 1.0;
            m(i + 1, i) -= 1.0;
        }
    }
    return {std::move(m), true};
}

OperatorMatrix build_shift_difference(int n, int theta, bool periodic) {
    require_size(n);
    require_shift(n, theta);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int r = 0; r < n; ++r) {
        if (!periodic && r + theta >= n) {
            continue;
        }
        m(r, r) = -1.0;
        m(r, (r + theta) % n) = 1.0;
    }
    return {std::move(m), false};
}

OperatorMatrix build_periodic_invcov(int n, int theta, double lambda, double gamma, bool periodic_shift) {
    if (!(lambda >= 0.0) || !(gamma >= 0.0)) {
        throw Error(Errc::invalid_weight, "periodic covariance weights must be nonnegative");
    }
    const OperatorMatrix lap = build_laplacian(n, true);
    const OperatorMatrix per = build_shift_difference(n, theta, periodic_shift).transpose_product();
    Eigen::MatrixXd k = lambda * (lap.entries + gamma * per.entries);
    return {std::move(k), true};
}

OperatorMatrix build_multiperiod_energy_matrix(int n, int theta, std::span<const double> weights) {
    require_size(n);
    require_shift(n, theta);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const int kk = static_cast<int>(i) + 1;
        if (!(weights[i] >= 0.0)) {
            throw Error(Errc::invalid_weight, "multiperiod weight w(" + std::to_string(kk) + ") is negative");
        }
        if (static_cast<long>(kk) * theta >= n) {
            throw Error(Errc::invalid_range, "multiperiod shift k*theta = " + std::to_string(kk * theta) +
                                                 " aliases on a lattice of size " + std::to_string(n));
        }
        k += weights[i] * build_shift_difference(n, kk * theta).transpose_product().entries;
    }
    return {std::move(k), true};
}

OperatorMatrix disconnect_filter(const OperatorMatrix& w, const std::vector<std::vector<int>>& regions) {
    const int n = w.size();
    std::vector<int> owner(n, -1);
    for (std::size_t r = 0; r < regions.size(); ++r) {
        for (int idx : regions[r]) {
            if (idx < 0 || idx >= n || owner[idx] != -1) {
                throw Error(Errc::invalid_partition, "regions overlap or index out of range: " + std::to_string(idx));
            }
            owner[idx] = static_cast<int>(r);
        }
    }
    for (int i = 0; i < n; ++i) {
        if (owner[i] == -1) {
            throw Error(Errc::invalid_partition, "index " + std::to_string(i) + " not covered by any region");
        }
    }
    Eigen::MatrixXd out = w.entries;
    for (int row = 0; row < n; ++row) {
        int seen = -1;
        bool mixed = false;
        for (int col = 0; col < n; ++col) {
            if (out(row, col) == 0.0) {
                continue;
            }
            if (seen == -1) {
                seen = owner[col];
            } else if (owner[col] != seen) {
                mixed = true;
            }
        }
        if (mixed) {
            out.row(row).setZero();
        }
    }
    const bool sym = w.symmetric && is_exactly_symmetric(out);
    return {std::move(out), sym};
}

OperatorMatrix build_symmetry_invcov(const OperatorMatrix& s) {
    if (s.entries.rows() != s.entries.cols()) {
        throw Error(Errc::shape_mismatch, "symmetry operator must be square");
    }
    const int n = s.size();
    OperatorMatrix d{Eigen::MatrixXd::Identity(n, n) - s.entries, false};
    return d.transpose_product();
}

OperatorMatrix build_rbf_invcov(int n, double sigma_rbf) {
    if (!(sigma_rbf >= 0.0)) {
        throw Error(Errc::invalid_weight, "rbf length scale must be nonnegative");
    }
    const OperatorMatrix lap = build_laplacian(n, true);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap.entries);
    if (es.info() != Eigen::Success) {
        throw Error(Errc::numerical_failure, "eigensolver failed for the rbf covariance");
    }
    const Eigen::VectorXd scale = (0.5 * sigma_rbf * sigma_rbf * es.eigenvalues()).array().exp();
    Eigen::MatrixXd k = es.eigenvectors() * scale.asDiagonal() * es.eigenvectors().transpose();
    Eigen::MatrixXd sym = 0.5 * (k + k.transpose());
    return {std::move(sym), true};
}

OperatorMatrix build_cyclic_shift(int n, int shift) {
    require_size(n);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    const int k = ((shift % n) + n) % n;
    for (int r = 0; r < n; ++r) {
        s(r, (r + k) % n) = 1.0;
    }
    return {std::move(s), false};
}

bool is_exactly_symmetric(const Eigen::MatrixXd& m) {
    return m.rows() == m.cols() && m == m.transpose();
}

double min_eigenvalue(const OperatorMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.entries, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw Error(Errc::numerical_failure, "eigensolver failed");
    }
    return es.eigenvalues()(0);
}

void require_psd(const OperatorMatrix& m, const char* what) {
    const double scale = m.entries.cwiseAbs().maxCoeff();
    if (min_eigenvalue(m) < -1e-10 * scale) {
        throw Error(Errc::not_psd, std::string(what) + " is not positive semidefinite");
    }
}

RoundedPeriod round_period(double theta) {
    if (!std::isfinite(theta)) {
        throw Error(Errc::invalid_shift, "period must be finite");
    }
    const double r = std::nearbyint(theta);
    return {static_cast<int>(r), theta, r != theta};
}

}  // namespace biqm
