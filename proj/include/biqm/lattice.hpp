#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace biqm {

/// Real function on the N-point lattice, index j = x - 1 for x = 1..N.
using GridFunction = Eigen::VectorXd;

/// Dense N x N operator with an exact-symmetry flag.
struct OperatorMatrix {
    Eigen::MatrixXd entries;
    bool symmetric = false;

    OperatorMatrix() = default;
    OperatorMatrix(Eigen::MatrixXd m, bool sym) : entries(std::move(m)), symmetric(sym) {}

    int size() const { return static_cast<int>(entries.rows()); }
    GridFunction apply(const GridFunction& v) const;
    OperatorMatrix transpose_product() const;  // W^T W
    bool operator==(const OperatorMatrix& other) const;
};

/// Throws invalid_potential if any entry is not finite, shape_mismatch if size differs.
void require_grid(const GridFunction& v, int n, const char* what);

/// The positive operator -Delta. Open boundaries use first differences without wraparound.
OperatorMatrix build_laplacian(int n, bool periodic = true);

/// Right shift difference: row r has -1 at r and +1 at (r + theta) mod n.
/// Without wraparound, rows with r + theta >= n are zero.
OperatorMatrix build_shift_difference(int n, int theta, bool periodic = true);

/// lambda * (-Delta + gamma * (-Delta_theta)).
OperatorMatrix build_periodic_invcov(int n, int theta, double lambda, double gamma,
                                     bool periodic_shift = true);

/// sum_k w(k) (grad_{k theta})^T grad_{k theta}, k = 1..weights.size().
OperatorMatrix build_multiperiod_energy_matrix(int n, int theta, std::span<const double> weights);

/// Zeroes every row of w that couples indices from different regions.
OperatorMatrix disconnect_filter(const OperatorMatrix& w, const std::vector<std::vector<int>>& regions);

/// (I - S)^T (I - S).
OperatorMatrix build_symmetry_invcov(const OperatorMatrix& s);

/// exp((sigma^2 / 2) (-Delta)) through the eigendecomposition of the periodic -Delta.
OperatorMatrix build_rbf_invcov(int n, double sigma_rbf);

/// Cyclic shift (S v)(x) = v(x + shift mod n).
OperatorMatrix build_cyclic_shift(int n, int shift);

bool is_exactly_symmetric(const Eigen::MatrixXd& m);
double min_eigenvalue(const OperatorMatrix& m);
/// Throws not_psd when the smallest eigenvalue is below -1e-10 * max|entry|.
void require_psd(const OperatorMatrix& m, const char* what);

/// Rounds a real period to the nearest integer shift.
struct RoundedPeriod {
    int shift;
    double requested;
    bool rounded;
};
RoundedPeriod round_period(double theta);

}  // namespace biqm
