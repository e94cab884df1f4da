#pragma once

// Independent reference computations used only by the tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

struct Eigen_ {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;  // vectors[k] is the k-th eigenvector
};

// Cyclic Jacobi rotations on a plain row-major copy; ascending eigenvalues.
inline Eigen_ jacobi(const Eigen::MatrixXd& m, int sweeps = 100) {
    const int n = static_cast<int>(m.rows());
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        v[i][i] = 1.0;
        for (int j = 0; j < n; ++j) {
            a[i][j] = m(i, j);
        }
    }
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                off += a[p][q] * a[p][q];
            }
        }
        if (off < 1e-30) {
            break;
        }
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) {
                    continue;
                }
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v[k][p];
                    const double vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] < a[j][j]; });
    Eigen_ out;
    for (int k : order) {
        out.values.push_back(a[k][k]);
        std::vector<double> col(n);
        for (int i = 0; i < n; ++i) {
            col[i] = v[i][k];
        }
        out.vectors.push_back(col);
    }
    return out;
}

// Thermal position density from an independent eigensolve.
inline std::vector<double> thermal_density(const Eigen::MatrixXd& h, double beta) {
    const Eigen_ e = jacobi(h);
    const int n = static_cast<int>(e.values.size());
    std::vector<double> w(n);
    double z = 0.0;
    for (int k = 0; k < n; ++k) {
        w[k] = std::exp(-beta * (e.values[k] - e.values[0]));
        z += w[k];
    }
    std::vector<double> p(n, 0.0);
    for (int k = 0; k < n; ++k) {
        for (int x = 0; x < n; ++x) {
            p[x] += w[k] / z * e.vectors[k][x] * e.vectors[k][x];
        }
    }
    return p;
}

// Exhaustive minimum over binary fields of length n.
inline std::pair<double, unsigned> enumerate_minimum(int n, const std::function<double(const Eigen::VectorXd&)>& energy) {
    double best = 0.0;
    unsigned arg = 0;
    Eigen::VectorXd b(n);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        for (int j = 0; j < n; ++j) {
            b(j) = (mask >> j) & 1u;
        }
        const double e = energy(b);
        if (mask == 0 || e < best) {
            best = e;
            arg = mask;
        }
    }
    return {best, arg};
}

// sum_k w(k) sum_x (v(x + k theta mod n) - v(x))^2
inline double multiperiod_sum(const Eigen::VectorXd& v, int theta, const std::vector<double>& w) {
    const int n = static_cast<int>(v.size());
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const int shift = static_cast<int>(k + 1) * theta;
        for (int x = 0; x < n; ++x) {
            const double d = v((x + shift) % n) - v(x);
            s += w[k] * d * d;
        }
    }
    return s;
}

}  // namespace oracle
