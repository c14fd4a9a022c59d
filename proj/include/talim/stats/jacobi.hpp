#ifndef TALIM_STATS_JACOBI_HPP
#define TALIM_STATS_JACOBI_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "talim/error.hpp"
#include "talim/stats/matrix.hpp"

namespace talim::stats {

struct SymmetricEigen {
    std::vector<double> values; // descending
    Matrix vectors;             // column j pairs with values[j]
    int sweeps = 0;
    double off_norm = 0.0;
};

inline double off_diagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Sweeps rotate
/// every (p, q) pair in row order until the off-diagonal Frobenius norm
/// drops below `tol`. Eigenvectors are sign-normalized so that each
/// column's largest-magnitude entry is positive.
inline SymmetricEigen jacobi_eigen(Matrix a, double tol = 1e-12, int max_sweeps = 100) {
    const std::size_t n = a.rows();
    if (n != a.cols()) throw Error(ErrorCode::InvalidMatrix, "eigendecomposition needs a square matrix");
    Matrix v = Matrix::identity(n);

    int sweep = 0;
    double off = off_diagonal_norm(a);
    while (off >= tol && sweep < max_sweeps) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        ++sweep;
        off = off_diagonal_norm(a);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymmetricEigen out{std::vector<double>(n), Matrix(n, n), sweep, off};
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t src = order[col];
        out.values[col] = a(src, src);
        std::size_t lead = 0;
        for (std::size_t k = 1; k < n; ++k)
            if (std::abs(v(k, src)) > std::abs(v(lead, src))) lead = k;
        const double sign = v(lead, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t k = 0; k < n; ++k) out.vectors(k, col) = sign * v(k, src);
    }
    return out;
}

} // namespace talim::stats

#endif
