#ifndef TALIM_STATS_FACTOR_HPP
#define TALIM_STATS_FACTOR_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "talim/error.hpp"
#include "talim/stats/correlation.hpp"
#include "talim/stats/jacobi.hpp"
#include "talim/stats/matrix.hpp"

namespace talim::stats {

/// Column z-scores (sample standard deviation, n - 1).
inline Matrix standardize(const FeatureMatrix& m) {
    m.validate();
    const auto mean = detail::column_means(m.values);
    const auto ss = detail::centered_ss(m, mean);
    Matrix z(m.n(), m.p());
    for (std::size_t j = 0; j < m.p(); ++j) {
        const double sd = std::sqrt(ss[j] / double(m.n() - 1));
        for (std::size_t i = 0; i < m.n(); ++i) z(i, j) = (m.values(i, j) - mean[j]) / sd;
    }
    return z;
}

inline Matrix correlation_matrix(const FeatureMatrix& m) {
    const Matrix z = standardize(m);
    const std::size_t p = m.p();
    Matrix r(p, p);
    for (std::size_t a = 0; a < p; ++a) {
        r(a, a) = 1.0;
        for (std::size_t b = a + 1; b < p; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m.n(); ++i) acc += z(i, a) * z(i, b);
            r(a, b) = r(b, a) = acc / double(m.n() - 1);
        }
    }
    return r;
}

/// Principal components of the correlation matrix. `loadings` holds every
/// component (p x p); eigenvalues are raw, so tiny negatives from rounding
/// survive here and only get clamped under the square root.
struct PcaResult {
    Matrix correlation;
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
    Matrix loadings;
};

inline PcaResult pca(const FeatureMatrix& m) {
    PcaResult out;
    out.correlation = correlation_matrix(m);
    auto eig = jacobi_eigen(out.correlation, 1e-12, 100);
    out.eigenvalues = std::move(eig.values);
    out.eigenvectors = std::move(eig.vectors);
    const std::size_t p = m.p();
    out.loadings = Matrix(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        const double root = std::sqrt(std::max(0.0, out.eigenvalues[j]));
        for (std::size_t i = 0; i < p; ++i) out.loadings(i, j) = out.eigenvectors(i, j) * root;
    }
    return out;
}

/// How many components to keep: Kaiser (eigenvalue > 1) or a fixed count.
struct Retention {
    enum class Kind { kaiser, fixed } kind = Kind::kaiser;
    std::size_t count = 0;

    static Retention kaiser() { return {}; }
    static Retention fixed(std::size_t m) { return {Kind::fixed, m}; }
};

struct RetentionOutcome {
    std::size_t factors = 1;
    bool degenerate = false; // Kaiser kept nothing; fell back to one factor
};

inline RetentionOutcome retain_factors(const std::vector<double>& eigenvalues, Retention policy) {
    const std::size_t p = eigenvalues.size();
    if (p == 0) throw Error(ErrorCode::InvalidMatrix, "no eigenvalues");
    if (policy.kind == Retention::Kind::fixed) return {std::clamp<std::size_t>(policy.count, 1, p), false};
    const auto kept = std::size_t(std::count_if(eigenvalues.begin(), eigenvalues.end(), [](double v) { return v > 1.0; }));
    if (kept == 0) return {1, true};
    return {kept, false};
}

inline std::vector<double> communalities(const Matrix& loadings) {
    std::vector<double> h(loadings.rows(), 0.0);
    for (std::size_t i = 0; i < loadings.rows(); ++i)
        for (std::size_t j = 0; j < loadings.cols(); ++j) h[i] += loadings(i, j) * loadings(i, j);
    return h;
}

/// Column sums of squared loadings.
inline std::vector<double> column_ss(const Matrix& loadings) {
    std::vector<double> ss(loadings.cols(), 0.0);
    for (std::size_t i = 0; i < loadings.rows(); ++i)
        for (std::size_t j = 0; j < loadings.cols(); ++j) ss[j] += loadings(i, j) * loadings(i, j);
    return ss;
}

/// Raw varimax criterion: sum over columns of the variance of squared loadings.
inline double varimax_criterion(const Matrix& b) {
    const double p = double(b.rows());
    double total = 0.0;
    for (std::size_t j = 0; j < b.cols(); ++j) {
        double s2 = 0.0, s4 = 0.0;
        for (std::size_t i = 0; i < b.rows(); ++i) {
            const double sq = b(i, j) * b(i, j);
            s2 += sq;
            s4 += sq * sq;
        }
        total += s4 / p - (s2 / p) * (s2 / p);
    }
    return total;
}

struct VarimaxResult {
    Matrix rotated;
    std::vector<double> criterion; // before the first sweep, then after each sweep
    int sweeps = 0;
    bool converged = false;
    std::vector<std::size_t> unnormalized_rows; // zero rows that bypassed Kaiser normalization
};

/// Orthogonal varimax rotation by pairwise planar rotations. With Kaiser
/// normalization each row is scaled to unit length first and restored
/// afterwards. Output columns are ordered by descending sum of squared
/// loadings and signed so each column's largest-magnitude entry is positive.
inline VarimaxResult varimax(const Matrix& loadings, bool kaiser_normalize = true, double tol = 1e-8,
                             int max_sweeps = 100) {
    const std::size_t p = loadings.rows(), m = loadings.cols();
    if (m < 2) throw Error(ErrorCode::BadConfig, "varimax needs at least two factors");
    VarimaxResult out;
    Matrix b = loadings;

    std::vector<double> row_norm(p, 1.0);
    if (kaiser_normalize) {
        const auto h = communalities(loadings);
        for (std::size_t i = 0; i < p; ++i) {
            if (!(h[i] > 0.0)) {
                out.unnormalized_rows.push_back(i);
                continue;
            }
            row_norm[i] = std::sqrt(h[i]);
            for (std::size_t j = 0; j < m; ++j) b(i, j) /= row_norm[i];
        }
    }

    const double np = double(p);
    out.criterion.push_back(varimax_criterion(b));
    while (out.sweeps < max_sweeps) {
        for (std::size_t j = 0; j + 1 < m; ++j) {
            for (std::size_t k = j + 1; k < m; ++k) {
                double su = 0.0, sv = 0.0, suu_vv = 0.0, suv = 0.0;
                for (std::size_t i = 0; i < p; ++i) {
                    const double x = b(i, j), y = b(i, k);
                    const double u = x * x - y * y, v = 2.0 * x * y;
                    su += u;
                    sv += v;
                    suu_vv += u * u - v * v;
                    suv += u * v;
                }
                const double num = 2.0 * (np * suv - su * sv);
                const double den = np * suu_vv - (su * su - sv * sv);
                const double phi = 0.25 * std::atan2(num, den);
                const double c = std::cos(phi), s = std::sin(phi);
                for (std::size_t i = 0; i < p; ++i) {
                    const double x = b(i, j), y = b(i, k);
                    b(i, j) = c * x + s * y;
                    b(i, k) = -s * x + c * y;
                }
            }
        }
        ++out.sweeps;
        out.criterion.push_back(varimax_criterion(b));
        const double gain = out.criterion.back() - out.criterion[out.criterion.size() - 2];
        if (gain < tol) {
            out.converged = true;
            break;
        }
    }

    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < m; ++j) b(i, j) *= row_norm[i];

    const auto ss = column_ss(b);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return ss[x] > ss[y]; });
    out.rotated = Matrix(p, m);
    for (std::size_t col = 0; col < m; ++col) {
        const std::size_t src = order[col];
        std::size_t lead = 0;
        for (std::size_t i = 1; i < p; ++i)
            if (std::abs(b(i, src)) > std::abs(b(lead, src))) lead = i;
        const double sign = b(lead, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < p; ++i) out.rotated(i, col) = sign * b(i, src);
    }
    return out;
}

struct VarianceSums {
    double total = 0.0;
    double percent = 0.0;
    double cumulative = 0.0;
};

struct VarianceRow {
    std::size_t component = 0; // 1-based
    VarianceSums initial;
    std::optional<VarianceSums> extraction;
    std::optional<VarianceSums> rotation;
};

using VarianceTable = std::vector<VarianceRow>;

/// Initial rows use every eigenvalue as given (negatives included);
/// extraction repeats the first m, rotation uses `rotated_ss` (length m).
inline VarianceTable variance_table(const std::vector<double>& eigenvalues, std::size_t m,
                                    const std::vector<double>& rotated_ss) {
    const std::size_t p = eigenvalues.size();
    if (m > p || rotated_ss.size() != m) throw Error(ErrorCode::InvalidMatrix, "variance table dimensions disagree");
    VarianceTable table(p);
    double cum = 0.0, cum_rot = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        const double pct = 100.0 * eigenvalues[j] / double(p);
        cum += pct;
        table[j].component = j + 1;
        table[j].initial = {eigenvalues[j], pct, cum};
        if (j < m) {
            table[j].extraction = table[j].initial;
            const double rpct = 100.0 * rotated_ss[j] / double(p);
            cum_rot += rpct;
            table[j].rotation = VarianceSums{rotated_ss[j], rpct, cum_rot};
        }
    }
    return table;
}

/// (1-based factor index, eigenvalue) pairs for a scree plot.
inline std::vector<std::pair<std::size_t, double>> scree_data(const std::vector<double>& eigenvalues) {
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(eigenvalues.size());
    for (std::size_t j = 0; j < eigenvalues.size(); ++j) out.emplace_back(j + 1, eigenvalues[j]);
    return out;
}

/// Display copy of a loading matrix with |value| < threshold blanked.
using DisplayMatrix = std::vector<std::vector<std::optional<double>>>;

inline DisplayMatrix suppress(const Matrix& loadings, double threshold) {
    if (!(threshold >= 0.0)) throw Error(ErrorCode::BadConfig, "suppression threshold must be >= 0");
    DisplayMatrix out(loadings.rows(), std::vector<std::optional<double>>(loadings.cols()));
    for (std::size_t i = 0; i < loadings.rows(); ++i)
        for (std::size_t j = 0; j < loadings.cols(); ++j)
            if (std::abs(loadings(i, j)) >= threshold) out[i][j] = loadings(i, j);
    return out;
}

struct FactorOptions {
    Retention retention = Retention::kaiser();
    bool kaiser_normalize = true;
};

struct FactorModel {
    std::vector<std::string> variables;
    std::vector<double> eigenvalues;
    Matrix loadings; // p x m, unrotated
    std::vector<double> communalities_extraction;
    Matrix rotated_loadings; // p x m; equals `loadings` when m == 1
    VarianceTable variance;
    std::size_t factors = 0;
    bool degenerate_retention = false;
    bool rotated = false;
    VarimaxResult varimax_info;
};

/// PCA extraction, factor retention and varimax rotation in one pass.
inline FactorModel factor_analysis(const FeatureMatrix& m, const FactorOptions& opts = {}) {
    const PcaResult pc = pca(m);
    FactorModel model;
    model.variables = m.col_ids;
    model.eigenvalues = pc.eigenvalues;
    const auto kept = retain_factors(pc.eigenvalues, opts.retention);
    model.factors = kept.factors;
    model.degenerate_retention = kept.degenerate;
    model.loadings = pc.loadings.leading_columns(kept.factors);
    model.communalities_extraction = communalities(model.loadings);
    if (kept.factors >= 2) {
        model.varimax_info = varimax(model.loadings, opts.kaiser_normalize);
        model.rotated_loadings = model.varimax_info.rotated;
        model.rotated = true;
    } else {
        model.rotated_loadings = model.loadings;
    }
    model.variance = variance_table(model.eigenvalues, model.factors, column_ss(model.rotated_loadings));
    return model;
}

} // namespace talim::stats

#endif
