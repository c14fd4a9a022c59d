#ifndef TALIM_STATS_CORRELATION_HPP
#define TALIM_STATS_CORRELATION_HPP

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "talim/error.hpp"
#include "talim/stats/distributions.hpp"
#include "talim/stats/matrix.hpp"

namespace talim::stats {

struct CorrelationResult {
    std::vector<std::string> ids;
    Matrix r;
    Matrix p_values;
    std::size_t n = 0;
};

/// Two-tailed significance of a sample correlation over n observations.
inline double correlation_p_value(double r, std::size_t n) {
    if (n < 3) throw Error(ErrorCode::InvalidMatrix, "significance needs n >= 3");
    if (std::abs(r) >= 1.0) return 0.0;
    const double df = double(n) - 2.0;
    const double t = r * std::sqrt(df / (1.0 - r * r));
    return student_t_two_tailed(t, df);
}

/// `**` below 0.01, `*` below 0.05.
inline std::string_view significance_stars(double p) {
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

namespace detail {

inline std::vector<double> column_means(const Matrix& x) {
    std::vector<double> mean(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) mean[j] += x(i, j);
    for (double& m : mean) m /= double(x.rows());
    return mean;
}

/// Centered sums of squares; throws ZeroVariance naming the first constant column.
inline std::vector<double> centered_ss(const FeatureMatrix& m, const std::vector<double>& mean) {
    std::vector<double> ss(m.p(), 0.0);
    for (std::size_t i = 0; i < m.n(); ++i)
        for (std::size_t j = 0; j < m.p(); ++j) {
            const double d = m.values(i, j) - mean[j];
            ss[j] += d * d;
        }
    for (std::size_t j = 0; j < m.p(); ++j) {
        double scale = 0.0;
        for (std::size_t i = 0; i < m.n(); ++i) scale = std::max(scale, std::abs(m.values(i, j)));
        if (!(ss[j] > 1e-24 * scale * scale * double(m.n())) || ss[j] == 0.0)
            throw Error(ErrorCode::ZeroVariance, "column '" + m.col_ids[j] + "' is constant");
    }
    return ss;
}

} // namespace detail

inline CorrelationResult pearson(const FeatureMatrix& m) {
    m.validate();
    const std::size_t n = m.n(), p = m.p();
    const auto mean = detail::column_means(m.values);
    const auto ss = detail::centered_ss(m, mean);

    CorrelationResult out{m.col_ids, Matrix(p, p), Matrix(p, p), n};
    for (std::size_t a = 0; a < p; ++a) {
        out.r(a, a) = 1.0;
        for (std::size_t b = a + 1; b < p; ++b) {
            double cross = 0.0;
            for (std::size_t i = 0; i < n; ++i) cross += (m.values(i, a) - mean[a]) * (m.values(i, b) - mean[b]);
            const double r = std::clamp(cross / std::sqrt(ss[a] * ss[b]), -1.0, 1.0);
            const double pv = correlation_p_value(r, n);
            out.r(a, b) = out.r(b, a) = r;
            out.p_values(a, b) = out.p_values(b, a) = pv;
        }
    }
    return out;
}

} // namespace talim::stats

#endif
