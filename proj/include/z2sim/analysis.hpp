#ifndef Z2SIM_ANALYSIS_HPP
#define Z2SIM_ANALYSIS_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "z2sim/common.hpp"

namespace z2sim {

struct SlopeFit {
    double slope = 0.0;
    double stderr_slope = 0.0;
    double intercept = 0.0;
};

// Least-squares slope of log(y) against log(x).
inline SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("slope fit needs at least 3 points");
    std::vector<double> xs, ys;
    for (const auto& [x, y] : points) {
        if (x <= 0 || y <= 0)
            throw std::invalid_argument("log-log fit needs strictly positive data");
        xs.push_back(std::log(x));
        ys.push_back(std::log(y));
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0) throw std::invalid_argument("degenerate abscissae in slope fit");
    SlopeFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += r * r;
    }
    if (xs.size() > 2)
        fit.stderr_slope = std::sqrt(ss_res / (n - 2) / (sxx - sx * sx / n));
    return fit;
}

// First crossing of two curves sampled on the same grid, linearly
// interpolated; nullopt when the difference never changes sign.
inline std::optional<double> find_crossing(const std::vector<std::pair<double, double>>& a,
                                           const std::vector<std::pair<double, double>>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("crossing search needs two equal-length curves");
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        if (a[i].first != b[i].first)
            throw std::invalid_argument("crossing search needs a shared grid");
        const double d0 = a[i].second - b[i].second;
        const double d1 = a[i + 1].second - b[i + 1].second;
        if (d0 == 0.0) return a[i].first;
        if (d0 * d1 < 0.0)
            return a[i].first + (a[i + 1].first - a[i].first) * d0 / (d0 - d1);
    }
    if (a.back().second == b.back().second) return a.back().first;
    return std::nullopt;
}

}  // namespace z2sim

#endif
