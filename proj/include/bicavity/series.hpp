#pragma once

// Small time-series utilities: population variance (two routes), centered
// moving average, least-squares line fits, and window searches used by the
// trajectory summaries.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace bicavity {

// Population variance via E[x^2] - E[x]^2.
inline double variance_population(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0, s2 = 0.0;
    for (double x : xs) {
        s += x;
        s2 += x * x;
    }
    const double mean = s / static_cast<double>(xs.size());
    return s2 / static_cast<double>(xs.size()) - mean * mean;
}

// Population variance via the two-pass formula.
inline double variance_two_pass(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    const double mean = s / static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(xs.size());
}

// Centered moving average with window W (odd); endpoints use the truncated
// window.  W = 1 is the identity.
inline std::vector<double> moving_average_centered(const std::vector<double>& xs, int window) {
    if (window < 1 || window % 2 == 0)
        throw std::invalid_argument("moving_average_centered: window must be odd and >= 1");
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(xs.size());
    const std::ptrdiff_t half = window / 2;
    std::vector<double> out(xs.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
        double acc = 0.0;
        for (std::ptrdiff_t k = lo; k <= hi; ++k) acc += xs[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
    }
    return out;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
};

inline LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = std::min(xs.size(), ys.size());
    LinearFit fit;
    if (n < 2) return fit;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

struct WindowFit {
    std::size_t begin = 0;  // first sample index of the window
    std::size_t end = 0;    // one past the last index
    LinearFit fit;
};

// Longest suffix [i0, end) whose global line fit has R^2 above `r2_min`.
// Scans candidate starts from the left using O(1) range fits on prefix sums.
inline std::optional<WindowFit> longest_suffix_linear_window(const std::vector<double>& xs,
                                                             const std::vector<double>& ys,
                                                             std::size_t end, double r2_min = 0.99,
                                                             std::size_t min_points = 8) {
    end = std::min(end, std::min(xs.size(), ys.size()));
    if (end < min_points) return std::nullopt;
    std::vector<double> px(end + 1, 0.0), py(end + 1, 0.0), pxx(end + 1, 0.0), pxy(end + 1, 0.0),
        pyy(end + 1, 0.0);
    for (std::size_t i = 0; i < end; ++i) {
        px[i + 1] = px[i] + xs[i];
        py[i + 1] = py[i] + ys[i];
        pxx[i + 1] = pxx[i] + xs[i] * xs[i];
        pxy[i + 1] = pxy[i] + xs[i] * ys[i];
        pyy[i + 1] = pyy[i] + ys[i] * ys[i];
    }
    for (std::size_t i0 = 0; i0 + min_points <= end; ++i0) {
        const double n = static_cast<double>(end - i0);
        const double sx = px[end] - px[i0], sy = py[end] - py[i0];
        const double sxx = (pxx[end] - pxx[i0]) - sx * sx / n;
        const double sxy = (pxy[end] - pxy[i0]) - sx * sy / n;
        const double syy = (pyy[end] - pyy[i0]) - sy * sy / n;
        if (sxx <= 0.0) continue;
        const double r2 = (syy <= 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
        if (r2 > r2_min) {
            WindowFit w;
            w.begin = i0;
            w.end = end;
            w.fit.slope = sxy / sxx;
            w.fit.intercept = (sy - w.fit.slope * sx) / n;
            w.fit.r2 = r2;
            return w;
        }
    }
    return std::nullopt;
}

// First x at which |y| drops to `threshold`, linearly interpolated.
inline std::optional<double> first_time_below(const std::vector<double>& xs,
                                              const std::vector<double>& ys, double threshold) {
    for (std::size_t i = 0; i < std::min(xs.size(), ys.size()); ++i) {
        if (std::abs(ys[i]) <= threshold) {
            if (i == 0) return xs[0];
            const double y0 = std::abs(ys[i - 1]), y1 = std::abs(ys[i]);
            const double f = (y0 - threshold) / (y0 - y1);
            return xs[i - 1] + f * (xs[i] - xs[i - 1]);
        }
    }
    return std::nullopt;
}

}  // namespace bicavity
