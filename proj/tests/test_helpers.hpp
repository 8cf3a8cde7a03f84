#pragma once

// Shared test utilities.  The dense-scan root oracle here stays independent
// of the library's solver: it brackets sign changes of the steady-state
// residual on a uniform 1e5-point grid and bisects each bracket.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bicavity/core.hpp"

namespace testutil {

inline double residual(double J, double denom, const bicavity::FeedbackCurve& curve) {
    return J * denom - bicavity::feedback_input(J, curve);
}

// Brute-force roots of J*denom = feedback_input(J) on [0, jmax].  For step
// curves the discontinuity produces a spurious +/- sign change at J =
// i_sw/4; brackets whose bisection stagnates with a large residual are
// dropped.
inline std::vector<double> brute_force_roots(double delta_hat, double gamma_hat,
                                             const bicavity::FeedbackCurve& curve,
                                             int points = 100000) {
    const double one_g = 1.0 + gamma_hat;
    const double denom = one_g * one_g + delta_hat * delta_hat;
    const double jmax = bicavity::max_input(curve) / denom + 1e-9;
    std::vector<double> roots;
    double xp = 0.0, fp = residual(0.0, denom, curve);
    for (int i = 1; i <= points; ++i) {
        const double x = jmax * static_cast<double>(i) / points;
        const double f = residual(x, denom, curve);
        if ((fp < 0.0) != (f < 0.0)) {
            double lo = xp, hi = x, flo = fp;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                const double fm = residual(mid, denom, curve);
                if ((flo <= 0.0) == (fm <= 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            const double r = 0.5 * (lo + hi);
            if (std::abs(residual(r, denom, curve)) < 1e-9) roots.push_back(r);
        } else if (f == 0.0) {
            roots.push_back(x);
        }
        xp = x;
        fp = f;
    }
    return roots;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Minimal CSV reader: header row + numeric cells ("" -> NaN).
struct Csv {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int col(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline Csv read_csv(const std::string& path) {
    Csv csv;
    std::ifstream in(path);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        if (first) {
            csv.columns = cells;
            first = false;
            continue;
        }
        std::vector<double> row;
        for (const auto& c : cells)
            row.push_back(c.empty() ? std::nan("") : std::stod(c));
        csv.rows.push_back(std::move(row));
    }
    return csv;
}

}  // namespace testutil
