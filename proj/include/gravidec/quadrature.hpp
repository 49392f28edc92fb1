#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace gravidec {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct QuadratureOptions {
    double rel_tol = 1e-12;  // relative to the integral of |f|
    double abs_tol = 0.0;
    int max_intervals = 4000;
    /// Initial panel width; 0 leaves each interval whole.
    double initial_panel = 0.0;
};

struct QuadratureResult {
    std::complex<double> value{0.0, 0.0};
    double error = 0.0;  // estimated absolute error
    double l1 = 0.0;     // estimate of the integral of |f|
    int evaluations = 0;
    bool converged = false;
};

using ComplexIntegrand = std::function<std::complex<double>(double)>;

/// Globally adaptive 7/15-point Gauss-Kronrod over a union of intervals. The
/// interval with the largest error estimate is bisected until the summed
/// estimate drops below max(abs_tol, rel_tol * l1) or the interval budget is
/// exhausted (converged = false).
QuadratureResult integrate_gk15(const ComplexIntegrand& f, std::span<const Interval> domain,
                                const QuadratureOptions& opts = {});

/// Sorts and fuses overlapping intervals.
std::vector<Interval> merge_intervals(std::vector<Interval> pieces);

}  // namespace gravidec
