#include "gravidec/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

namespace gravidec {

namespace {

// Kronrod abscissae on [0, 1] (odd indices are the 7-point Gauss nodes) and weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double lo;
    double hi;
    std::complex<double> value;
    double error;
    double l1;

    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gk15(const ComplexIntegrand& f, double lo, double hi, int& evals) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    const std::complex<double> fc = f(c);
    std::complex<double> kron = fc * kWgk[7];
    std::complex<double> gauss = fc * kWg[3];
    double absk = std::abs(fc) * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[static_cast<std::size_t>(j)];
        const std::complex<double> f1 = f(c - dx);
        const std::complex<double> f2 = f(c + dx);
        kron += (f1 + f2) * kWgk[static_cast<std::size_t>(j)];
        absk += (std::abs(f1) + std::abs(f2)) * kWgk[static_cast<std::size_t>(j)];
        if (j % 2 == 1) gauss += (f1 + f2) * kWg[static_cast<std::size_t>(j / 2)];
    }
    evals += 15;
    return {lo, hi, kron * h, std::abs((kron - gauss) * h), absk * std::abs(h)};
}

}  // namespace

std::vector<Interval> merge_intervals(std::vector<Interval> pieces) {
    std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    for (const Interval& iv : pieces) {
        if (!(iv.hi > iv.lo)) continue;
        if (!out.empty() && iv.lo <= out.back().hi) {
            out.back().hi = std::max(out.back().hi, iv.hi);
        } else {
            out.push_back(iv);
        }
    }
    return out;
}

QuadratureResult integrate_gk15(const ComplexIntegrand& f, std::span<const Interval> domain,
                                const QuadratureOptions& opts) {
    QuadratureResult res;
    std::priority_queue<Panel> heap;
    std::complex<double> total{0.0, 0.0};
    double err = 0.0;
    double l1 = 0.0;

    for (const Interval& iv : domain) {
        const double width = iv.hi - iv.lo;
        if (!(width > 0.0)) continue;
        int pieces = 1;
        if (opts.initial_panel > 0.0) {
            pieces = static_cast<int>(std::min(std::ceil(width / opts.initial_panel), 1.0e5));
            pieces = std::max(pieces, 1);
        }
        const double step = width / pieces;
        for (int k = 0; k < pieces; ++k) {
            const double lo = iv.lo + step * k;
            const double hi = (k + 1 == pieces) ? iv.hi : lo + step;
            Panel p = gk15(f, lo, hi, res.evaluations);
            total += p.value;
            err += p.error;
            l1 += p.l1;
            heap.push(p);
        }
    }

    auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * l1); };
    while (!heap.empty() && err > target() && static_cast<int>(heap.size()) < opts.max_intervals) {
        const Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            heap.push(worst);
            break;  // cannot bisect further in double precision
        }
        const Panel left = gk15(f, worst.lo, mid, res.evaluations);
        const Panel right = gk15(f, mid, worst.hi, res.evaluations);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift of incremental updates.
    total = 0.0;
    err = 0.0;
    l1 = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().error;
        l1 += heap.top().l1;
        heap.pop();
    }
    res.value = total;
    res.error = err;
    res.l1 = l1;
    res.converged = err <= std::max(opts.abs_tol, opts.rel_tol * l1);
    return res;
}

}  // namespace gravidec
