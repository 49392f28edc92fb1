#pragma once

// Seeded generators for the property tests. Every draw is reproducible.

#include <complex>
#include <cstdint>
#include <random>

#include <doctest.h>

#include "gravidec/fockspace.hpp"

namespace testsupport {

/// doctest's Approx adds an absolute slack of epsilon * 1.0; tiny physical
/// values need a purely relative comparison.
inline doctest::Approx Approx(double v) { return doctest::Approx(v).scale(1e-300); }

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    /// log-uniform on [lo, hi], lo > 0
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::complex<double> complex_in_disk(double radius) {
        const double r = radius * std::sqrt(uniform(0.0, 1.0));
        return std::polar(r, uniform(0.0, 6.283185307179586));
    }
    gravidec::CMatrix complex_matrix(int rows, int cols) {
        gravidec::CMatrix m(rows, cols);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) m(i, j) = {uniform(-1.0, 1.0), uniform(-1.0, 1.0)};
        }
        return m;
    }
    /// Random density matrix A A^dag / Tr.
    gravidec::DensityMatrix density(int dim) {
        const gravidec::CMatrix a = complex_matrix(dim, dim);
        gravidec::DensityMatrix rho;
        rho.data = a * a.adjoint();
        rho.data /= rho.data.trace().real();
        return rho;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace testsupport
