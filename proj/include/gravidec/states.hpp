#pragma once

// Initial states of the trapped oscillator.

#include <complex>
#include <string>
#include <variant>

#include "gravidec/fockspace.hpp"

namespace gravidec {

struct GroundState {};
struct CoherentState {
    cplx mu{0.0, 0.0};
};
struct ThermalOscillator {
    double nbar = 0.0;
};
struct FockNumberState {
    int n = 0;
};
/// N (|mu> + e^{i phase} |-mu>).
struct CatState {
    cplx mu{0.0, 0.0};
    double phase = 0.0;
};
/// S(r e^{i phi}) |0> with S(z) = exp((conj(z) b^2 - z b^dag^2) / 2).
struct SqueezedVacuum {
    double r = 0.0;
    double phi = 0.0;
};

using StateDescriptor =
    std::variant<GroundState, CoherentState, ThermalOscillator, FockNumberState, CatState, SqueezedVacuum>;

std::string describe(const StateDescriptor& s);

/// The state on the first `dim` Fock levels. Entries are the exact infinite-
/// space amplitudes (no renormalization); tail_mass = 1 - trace.
DensityMatrix fock_density(const StateDescriptor& s, int dim);

/// Fock amplitudes <n|mu> for n < dim.
CVector coherent_amplitudes(cplx mu, int dim);

}  // namespace gravidec
