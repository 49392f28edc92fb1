#include "gravidec/states.hpp"

#include <cmath>
#include <sstream>

#include "gravidec/errors.hpp"

namespace gravidec {

namespace {

DensityMatrix pure(const CVector& psi) {
    DensityMatrix rho;
    rho.data = psi * psi.adjoint();
    rho.tail_mass = 1.0 - psi.squaredNorm();
    return rho;
}

}  // namespace

std::string describe(const StateDescriptor& s) {
    struct Visitor {
        std::string operator()(const GroundState&) const { return "ground"; }
        std::string operator()(const CoherentState& c) const {
            std::ostringstream os;
            os << "coherent(" << c.mu.real() << "," << c.mu.imag() << ")";
            return os.str();
        }
        std::string operator()(const ThermalOscillator& t) const {
            return "thermal(" + std::to_string(t.nbar) + ")";
        }
        std::string operator()(const FockNumberState& f) const { return "fock(" + std::to_string(f.n) + ")"; }
        std::string operator()(const CatState& c) const {
            std::ostringstream os;
            os << "cat(" << c.mu.real() << "," << c.mu.imag() << ";" << c.phase << ")";
            return os.str();
        }
        std::string operator()(const SqueezedVacuum& s) const {
            std::ostringstream os;
            os << "squeezed(" << s.r << ";" << s.phi << ")";
            return os.str();
        }
    };
    return std::visit(Visitor{}, s);
}

CVector coherent_amplitudes(cplx mu, int dim) {
    CVector out(dim);
    cplx c = std::exp(-0.5 * std::norm(mu));
    for (int n = 0; n < dim; ++n) {
        out(n) = c;
        c *= mu / std::sqrt(static_cast<double>(n + 1));
    }
    return out;
}

DensityMatrix fock_density(const StateDescriptor& s, int dim) {
    if (dim < 2) throw DimensionError("fock_density needs dim >= 2");
    struct Visitor {
        int dim;
        DensityMatrix operator()(const GroundState&) const {
            CVector psi = CVector::Zero(dim);
            psi(0) = 1.0;
            return pure(psi);
        }
        DensityMatrix operator()(const CoherentState& c) const { return pure(coherent_amplitudes(c.mu, dim)); }
        DensityMatrix operator()(const ThermalOscillator& t) const {
            if (!(t.nbar >= 0.0)) throw DomainError("thermal oscillator needs nbar >= 0");
            DensityMatrix rho;
            rho.data = CMatrix::Zero(dim, dim);
            const double q = t.nbar / (1.0 + t.nbar);
            double p = 1.0 / (1.0 + t.nbar);
            double kept = 0.0;
            for (int n = 0; n < dim; ++n) {
                rho.data(n, n) = p;
                kept += p;
                p *= q;
            }
            rho.tail_mass = 1.0 - kept;
            return rho;
        }
        DensityMatrix operator()(const FockNumberState& f) const {
            if (f.n < 0 || f.n >= dim) throw DimensionError("Fock level outside truncation");
            CVector psi = CVector::Zero(dim);
            psi(f.n) = 1.0;
            return pure(psi);
        }
        DensityMatrix operator()(const CatState& c) const {
            const double overlap = std::exp(-2.0 * std::norm(c.mu));
            const double norm2 = 2.0 + 2.0 * std::cos(c.phase) * overlap;
            if (!(norm2 > 1e-300)) throw DomainError("cat state has zero norm");
            const CVector psi = (coherent_amplitudes(c.mu, dim) +
                                 std::polar(1.0, c.phase) * coherent_amplitudes(-c.mu, dim)) /
                                std::sqrt(norm2);
            return pure(psi);
        }
        DensityMatrix operator()(const SqueezedVacuum& s) const {
            if (!(s.r >= 0.0)) throw DomainError("squeezing needs r >= 0");
            CVector psi = CVector::Zero(dim);
            const cplx ratio = -std::polar(std::tanh(s.r), s.phi);
            // c_{2m} = ratio^m sqrt((2m)!) / (2^m m!) / sqrt(cosh r), built by recurrence.
            cplx c = 1.0 / std::sqrt(std::cosh(s.r));
            for (int m = 0; 2 * m < dim; ++m) {
                psi(2 * m) = c;
                c *= ratio * std::sqrt((2.0 * m + 1.0) * (2.0 * m + 2.0)) / (2.0 * (m + 1));
            }
            return pure(psi);
        }
    };
    return std::visit(Visitor{dim}, s);
}

}  // namespace gravidec
