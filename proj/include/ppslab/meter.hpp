#pragma once

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <numbers>
#include <vector>

#include "ppslab/connection.hpp"
#include "ppslab/core.hpp"
#include "ppslab/measurement.hpp"
#include "ppslab/observable.hpp"
#include "ppslab/states.hpp"

namespace ppslab {

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

// Finite-dimensional von Neumann meter: coupling U_c = exp(-i g A (x) F),
// readout of the pointer observable R, initial meter state rho_M.
struct MeterModel {
    int dim_m;
    DensityMatrix rho_m;
    Observable coupling_generator;  // F
    Observable pointer;             // R
    double g;

    void validate() const {
        if (rho_m.dim() != dim_m || coupling_generator.dim() != dim_m || pointer.dim() != dim_m)
            throw DimensionMismatch("MeterModel: operators do not share dim_M");
        if (!std::isfinite(g)) throw InvalidArgument("MeterModel: non-finite coupling g");
    }
};

// Position-grid meter on [-L, L]: R is the diagonal grid-position operator,
// F the conjugate momentum operator diagonalized by the discrete Fourier
// transform, and the initial state a truncated Gaussian of the given width.
// mean_momentum adds a phase ramp exp(i p0 x); a nonzero value breaks the
// meter's parity symmetry, which is what makes the leading correction to the
// weak-limit pointer shift first order in g instead of second.
inline MeterModel gaussian_meter(int dim_m = 32, double half_extent = 8.0, double width = 1.0,
                                 double g = 1.0, double mean_momentum = 0.0) {
    if (dim_m < 2 || dim_m > kMaxDim)
        throw InvalidArgument("gaussian_meter: dim_M outside [2, 64]");
    if (!(half_extent > 0.0) || !(width > 0.0))
        throw InvalidArgument("gaussian_meter: L and width must be positive");

    const int n = dim_m;
    const double dx = 2.0 * half_extent / n;
    Eigen::VectorXd x(n), p(n);
    for (int k = 0; k < n; ++k) x(k) = -half_extent + (k + 0.5) * dx;
    for (int j = 0; j < n; ++j)
        p(j) = (std::numbers::pi / half_extent) * (j - n / 2);

    CMatrix r = x.cast<Complex>().asDiagonal();

    // F = W diag(p) W^dag with the unitary grid Fourier matrix W.
    CMatrix w(n, n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            w(k, j) = std::exp(kImag * x(k) * p(j)) / std::sqrt(static_cast<double>(n));
    CMatrix f = w * p.cast<Complex>().asDiagonal() * w.adjoint();
    f = hermitian_part(f);

    CVector psi(n);
    for (int k = 0; k < n; ++k)
        psi(k) = std::exp(Complex(-x(k) * x(k) / (4.0 * width * width), mean_momentum * x(k)));
    psi /= psi.norm();

    return MeterModel{n, DensityMatrix(psi * psi.adjoint()), Observable(f), Observable(r), g};
}

namespace detail {

// exp(-i c F) from the cached spectral data of F.
inline CMatrix meter_phase_unitary(const Observable& f, double c) {
    CMatrix u = CMatrix::Zero(f.dim(), f.dim());
    for (std::size_t k = 0; k < f.spectrum_size(); ++k)
        u += std::exp(-kImag * c * f.eigenvalues()[k]) * f.projectors()[k];
    return u;
}

}  // namespace detail

// U_c = exp(-i g A (x) F), assembled blockwise in the system eigenbasis: the
// meter block for eigenvalue a_i is exp(-i g a_i F). Distinct eigenvalues
// must drive distinguishable meter blocks; 2-pi aliasing of the phases raises
// AliasedCoupling. Zero coupling is the identity channel and is allowed.
inline CMatrix coupling_unitary(const Observable& a, const MeterModel& meter) {
    meter.validate();
    if (a.dim() * meter.dim_m > 2048)
        throw InvalidArgument("coupling_unitary: joint dimension exceeds 2048");

    std::vector<CMatrix> blocks;
    blocks.reserve(a.spectrum_size());
    for (double ai : a.eigenvalues())
        blocks.push_back(detail::meter_phase_unitary(meter.coupling_generator, meter.g * ai));

    if (meter.g != 0.0) {
        for (std::size_t i = 0; i < blocks.size(); ++i)
            for (std::size_t j = i + 1; j < blocks.size(); ++j)
                if (operator_norm(blocks[i] - blocks[j]) <= 1e-10)
                    throw AliasedCoupling(
                        "coupling_unitary: eigenvalues " + std::to_string(a.eigenvalues()[i]) +
                        " and " + std::to_string(a.eigenvalues()[j]) +
                        " produce the same meter block");
    }

    CMatrix u = CMatrix::Zero(a.dim() * meter.dim_m, a.dim() * meter.dim_m);
    for (std::size_t i = 0; i < blocks.size(); ++i) u += kron(a.projectors()[i], blocks[i]);
    return u;
}

// Pointer expectation for the eigenvalue a: Tr[R U_c(a) rho_M U_c(a)^dag].
inline double pointer_eigenvalue_response(double a, const MeterModel& meter) {
    meter.validate();
    CMatrix u = detail::meter_phase_unitary(meter.coupling_generator, meter.g * a);
    return trace_of_product(meter.pointer.matrix(), u * meter.rho_m.matrix() * u.adjoint())
        .real();
}

namespace detail {

inline double real_checked(Complex v, double scale, const std::string& what) {
    if (std::abs(v.imag()) > 1e-10 * std::max(1.0, scale))
        throw InvalidArgument(what + ": non-negligible imaginary part");
    return v.real();
}

}  // namespace detail

// Rbar_f = Tr[(I (x) R) U_c (rho (x) rho_M) U_c^dag].
inline double pointer_expectation_preselected(const DensityMatrix& rho, const Observable& a,
                                              const MeterModel& meter) {
    require_same_dim(rho.matrix(), a.matrix(), "pointer_expectation_preselected");
    CMatrix u = coupling_unitary(a, meter);
    CMatrix joint = u * kron(rho.matrix(), meter.rho_m.matrix()) * u.adjoint();
    CMatrix readout = kron(CMatrix::Identity(rho.dim(), rho.dim()), meter.pointer.matrix());
    Complex v = trace_of_product(readout, joint);
    return detail::real_checked(v, operator_norm(meter.pointer.matrix()),
                                "pointer_expectation_preselected");
}

// Arbitrary-strength PPS pointer expectation:
//   Rbar_s = Tr[(E (x) R) U_c (rho (x) rho_M) U_c^dag]
//          / Tr[(E (x) I_M) U_c (rho (x) rho_M) U_c^dag].
inline double pointer_expectation_pps(const DensityMatrix& rho, const PovmElement& effect,
                                      const Observable& a, const MeterModel& meter) {
    require_same_dim(rho.matrix(), a.matrix(), "pointer_expectation_pps");
    require_same_dim(rho.matrix(), effect.matrix(), "pointer_expectation_pps");
    CMatrix u = coupling_unitary(a, meter);
    CMatrix joint = u * kron(rho.matrix(), meter.rho_m.matrix()) * u.adjoint();
    CMatrix id_m = CMatrix::Identity(meter.dim_m, meter.dim_m);
    Complex denom = trace_of_product(kron(effect.matrix(), id_m), joint);
    if (denom.real() <= kPostSelectionEps)
        throw DegeneratePostSelection("pointer_expectation_pps: post-selection trace at cutoff");
    Complex numer = trace_of_product(kron(effect.matrix(), meter.pointer.matrix()), joint);
    return detail::real_checked(numer / denom, operator_norm(meter.pointer.matrix()),
                                "pointer_expectation_pps");
}

// Rbar_f = Tr[(I (x) R) U_c (w (x) rho_M) U_c^dag] with the connection state
// in the system slot (its Hermitian part when use_hermitian_part is set).
// Valid when the observable commutes with one of the state's factors, in
// which case it reproduces the PPS pointer expectation at any strength.
inline double pointer_expectation_connection(const ConnectionState& w, const Observable& a,
                                             const MeterModel& meter, const CMatrix& rho,
                                             const CMatrix& effect,
                                             bool use_hermitian_part = false) {
    require_same_dim(w.w(), a.matrix(), "pointer_expectation_connection");
    detail::require_commuting_factors(a, rho, effect, "pointer_expectation_connection");
    CMatrix u = coupling_unitary(a, meter);
    const CMatrix& sys = use_hermitian_part ? w.herm_part() : w.w();
    CMatrix joint = u * kron(sys, meter.rho_m.matrix()) * u.adjoint();
    CMatrix readout = kron(CMatrix::Identity(w.dim(), w.dim()), meter.pointer.matrix());
    Complex v = trace_of_product(readout, joint);
    return detail::real_checked(v, operator_norm(meter.pointer.matrix()),
                                "pointer_expectation_connection");
}

inline double pointer_expectation_connection(const ConnectionState& w, const Observable& a,
                                             const MeterModel& meter,
                                             bool use_hermitian_part = false) {
    if (!w.has_factors())
        throw CommutationRequired(
            "pointer_expectation_connection: connection state carries no (rho, E) factors");
    return pointer_expectation_connection(w, a, meter, w.rho_factor(), w.effect_factor(),
                                          use_hermitian_part);
}

// Most general reparametrization absorbing the system dynamics into the
// triple. `u_sys` is the propagator from the coupling time to the
// post-selection time; it transports the effect back to the coupling time.
// `u_frame` is an arbitrary unitary change of frame; PPS pointer expectations
// are invariant under its choice.
struct SubstitutedTriple {
    DensityMatrix rho;
    PovmElement effect;
    Observable observable;
};

inline SubstitutedTriple apply_dynamics_substitution(const DensityMatrix& rho,
                                                     const PovmElement& effect,
                                                     const Observable& a, const CMatrix& u_sys,
                                                     const CMatrix& u_frame) {
    require_same_dim(rho.matrix(), u_sys, "apply_dynamics_substitution");
    require_same_dim(rho.matrix(), u_frame, "apply_dynamics_substitution");
    require_unitary(u_sys, "apply_dynamics_substitution");
    require_unitary(u_frame, "apply_dynamics_substitution");
    CMatrix effect_at_coupling = u_sys.adjoint() * effect.matrix() * u_sys;
    return SubstitutedTriple{
        DensityMatrix(u_frame * rho.matrix() * u_frame.adjoint()),
        PovmElement(u_frame * effect_at_coupling * u_frame.adjoint()),
        Observable(u_frame * a.matrix() * u_frame.adjoint())};
}

// Weak-value readout: pointer shift over g at two couplings, plus the
// first-order Richardson combination of the two estimates.
struct ShiftExtraction {
    double g1 = 0.0;
    double g2 = 0.0;
    double estimate1 = 0.0;  // shift/g at g1
    double estimate2 = 0.0;  // shift/g at g2
    double richardson = 0.0;
};

inline ShiftExtraction extract_weak_value_shift(const DensityMatrix& rho,
                                                const PovmElement& effect, const Observable& a,
                                                const MeterModel& meter, double g1, double g2) {
    if (g1 == 0.0 || g2 == 0.0 || g1 == g2)
        throw InvalidArgument("extract_weak_value_shift: need two distinct nonzero couplings");
    double baseline =
        trace_of_product(meter.pointer.matrix(), meter.rho_m.matrix()).real();
    MeterModel m1 = meter;
    m1.g = g1;
    MeterModel m2 = meter;
    m2.g = g2;
    ShiftExtraction ex;
    ex.g1 = g1;
    ex.g2 = g2;
    ex.estimate1 = (pointer_expectation_pps(rho, effect, a, m1) - baseline) / g1;
    ex.estimate2 = (pointer_expectation_pps(rho, effect, a, m2) - baseline) / g2;
    ex.richardson = (g1 * ex.estimate2 - g2 * ex.estimate1) / (g1 - g2);
    return ex;
}

}  // namespace ppslab
