#pragma once

#include <cmath>
#include <vector>

#include "ppslab/connection.hpp"
#include "ppslab/core.hpp"
#include "ppslab/observable.hpp"
#include "ppslab/states.hpp"

namespace ppslab {

// P = Tr(rho E) for a normalized effect.
inline double born_probability(const DensityMatrix& rho, const PovmElement& effect) {
    require_same_dim(rho.matrix(), effect.matrix(), "born_probability");
    if (!effect.normalized())
        throw UnnormalizedEffect("born_probability: effect has eigenvalues above one");
    Complex p = trace_of_product(rho.matrix(), effect.matrix());
    if (std::abs(p.imag()) > 1e-12)
        throw InvalidArgument("born_probability: trace has a non-negligible imaginary part");
    return p.real();
}

// Abar = Tr(A rho).
inline double expectation(const Observable& a, const DensityMatrix& rho) {
    require_same_dim(a.matrix(), rho.matrix(), "expectation");
    Complex v = trace_of_product(a.matrix(), rho.matrix());
    if (std::abs(v.imag()) > 1e-12)
        throw InvalidArgument("expectation: trace has a non-negligible imaginary part");
    return v.real();
}

// Pi rho Pi / Tr(rho Pi). The projector must be Hermitian and idempotent.
inline DensityMatrix projective_posterior(const DensityMatrix& rho, const CMatrix& projector) {
    require_square(projector, "projective_posterior");
    require_same_dim(rho.matrix(), projector, "projective_posterior");
    require_hermitian(projector, "projective_posterior");
    if (operator_norm(projector * projector - projector) >
        kHermTol * std::max(1.0, operator_norm(projector)))
        throw InvalidArgument("projective_posterior: matrix is not idempotent");
    double p = trace_of_product(rho.matrix(), projector).real();
    if (p <= kPostSelectionEps)
        throw DegeneratePostSelection("projective_posterior: Tr(rho Pi) at or below cutoff");
    return DensityMatrix(projector * rho.matrix() * projector / p);
}

// sqrt(E) rho sqrt(E) / Tr(rho E): posterior of a minimally disturbing
// post-selection measurement.
inline DensityMatrix minimally_disturbing_posterior(const DensityMatrix& rho,
                                                    const PovmElement& effect) {
    require_same_dim(rho.matrix(), effect.matrix(), "minimally_disturbing_posterior");
    double p = trace_of_product(rho.matrix(), effect.matrix()).real();
    if (p <= kPostSelectionEps)
        throw DegeneratePostSelection(
            "minimally_disturbing_posterior: Tr(rho E) at or below cutoff");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(effect.matrix());
    Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    CMatrix sqrt_e = es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
    return DensityMatrix(sqrt_e * rho.matrix() * sqrt_e / p);
}

// Strong-measurement outcome probabilities in a PPS ensemble:
// P_{i|E} = Tr(E Pi_i rho Pi_i) / sum_j Tr(E Pi_j rho Pi_j), ordered like
// a.eigenvalues().
inline std::vector<double> abl_probabilities(const DensityMatrix& rho, const Observable& a,
                                             const PovmElement& effect) {
    require_same_dim(rho.matrix(), a.matrix(), "abl_probabilities");
    require_same_dim(rho.matrix(), effect.matrix(), "abl_probabilities");
    std::vector<double> numerators;
    double denom = 0.0;
    for (const CMatrix& pi : a.projectors()) {
        double n = trace_of_product(effect.matrix(), pi * rho.matrix() * pi).real();
        numerators.push_back(n);
        denom += n;
    }
    if (denom <= kPostSelectionEps)
        throw DegeneratePostSelection(
            "abl_probabilities: every intermediate outcome kills the post-selection");
    for (double& n : numerators) n /= denom;
    return numerators;
}

namespace detail {

inline void require_commuting_factors(const Observable& a, const CMatrix& rho,
                                      const CMatrix& effect, const std::string& what) {
    if (!commutes(a.matrix(), rho, kHermTol) && !commutes(a.matrix(), effect, kHermTol))
        throw CommutationRequired(what +
                                  ": observable commutes with neither rho nor E; the "
                                  "connection-state strong-measurement formulas do not apply");
}

}  // namespace detail

// P_{i|E} = Tr(Pi_i w) = Tr(Pi_i w'), valid when A commutes with rho or E.
// The gate is verified against the supplied factors.
inline std::vector<double> strong_pps_via_connection(const Observable& a, const ConnectionState& w,
                                                     const CMatrix& rho, const CMatrix& effect) {
    require_same_dim(a.matrix(), w.w(), "strong_pps_via_connection");
    detail::require_commuting_factors(a, rho, effect, "strong_pps_via_connection");
    std::vector<double> probs;
    probs.reserve(a.spectrum_size());
    for (const CMatrix& pi : a.projectors())
        probs.push_back(trace_of_product(pi, w.w()).real());
    return probs;
}

inline std::vector<double> strong_pps_via_connection(const Observable& a,
                                                     const ConnectionState& w) {
    if (!w.has_factors())
        throw CommutationRequired(
            "strong_pps_via_connection: connection state carries no (rho, E) factors; pass "
            "them explicitly");
    return strong_pps_via_connection(a, w, w.rho_factor(), w.effect_factor());
}

// Spectral representation of the weak value, sum_i a_i Tr(Pi_i w); under the
// commutation gate this is a usual value inside the spectrum of A.
inline double weak_value_spectral(const Observable& a, const ConnectionState& w,
                                  const CMatrix& rho, const CMatrix& effect) {
    std::vector<double> probs = strong_pps_via_connection(a, w, rho, effect);
    double value = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) value += a.eigenvalues()[i] * probs[i];
    return value;
}

inline double weak_value_spectral(const Observable& a, const ConnectionState& w) {
    if (!w.has_factors())
        throw CommutationRequired(
            "weak_value_spectral: connection state carries no (rho, E) factors; pass them "
            "explicitly");
    return weak_value_spectral(a, w, w.rho_factor(), w.effect_factor());
}

// Variance of A in the PPS ensemble, evaluated with the Hermitian part:
// (A^2)_{w'} - ((A)_{w'})^2. The anti-Hermitian part does not influence
// measurements under the commutation gate.
inline double weak_variance(const Observable& a, const ConnectionState& w) {
    require_same_dim(a.matrix(), w.w(), "weak_variance");
    double first = trace_of_product(a.matrix(), w.herm_part()).real();
    double second = trace_of_product(a.matrix() * a.matrix(), w.herm_part()).real();
    return second - first * first;
}

}  // namespace ppslab
