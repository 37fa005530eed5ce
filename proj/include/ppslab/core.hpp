#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>

#include "ppslab/errors.hpp"

namespace ppslab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Library-wide tolerances. Hamiltonians are in angular-frequency units
// (hbar = 1 throughout).
inline constexpr double kHermTol = 1e-10;           // relative Hermiticity tolerance
inline constexpr double kPosTol = 1e-10;            // eigenvalue positivity slack
inline constexpr double kDegTolFactor = 1e-8;       // degeneracy gap, times operator norm
inline constexpr double kPostSelectionEps = 1e-12;  // post-selection trace cutoff
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kExactZeroTol = 1e-14;      // "numerically exactly zero" floor
inline constexpr int kMaxDim = 64;                  // validation cap, not a formalism limit

inline constexpr Complex kImag{0.0, 1.0};

inline void require_square(const CMatrix& m, const std::string& what) {
    if (m.rows() < 1 || m.rows() != m.cols())
        throw DimensionMismatch(what + ": expected a square matrix, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    if (!m.allFinite())
        throw InvalidArgument(what + ": matrix has non-finite entries");
}

inline void require_dim_cap(const CMatrix& m, const std::string& what) {
    if (m.rows() > kMaxDim)
        throw InvalidArgument(what + ": dimension " + std::to_string(m.rows()) +
                              " exceeds the supported cap " + std::to_string(kMaxDim));
}

inline void require_same_dim(const CMatrix& a, const CMatrix& b, const std::string& what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch(what + ": dimensions " + std::to_string(a.rows()) + " and " +
                                std::to_string(b.rows()) + " differ");
}

inline CMatrix dagger(const CMatrix& m) { return m.adjoint(); }

// Largest singular value.
inline double operator_norm(const CMatrix& m) {
    require_square(m, "operator_norm");
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

inline CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

// Anti-Hermitian content as a Hermitian matrix: m = herm + i * antiherm.
inline CMatrix antihermitian_part(const CMatrix& m) {
    return (m - m.adjoint()) / (2.0 * kImag);
}

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

inline CMatrix anticommutator(const CMatrix& a, const CMatrix& b) { return a * b + b * a; }

// True iff ||M - M^dag|| <= tau * max(1, ||M||).
inline bool validate_hermitian(const CMatrix& m, double tau = kHermTol) {
    require_square(m, "validate_hermitian");
    double dev = operator_norm(m - m.adjoint());
    return dev <= tau * std::max(1.0, operator_norm(m));
}

inline void require_hermitian(const CMatrix& m, const std::string& what, double tau = kHermTol) {
    if (!validate_hermitian(m, tau))
        throw NotHermitian(what + ": matrix is not Hermitian within tolerance " +
                           std::to_string(tau));
}

// True iff ||AB - BA|| <= tau * max(1, ||A|| * ||B||).
inline bool commutes(const CMatrix& a, const CMatrix& b, double tau = kHermTol) {
    require_square(a, "commutes");
    require_square(b, "commutes");
    require_same_dim(a, b, "commutes");
    double dev = operator_norm(commutator(a, b));
    return dev <= tau * std::max(1.0, operator_norm(a) * operator_norm(b));
}

inline bool approx_unitary(const CMatrix& u, double tau = kUnitaryTol) {
    require_square(u, "approx_unitary");
    CMatrix gram = u.adjoint() * u;
    gram -= CMatrix::Identity(u.rows(), u.cols());
    return operator_norm(gram) <= tau;
}

inline void require_unitary(const CMatrix& u, const std::string& what, double tau = kUnitaryTol) {
    if (!approx_unitary(u, tau))
        throw NotUnitary(what + ": matrix is not unitary within tolerance " + std::to_string(tau));
}

// Trace of a product without forming it.
inline Complex trace_of_product(const CMatrix& a, const CMatrix& b) {
    require_same_dim(a, b, "trace_of_product");
    return (a.array() * b.transpose().array()).sum();
}

}  // namespace ppslab
