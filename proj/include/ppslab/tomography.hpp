#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ppslab/connection.hpp"
#include "ppslab/core.hpp"
#include "ppslab/observable.hpp"
#include "ppslab/states.hpp"

namespace ppslab {

// Linearly independent set of d^2 operators spanning the operator space.
class OperatorBasis {
public:
    OperatorBasis(std::vector<CMatrix> operators, std::string label)
        : operators_(std::move(operators)), label_(std::move(label)) {
        if (operators_.empty()) throw SingularDesign("OperatorBasis: empty set");
        int d = static_cast<int>(operators_.front().rows());
        if (operators_.size() != static_cast<std::size_t>(d) * d)
            throw SingularDesign("OperatorBasis: expected d^2 operators");
        for (const auto& b : operators_) {
            require_square(b, "OperatorBasis");
            require_same_dim(b, operators_.front(), "OperatorBasis");
        }
        // Gram matrix of Hilbert-Schmidt inner products must be nonsingular.
        std::size_t n = operators_.size();
        CMatrix gram(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                gram(i, j) = (operators_[i].adjoint() * operators_[j]).trace();
        Eigen::JacobiSVD<CMatrix> svd(gram);
        if (svd.singularValues()(svd.singularValues().size() - 1) <= 1e-10)
            throw SingularDesign("OperatorBasis: operators are not linearly independent");
    }

    const std::vector<CMatrix>& operators() const { return operators_; }
    const std::string& label() const { return label_; }
    int dim() const { return static_cast<int>(operators_.front().rows()); }
    std::size_t size() const { return operators_.size(); }

    // {I, sigma_1, sigma_2, sigma_3} / sqrt(2): Hilbert-Schmidt orthonormal.
    static OperatorBasis pauli() {
        double s = 1.0 / std::sqrt(2.0);
        std::vector<CMatrix> ops;
        ops.push_back(s * CMatrix::Identity(2, 2));
        CMatrix sx(2, 2), sy(2, 2), sz(2, 2);
        sx << 0, 1, 1, 0;
        sy << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
        sz << 1, 0, 0, -1;
        ops.push_back(s * sx);
        ops.push_back(s * sy);
        ops.push_back(s * sz);
        return OperatorBasis(std::move(ops), "pauli");
    }

    // Generalized Gell-Mann matrices plus the identity, Hilbert-Schmidt
    // orthonormal, for arbitrary dimension. Hermitian, so design matrices
    // against Hermitian probes are real.
    static OperatorBasis gell_mann(int d) {
        if (d < 2 || d > kMaxDim) throw InvalidArgument("gell_mann: dimension outside [2, 64]");
        std::vector<CMatrix> ops;
        ops.push_back(CMatrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));
        double s = 1.0 / std::sqrt(2.0);
        for (int j = 0; j < d; ++j)
            for (int k = j + 1; k < d; ++k) {
                CMatrix sym = CMatrix::Zero(d, d), asym = CMatrix::Zero(d, d);
                sym(j, k) = s;
                sym(k, j) = s;
                asym(j, k) = -kImag * s;
                asym(k, j) = kImag * s;
                ops.push_back(sym);
                ops.push_back(asym);
            }
        for (int l = 1; l < d; ++l) {
            CMatrix diag = CMatrix::Zero(d, d);
            double norm = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
            for (int j = 0; j < l; ++j) diag(j, j) = norm;
            diag(l, l) = -static_cast<double>(l) * norm;
            ops.push_back(diag);
        }
        return OperatorBasis(std::move(ops), "gell-mann");
    }

    // Hilbert-Schmidt orthonormal Hermitian default for the dimension.
    static OperatorBasis standard(int d) { return d == 2 ? pauli() : gell_mann(d); }

    // The basis operators as probe observables (valid for Hermitian bases).
    std::vector<Observable> as_observables() const {
        std::vector<Observable> probes;
        probes.reserve(operators_.size());
        for (const auto& b : operators_) probes.emplace_back(b);
        return probes;
    }

private:
    std::vector<CMatrix> operators_;
    std::string label_;
};

// a_{ji} = Tr(A_j B_i); real-valued when probes and basis are Hermitian.
inline CMatrix design_matrix(const std::vector<Observable>& probes, const OperatorBasis& basis) {
    std::size_t n = basis.size();
    if (probes.size() != n)
        throw SingularDesign("design_matrix: expected d^2 probes");
    CMatrix a(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        require_same_dim(probes[j].matrix(), basis.operators().front(), "design_matrix");
        for (std::size_t i = 0; i < n; ++i)
            a(j, i) = trace_of_product(probes[j].matrix(), basis.operators()[i]);
    }
    Eigen::JacobiSVD<CMatrix> svd(a);
    if (svd.singularValues()(svd.singularValues().size() - 1) <= 1e-10)
        throw SingularDesign("design_matrix: smallest singular value at or below 1e-10");
    return a;
}

// Probe observables together with their design matrix against a basis.
struct ProbeSet {
    std::vector<Observable> observables;
    CMatrix design;

    ProbeSet(std::vector<Observable> probes, const OperatorBasis& basis)
        : observables(std::move(probes)), design(design_matrix(observables, basis)) {}
};

struct Reconstruction {
    ConnectionState state;
    double residual_norm;    // ||a alpha - data||_2 of the linear solve
    double trace_deviation;  // |Tr w - 1| before renormalization
    bool trace_flagged;      // deviation above the noise-indicator threshold
};

inline constexpr double kTraceFlagTol = 1e-9;

// Solve a_{ji} alpha_i = (A_j)_w and assemble w = sum_i alpha_i B_i. The
// trace is renormalized to one; a deviation beyond kTraceFlagTol is flagged
// as a noise indicator. Near-singular designs are rejected, not regularized.
inline Reconstruction reconstruct_connection(const std::vector<Complex>& weak_values,
                                             const std::vector<Observable>& probes,
                                             const OperatorBasis& basis) {
    CMatrix a = design_matrix(probes, basis);
    if (weak_values.size() != static_cast<std::size_t>(a.rows()))
        throw SingularDesign("reconstruct_connection: expected d^2 weak values");
    CVector data(a.rows());
    for (Eigen::Index j = 0; j < data.size(); ++j) data(j) = weak_values[j];

    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    CVector alpha = svd.solve(data);
    double residual = (a * alpha - data).norm();

    int d = basis.dim();
    CMatrix w = CMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < alpha.size(); ++i) w += alpha(i) * basis.operators()[i];

    Complex tr = w.trace();
    if (std::abs(tr) <= kPostSelectionEps)
        throw InconsistentData("reconstruct_connection: reconstructed trace is numerically zero");
    double deviation = std::abs(tr - Complex(1.0));
    return Reconstruction{ConnectionState(w / tr), residual, deviation,
                          deviation > kTraceFlagTol};
}

// (A_j)_w plus independent complex Gaussian noise, noise_sigma per
// quadrature; deterministic for a given seed (real part drawn before
// imaginary part, probes in order).
inline std::vector<Complex> simulate_weak_value_data(const ConnectionState& w,
                                                     const std::vector<Observable>& probes,
                                                     double noise_sigma, std::uint64_t seed) {
    if (noise_sigma < 0.0)
        throw InvalidArgument("simulate_weak_value_data: negative noise sigma");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Complex> data;
    data.reserve(probes.size());
    for (const Observable& a : probes) {
        Complex value = weak_value(a, w);
        if (noise_sigma > 0.0) {
            double re = gauss(rng), im = gauss(rng);
            value += noise_sigma * Complex(re, im);
        }
        data.push_back(value);
    }
    return data;
}

struct DetectorReconstruction {
    PovmElement effect;
    Reconstruction base;
    double min_eigenvalue;
    double herm_deviation;  // ||E - E^dag|| before symmetrization
};

// Detector tomography from post-selected-only data (rho proportional to I):
// reconstruct the retrodictive state, then rescale by Tr E = P d. Data that
// is non-Hermitian or negative beyond ten noise sigmas is rejected as
// inconsistent; smaller violations are retained and reported.
inline DetectorReconstruction detector_tomography(const std::vector<Complex>& measured_weak_values,
                                                  const std::vector<Observable>& probes,
                                                  const OperatorBasis& basis,
                                                  double post_selection_prob, int d,
                                                  double noise_sigma = 0.0) {
    if (!(post_selection_prob > 0.0) || post_selection_prob > 1.0)
        throw InvalidArgument("detector_tomography: post-selection probability outside (0, 1]");
    if (noise_sigma < 0.0) throw InvalidArgument("detector_tomography: negative noise sigma");
    if (basis.dim() != d)
        throw DimensionMismatch("detector_tomography: basis dimension differs from d");

    Reconstruction rec = reconstruct_connection(measured_weak_values, probes, basis);
    CMatrix e = (post_selection_prob * d) * rec.state.w();

    double herm_dev = operator_norm(e - e.adjoint());
    double slack = 10.0 * noise_sigma;
    if (herm_dev > (kHermTol + slack) * std::max(1.0, operator_norm(e)))
        throw InconsistentData("detector_tomography: reconstruction is not Hermitian within "
                               "the noise tolerance");
    CMatrix e_sym = hermitian_part(e);
    double min_eig = detail::hermitian_eigenvalues(e_sym)(0);
    if (min_eig < -(slack + kPosTol))
        throw InconsistentData("detector_tomography: negative eigenvalue " +
                               std::to_string(min_eig) + " beyond the noise tolerance");
    return DetectorReconstruction{PovmElement(e_sym, slack + kPosTol), std::move(rec), min_eig,
                                  herm_dev};
}

}  // namespace ppslab
