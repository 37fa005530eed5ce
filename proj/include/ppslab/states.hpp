#pragma once

#include <utility>
#include <vector>

#include "ppslab/core.hpp"

namespace ppslab {

namespace detail {

inline Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw InvalidArgument("eigendecomposition failed");
    return es.eigenvalues();
}

}  // namespace detail

// Hermitian, positive semidefinite, unit-trace state.
class DensityMatrix {
public:
    explicit DensityMatrix(CMatrix matrix) : matrix_(std::move(matrix)) {
        require_square(matrix_, "DensityMatrix");
        require_dim_cap(matrix_, "DensityMatrix");
        require_hermitian(matrix_, "DensityMatrix");
        Eigen::VectorXd evals = detail::hermitian_eigenvalues(matrix_);
        if (evals(0) < -kPosTol)
            throw InvalidArgument("DensityMatrix: negative eigenvalue " +
                                  std::to_string(evals(0)));
        if (std::abs(matrix_.trace() - Complex(1.0)) > kHermTol)
            throw InvalidArgument("DensityMatrix: trace differs from one");
    }

    const CMatrix& matrix() const { return matrix_; }
    int dim() const { return static_cast<int>(matrix_.rows()); }

    static DensityMatrix pure(const CVector& ket) {
        if (ket.size() < 1) throw InvalidArgument("DensityMatrix::pure: empty ket");
        CVector psi = ket / ket.norm();
        return DensityMatrix(psi * psi.adjoint());
    }

    static DensityMatrix maximally_mixed(int d) {
        return DensityMatrix(CMatrix::Identity(d, d) / static_cast<double>(d));
    }

private:
    CMatrix matrix_;
};

// POVM effect: Hermitian, positive semidefinite, nonzero. Scalar multiples of
// normalized effects are permitted; normalized() records whether every
// eigenvalue is <= 1 (so that its trace against a state is a probability).
class PovmElement {
public:
    explicit PovmElement(CMatrix matrix, double pos_tol = kPosTol, double herm_tol = kHermTol)
        : matrix_(std::move(matrix)) {
        require_square(matrix_, "PovmElement");
        require_dim_cap(matrix_, "PovmElement");
        require_hermitian(matrix_, "PovmElement", herm_tol);
        Eigen::VectorXd evals = detail::hermitian_eigenvalues(matrix_);
        if (evals(0) < -pos_tol)
            throw InvalidArgument("PovmElement: negative eigenvalue " + std::to_string(evals(0)));
        double top = evals(evals.size() - 1);
        if (top <= pos_tol)
            throw InvalidArgument("PovmElement: zero effect");
        normalized_ = top <= 1.0 + pos_tol;
    }

    const CMatrix& matrix() const { return matrix_; }
    int dim() const { return static_cast<int>(matrix_.rows()); }
    bool normalized() const { return normalized_; }
    double trace() const { return matrix_.trace().real(); }

    static PovmElement identity(int d) { return PovmElement(CMatrix::Identity(d, d)); }

    static PovmElement projector(const CVector& ket) {
        if (ket.size() < 1) throw InvalidArgument("PovmElement::projector: empty ket");
        CVector phi = ket / ket.norm();
        return PovmElement(phi * phi.adjoint());
    }

private:
    CMatrix matrix_;
    bool normalized_ = false;
};

// Complete family of effects summing to the identity.
class Povm {
public:
    explicit Povm(std::vector<PovmElement> elements) : elements_(std::move(elements)) {
        if (elements_.empty()) throw IncompletePovm("Povm: no elements");
        int d = elements_.front().dim();
        CMatrix sum = CMatrix::Zero(d, d);
        for (const auto& e : elements_) {
            require_same_dim(e.matrix(), sum, "Povm");
            sum += e.matrix();
        }
        sum -= CMatrix::Identity(d, d);
        if (operator_norm(sum) > kHermTol)
            throw IncompletePovm("Povm: elements do not sum to the identity");
    }

    const std::vector<PovmElement>& elements() const { return elements_; }
    std::size_t size() const { return elements_.size(); }
    int dim() const { return elements_.front().dim(); }

private:
    std::vector<PovmElement> elements_;
};

}  // namespace ppslab
