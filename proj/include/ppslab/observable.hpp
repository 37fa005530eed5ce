#pragma once

#include <cmath>
#include <vector>

#include "ppslab/core.hpp"

namespace ppslab {

// Hermitian operator with its spectral decomposition cached at construction.
// Eigenvalues closer than deg_tol are merged into one degenerate group whose
// projector is the sum over the group, so the stored eigenvalues are pairwise
// distinct.
class Observable {
public:
    // deg_tol < 0 selects the default 1e-8 * ||M||.
    explicit Observable(CMatrix matrix, double deg_tol = -1.0) : matrix_(std::move(matrix)) {
        require_square(matrix_, "Observable");
        require_dim_cap(matrix_, "Observable");
        require_hermitian(matrix_, "Observable");

        Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix_);
        if (es.info() != Eigen::Success)
            throw InvalidArgument("Observable: eigendecomposition failed");
        const Eigen::VectorXd& evals = es.eigenvalues();  // ascending
        const CMatrix& vecs = es.eigenvectors();

        double scale = std::max(std::abs(evals(0)), std::abs(evals(evals.size() - 1)));
        if (deg_tol < 0.0) deg_tol = kDegTolFactor * scale;

        const int d = dim();
        int group_start = 0;
        for (int i = 1; i <= d; ++i) {
            bool close = i < d && evals(i) - evals(i - 1) <= deg_tol;
            if (close) continue;
            int count = i - group_start;
            double value = evals.segment(group_start, count).mean();
            CMatrix block = vecs.middleCols(group_start, count);
            eigenvalues_.push_back(value);
            projectors_.push_back(block * block.adjoint());
            group_start = i;
        }
    }

    const CMatrix& matrix() const { return matrix_; }
    int dim() const { return static_cast<int>(matrix_.rows()); }

    // Distinct eigenvalues, ascending.
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    const std::vector<CMatrix>& projectors() const { return projectors_; }
    std::size_t spectrum_size() const { return eigenvalues_.size(); }

    double min_eigenvalue() const { return eigenvalues_.front(); }
    double max_eigenvalue() const { return eigenvalues_.back(); }

    static Observable identity(int d) { return Observable(CMatrix::Identity(d, d)); }

    static Observable pauli_x() {
        CMatrix m(2, 2);
        m << 0, 1, 1, 0;
        return Observable(m);
    }
    static Observable pauli_y() {
        CMatrix m(2, 2);
        m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
        return Observable(m);
    }
    static Observable pauli_z() {
        CMatrix m(2, 2);
        m << 1, 0, 0, -1;
        return Observable(m);
    }

private:
    CMatrix matrix_;
    std::vector<double> eigenvalues_;
    std::vector<CMatrix> projectors_;
};

inline Observable spectral_decompose(const CMatrix& m, double deg_tol) {
    return Observable(m, deg_tol);
}

// exp(-i H dt) through the eigendecomposition of H.
inline CMatrix unitary_from_hamiltonian(const CMatrix& h, double dt) {
    require_square(h, "unitary_from_hamiltonian");
    require_hermitian(h, "unitary_from_hamiltonian");
    if (!std::isfinite(dt))
        throw InvalidArgument("unitary_from_hamiltonian: non-finite time step");

    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    if (es.info() != Eigen::Success)
        throw InvalidArgument("unitary_from_hamiltonian: eigendecomposition failed");
    CVector phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(-kImag * es.eigenvalues()(i) * dt);
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace ppslab
