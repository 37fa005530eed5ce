#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ppslab/core.hpp"
#include "ppslab/observable.hpp"
#include "ppslab/states.hpp"

namespace ppslab {

// Connection state w = rho E / Tr(rho E): the trace-one, generally
// non-Hermitian operator that plays the role of a density matrix for pre- and
// post-selected ensembles. The Hermitian part w' and anti-Hermitian part w''
// (w = w' + i w'') are cached; they carry the real and imaginary parts of
// every weak value.
class ConnectionState {
public:
    // `w` must have unit trace. `factors` optionally retains the (rho, E)
    // pair the state was built from; strong-measurement formulas use it to
    // verify their commutation gate. States from reconstruction or numerical
    // integration carry no factors.
    explicit ConnectionState(CMatrix w,
                             std::optional<double> post_selection_prob = std::nullopt,
                             bool effect_normalized = true,
                             std::optional<std::pair<CMatrix, CMatrix>> factors = std::nullopt)
        : w_(std::move(w)),
          post_selection_prob_(post_selection_prob),
          effect_normalized_(effect_normalized),
          factors_(std::move(factors)) {
        require_square(w_, "ConnectionState");
        require_dim_cap(w_, "ConnectionState");
        if (std::abs(w_.trace() - Complex(1.0)) > kHermTol)
            throw InvalidArgument("ConnectionState: trace differs from one by more than 1e-10");
        herm_ = hermitian_part(w_);
        antiherm_ = antihermitian_part(w_);
    }

    const CMatrix& w() const { return w_; }
    const CMatrix& herm_part() const { return herm_; }
    const CMatrix& antiherm_part() const { return antiherm_; }
    int dim() const { return static_cast<int>(w_.rows()); }

    // Raw trace Tr(rho E); a probability in (0, 1] when both factors were
    // normalized. Absent for states not built from a (rho, E) pair.
    std::optional<double> post_selection_prob() const { return post_selection_prob_; }
    bool effect_normalized() const { return effect_normalized_; }

    bool has_factors() const { return factors_.has_value(); }
    const CMatrix& rho_factor() const {
        if (!factors_) throw InvalidArgument("ConnectionState: no stored factors");
        return factors_->first;
    }
    const CMatrix& effect_factor() const {
        if (!factors_) throw InvalidArgument("ConnectionState: no stored factors");
        return factors_->second;
    }

private:
    CMatrix w_;
    CMatrix herm_;
    CMatrix antiherm_;
    std::optional<double> post_selection_prob_;
    bool effect_normalized_ = true;
    std::optional<std::pair<CMatrix, CMatrix>> factors_;
};

namespace detail {

inline ConnectionState make_connection(const CMatrix& rho, const CMatrix& effect,
                                       bool effect_normalized, const std::string& what) {
    require_same_dim(rho, effect, what);
    CMatrix product = rho * effect;
    Complex tr = product.trace();
    if (std::abs(tr.imag()) > 1e-12 * std::max(1.0, std::abs(tr)))
        throw InvalidArgument(what + ": Tr(rho E) has a non-negligible imaginary part");
    if (tr.real() <= kPostSelectionEps)
        throw DegeneratePostSelection(what + ": Tr(rho E) = " + std::to_string(tr.real()) +
                                      " is at or below the cutoff " +
                                      std::to_string(kPostSelectionEps));
    return ConnectionState(product / tr, tr.real(), effect_normalized,
                           std::make_pair(rho, effect));
}

}  // namespace detail

inline ConnectionState connection_state(const DensityMatrix& rho, const PovmElement& effect) {
    return detail::make_connection(rho.matrix(), effect.matrix(), effect.normalized(),
                                   "connection_state");
}

// A_w = Tr(A w). Re A_w = Tr(A w'), Im A_w = Tr(A w'').
inline Complex weak_value(const Observable& a, const ConnectionState& w) {
    require_same_dim(a.matrix(), w.w(), "weak_value");
    return trace_of_product(a.matrix(), w.w());
}

enum class StateClass { Usual, Unusual };

// Usual iff w is Hermitian positive within tolerance; equivalently iff the
// factors rho and E commute. The measured margins are reported alongside the
// label since the dichotomy is exact only in exact arithmetic.
struct Classification {
    StateClass kind;
    double antiherm_norm;        // ||w''||
    double herm_min_eigenvalue;  // min eig of w'
};

inline Classification classify(const ConnectionState& w, double tau = kHermTol) {
    Classification c{};
    c.antiherm_norm = operator_norm(w.antiherm_part());
    c.herm_min_eigenvalue = detail::hermitian_eigenvalues(w.herm_part())(0);
    bool usual = c.antiherm_norm <= tau && c.herm_min_eigenvalue >= -tau;
    c.kind = usual ? StateClass::Usual : StateClass::Unusual;
    return c;
}

// c' + c'' >= ||w||, with c' = ||w'|| and c'' = ||w''||.
struct NormBound {
    double c_prime;
    double c_doubleprime;
    double w_norm;
    bool holds;
};

inline NormBound norm_bound_check(const ConnectionState& w) {
    NormBound b{};
    b.c_prime = operator_norm(w.herm_part());
    b.c_doubleprime = operator_norm(w.antiherm_part());
    b.w_norm = operator_norm(w.w());
    b.holds = b.c_prime + b.c_doubleprime >= b.w_norm - 1e-12;
    return b;
}

// Posterior family {P_l, w_l} of a complete measurement: P_l = Tr(rho E_l),
// w_l = rho E_l / P_l. Outcomes with numerically zero probability are
// excluded (their indices recorded); probs/states cover the included
// outcomes, in POVM order.
struct PosteriorFamily {
    std::vector<double> probs;
    std::vector<ConnectionState> states;
    std::vector<std::size_t> excluded;
};

inline PosteriorFamily posterior_family(const DensityMatrix& rho, const Povm& povm) {
    if (rho.dim() != povm.dim())
        throw DimensionMismatch("posterior_family: state and POVM dimensions differ");
    PosteriorFamily fam;
    for (std::size_t l = 0; l < povm.size(); ++l) {
        const PovmElement& e = povm.elements()[l];
        double p = trace_of_product(rho.matrix(), e.matrix()).real();
        if (p <= kExactZeroTol) {
            fam.excluded.push_back(l);
            continue;
        }
        if (p <= kPostSelectionEps)
            throw DegeneratePostSelection("posterior_family: outcome " + std::to_string(l) +
                                          " has probability " + std::to_string(p) +
                                          " inside (0, eps]");
        fam.probs.push_back(p);
        fam.states.push_back(connection_state(rho, e));
    }
    return fam;
}

// E / Tr E: the connection state of a completely random preparation. Always
// usual; describes post-selected-only measurements of any strength.
inline ConnectionState retrodictive_state(const PovmElement& effect) {
    double tr = effect.trace();
    if (tr <= kPostSelectionEps)
        throw DegeneratePostSelection("retrodictive_state: Tr E at or below cutoff");
    int d = effect.dim();
    CMatrix rho = CMatrix::Identity(d, d) / static_cast<double>(d);
    return ConnectionState(effect.matrix() / tr, tr / d, effect.normalized(),
                           std::make_pair(rho, effect.matrix()));
}

// Symmetric form w = rho_pred rho_retr / Tr(rho_pred rho_retr).
inline ConnectionState connection_from_pred_retr(const DensityMatrix& pred,
                                                 const DensityMatrix& retr) {
    return detail::make_connection(pred.matrix(), retr.matrix(), true,
                                   "connection_from_pred_retr");
}

// Classical measurement model: prior p_i over values, conditional outcome
// table e_{i,l}. The commuting-case oracle for connection states.
struct ClassicalEnsemble {
    std::vector<double> prior;                 // p_i, nonnegative, sums to 1
    std::vector<std::vector<double>> conditional;  // rows i, columns l, in [0, 1]

    ClassicalEnsemble(std::vector<double> p, std::vector<std::vector<double>> e)
        : prior(std::move(p)), conditional(std::move(e)) {
        if (prior.empty() || conditional.size() != prior.size())
            throw InvalidArgument("ClassicalEnsemble: table rows must match the prior length");
        double sum = 0.0;
        for (double v : prior) {
            if (v < 0.0) throw InvalidArgument("ClassicalEnsemble: negative prior entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw InvalidArgument("ClassicalEnsemble: prior does not sum to one");
        std::size_t cols = conditional.front().size();
        for (const auto& row : conditional) {
            if (row.size() != cols || cols == 0)
                throw InvalidArgument("ClassicalEnsemble: ragged conditional table");
            for (double v : row)
                if (v < 0.0 || v > 1.0)
                    throw InvalidArgument("ClassicalEnsemble: conditional entry outside [0, 1]");
        }
    }

    std::size_t outcomes() const { return conditional.front().size(); }
};

struct ClassicalPosterior {
    double outcome_prob;            // P_l
    std::vector<double> posterior;  // P_{i|l}
};

// Bayes: P_l = sum_i p_i e_{i,l}; P_{i|l} = p_i e_{i,l} / P_l.
inline ClassicalPosterior classical_posterior(const ClassicalEnsemble& ens, std::size_t outcome) {
    if (outcome >= ens.outcomes())
        throw InvalidArgument("classical_posterior: outcome column out of range");
    ClassicalPosterior result{};
    for (std::size_t i = 0; i < ens.prior.size(); ++i)
        result.outcome_prob += ens.prior[i] * ens.conditional[i][outcome];
    if (result.outcome_prob <= kPostSelectionEps)
        throw ZeroProbabilityOutcome("classical_posterior: outcome probability at or below cutoff");
    result.posterior.resize(ens.prior.size());
    for (std::size_t i = 0; i < ens.prior.size(); ++i)
        result.posterior[i] = ens.prior[i] * ens.conditional[i][outcome] / result.outcome_prob;
    return result;
}

}  // namespace ppslab
