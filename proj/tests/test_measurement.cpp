#include <catch2/catch_amalgamated.hpp>

#include "ppslab/measurement.hpp"
#include "test_helpers.hpp"

using namespace ppslab;
using namespace ppslab::testing;
using Catch::Approx;

TEST_CASE("born probability", "[measurement]") {
    DensityMatrix zero = DensityMatrix::pure(ket({1, 0}));
    CHECK(born_probability(zero, PovmElement::projector(ket({1, 0}))) == Approx(1.0));
    CHECK(born_probability(zero, PovmElement::projector(ket({1, 1}))) == Approx(0.5));

    Rng rng(1);
    for (int d : {2, 3, 5}) {
        PovmElement e = random_effect(d, rng);
        CHECK(born_probability(DensityMatrix::maximally_mixed(d), e) ==
              Approx(e.trace() / d).margin(1e-12));
    }

    CHECK_THROWS_AS(born_probability(zero, PovmElement(CMatrix(2.0 * CMatrix::Identity(2, 2)))),
                    UnnormalizedEffect);
}

TEST_CASE("expectation value", "[measurement]") {
    CHECK(expectation(Observable::pauli_z(), DensityMatrix::maximally_mixed(2)) ==
          Approx(0.0).margin(1e-14));

    CMatrix rho(2, 2);
    rho << 0.7, 0, 0, 0.3;
    CHECK(expectation(Observable::pauli_z(), DensityMatrix(rho)) == Approx(0.4));
    CHECK(expectation(Observable::identity(2), DensityMatrix(rho)) == Approx(1.0));

    // Spectral route agrees and the value stays inside the spectrum.
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        int d = 2 + static_cast<int>(rng() % 4);
        Observable a(random_hermitian(d, rng));
        DensityMatrix state = random_density(d, rng);
        double direct = expectation(a, state);
        double spectral = 0.0;
        for (std::size_t i = 0; i < a.spectrum_size(); ++i)
            spectral += a.eigenvalues()[i] *
                        trace_of_product(state.matrix(), a.projectors()[i]).real();
        REQUIRE(direct == Approx(spectral).margin(1e-12));
        REQUIRE(direct >= a.min_eigenvalue() - 1e-12);
        REQUIRE(direct <= a.max_eigenvalue() + 1e-12);
    }
}

TEST_CASE("projective posterior", "[measurement]") {
    CMatrix p0 = CMatrix::Zero(2, 2);
    p0(0, 0) = 1.0;

    DensityMatrix collapsed = projective_posterior(DensityMatrix::maximally_mixed(2), p0);
    CHECK(operator_norm(collapsed.matrix() - p0) < 1e-12);

    // Rank-1 outcome is independent of the initial state.
    DensityMatrix from_plus = projective_posterior(DensityMatrix::pure(ket({1, 1})), p0);
    CHECK(operator_norm(from_plus.matrix() - p0) < 1e-12);

    CMatrix rho3 = CMatrix::Zero(3, 3);
    rho3(0, 0) = 0.5;
    rho3(1, 1) = 0.3;
    rho3(2, 2) = 0.2;
    CMatrix block = CMatrix::Zero(3, 3);
    block(0, 0) = 1.0;
    block(1, 1) = 1.0;
    DensityMatrix renorm = projective_posterior(DensityMatrix(rho3), block);
    CHECK(renorm.matrix()(0, 0).real() == Approx(0.625));
    CHECK(renorm.matrix()(1, 1).real() == Approx(0.375));
    CHECK(std::abs(renorm.matrix()(2, 2)) < 1e-14);

    CHECK_THROWS_AS(projective_posterior(DensityMatrix::pure(ket({0, 1})), p0),
                    DegeneratePostSelection);
    CMatrix not_projector = 0.5 * CMatrix::Identity(2, 2);
    CHECK_THROWS_AS(projective_posterior(DensityMatrix::maximally_mixed(2), not_projector),
                    InvalidArgument);
}

TEST_CASE("minimally disturbing posterior", "[measurement]") {
    // Projector effect coincides with the projective posterior.
    Rng rng(3);
    DensityMatrix rho = random_density(2, rng);
    PovmElement proj = PovmElement::projector(ket({1, 1}));
    CHECK(operator_norm(minimally_disturbing_posterior(rho, proj).matrix() -
                        projective_posterior(rho, proj.matrix()).matrix()) < 1e-12);

    // rho proportional to I: the posterior equals the retrodictive state.
    for (int trial = 0; trial < 20; ++trial) {
        int d = 2 + static_cast<int>(rng() % 4);
        PovmElement e = random_effect(d, rng);
        DensityMatrix post =
            minimally_disturbing_posterior(DensityMatrix::maximally_mixed(d), e);
        REQUIRE(operator_norm(post.matrix() - retrodictive_state(e).w()) < 1e-10);
    }

    CMatrix rho_diag(2, 2), e_diag(2, 2);
    rho_diag << 0.7, 0, 0, 0.3;
    e_diag << 0.9, 0, 0, 0.1;
    DensityMatrix post =
        minimally_disturbing_posterior(DensityMatrix(rho_diag), PovmElement(e_diag));
    CHECK(post.matrix()(0, 0).real() == Approx(0.63 / 0.66).epsilon(1e-13));
    CHECK(post.matrix()(1, 1).real() == Approx(0.03 / 0.66).epsilon(1e-13));
}

TEST_CASE("posterior equals the connection state for commuting factors",
          "[measurement][property]") {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        int d = 2 + static_cast<int>(rng() % 5);
        auto [rho, effect] = random_commuting_pair(d, rng);
        DensityMatrix posterior = minimally_disturbing_posterior(rho, effect);
        ConnectionState w = connection_state(rho, effect);
        REQUIRE(operator_norm(posterior.matrix() - w.w()) < 1e-10);
    }
}

TEST_CASE("ABL probabilities", "[measurement]") {
    DensityMatrix zero = DensityMatrix::pure(ket({1, 0}));
    Observable sz = Observable::pauli_z();
    PovmElement plus = PovmElement::projector(ket({1, 1}));

    // |0> preselection kills the a = -1 branch; eigenvalues are ascending.
    std::vector<double> p = abl_probabilities(zero, sz, plus);
    CHECK(p[0] == Approx(0.0).margin(1e-14));
    CHECK(p[1] == Approx(1.0));

    CMatrix rho_diag(2, 2);
    rho_diag << 0.7, 0, 0, 0.3;
    std::vector<double> q = abl_probabilities(DensityMatrix(rho_diag), sz, plus);
    CHECK(q[0] == Approx(0.3));
    CHECK(q[1] == Approx(0.7));

    // E = I: unconditional Born probabilities.
    Rng rng(5);
    DensityMatrix rho = random_density(3, rng);
    Observable a(random_hermitian(3, rng));
    std::vector<double> born = abl_probabilities(rho, a, PovmElement::identity(3));
    for (std::size_t i = 0; i < born.size(); ++i)
        REQUIRE(born[i] ==
                Approx(trace_of_product(rho.matrix(), a.projectors()[i]).real()).margin(1e-12));

    // Orthogonal pre/post selection with an observable whose projectors
    // cannot rescue the overlap.
    CHECK_THROWS_AS(
        abl_probabilities(zero, sz, PovmElement::projector(ket({0, 1}))),
        DegeneratePostSelection);
}

TEST_CASE("ABL probabilities are nonnegative and normalized", "[measurement][property]") {
    Rng rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        int d = 2 + static_cast<int>(rng() % 5);
        std::vector<double> p =
            abl_probabilities(random_density(d, rng), Observable(random_hermitian(d, rng)),
                              random_effect(d, rng));
        double sum = 0.0;
        for (double v : p) {
            REQUIRE(v >= -1e-14);
            sum += v;
        }
        REQUIRE(sum == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("strong PPS probabilities via the connection state", "[measurement]") {
    // Same inputs as the diagonal ABL example.
    CMatrix rho_diag(2, 2);
    rho_diag << 0.7, 0, 0, 0.3;
    DensityMatrix rho(rho_diag);
    PovmElement plus = PovmElement::projector(ket({1, 1}));
    Observable sz = Observable::pauli_z();
    ConnectionState w = connection_state(rho, plus);
    std::vector<double> p = strong_pps_via_connection(sz, w);
    CHECK(p[0] == Approx(0.3).margin(1e-12));
    CHECK(p[1] == Approx(0.7).margin(1e-12));

    // Retrodictive state handles any observable.
    CMatrix e(2, 2);
    e << 0.9, 0, 0, 0.1;
    ConnectionState retr = retrodictive_state(PovmElement(e));
    std::vector<double> r = strong_pps_via_connection(sz, retr);
    CHECK(r[0] == Approx(0.1));
    CHECK(r[1] == Approx(0.9));
    std::vector<double> rx = strong_pps_via_connection(Observable::pauli_x(), retr);
    CHECK(rx[0] == Approx(0.5));
    CHECK(rx[1] == Approx(0.5));

    // Trivial observable.
    std::vector<double> t = strong_pps_via_connection(Observable::identity(2), w);
    REQUIRE(t.size() == 1);
    CHECK(t[0] == Approx(1.0));
}

TEST_CASE("equivalence of ABL and connection-state probabilities", "[measurement][property]") {
    Rng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        int d = 2 + static_cast<int>(rng() % 5);  // up to 6
        CommutingTriple triple = random_commuting_triple(d, rng, trial % 2 == 0);
        std::vector<double> abl = abl_probabilities(triple.rho, triple.a, triple.effect);
        ConnectionState w = connection_state(triple.rho, triple.effect);
        std::vector<double> via_w = strong_pps_via_connection(triple.a, w);
        REQUIRE(abl.size() == via_w.size());
        for (std::size_t i = 0; i < abl.size(); ++i) {
            REQUIRE(via_w[i] >= -1e-12);
            REQUIRE(std::abs(abl[i] - via_w[i]) < 1e-12);
            // Tr(Pi w) and Tr(Pi w') agree under the gate.
            double via_herm = trace_of_product(triple.a.projectors()[i], w.herm_part()).real();
            REQUIRE(std::abs(via_w[i] - via_herm) < 1e-12);
        }
    }
}

TEST_CASE("non-commuting triples break the equivalence", "[measurement][property]") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        int d = 2 + static_cast<int>(rng() % 3);
        DensityMatrix rho = random_density(d, rng);
        Observable a(random_hermitian(d, rng));
        PovmElement effect = random_effect(d, rng);
        if (commutes(a.matrix(), rho.matrix(), 1e-6) ||
            commutes(a.matrix(), effect.matrix(), 1e-6))
            continue;  // measure-zero on random draws, but stay honest
        ConnectionState w = connection_state(rho, effect);
        CHECK_THROWS_AS(strong_pps_via_connection(a, w), CommutationRequired);

        // The ungated formula visibly disagrees with the ABL rule.
        std::vector<double> abl = abl_probabilities(rho, a, effect);
        double max_gap = 0.0;
        for (std::size_t i = 0; i < abl.size(); ++i) {
            double ungated = trace_of_product(a.projectors()[i], w.herm_part()).real();
            max_gap = std::max(max_gap, std::abs(ungated - abl[i]));
        }
        REQUIRE(max_gap > 1e-6);
    }
}

TEST_CASE("spectral weak value", "[measurement]") {
    double l = 0.8;
    CMatrix id = CMatrix::Identity(2, 2);
    DensityMatrix rho(0.5 * (id + l * pauli(1)));
    PovmElement effect(0.5 * (id + l * pauli(2)));
    ConnectionState w = connection_state(rho, effect);
    CHECK(weak_value_spectral(Observable::pauli_x(), w) == Approx(0.8).epsilon(1e-12));
    CHECK(weak_value_spectral(Observable::identity(2), w) == Approx(1.0));

    CMatrix rho_diag(2, 2);
    rho_diag << 0.7, 0, 0, 0.3;
    ConnectionState w2 =
        connection_state(DensityMatrix(rho_diag), PovmElement::projector(ket({1, 1})));
    double v = weak_value_spectral(Observable::pauli_z(), w2);
    CHECK(v == Approx(0.4).margin(1e-12));
    CHECK(v == Approx(weak_value(Observable::pauli_z(), w2).real()).margin(1e-12));

    // Without stored factors the gate cannot be verified.
    ConnectionState bare(w2.w());
    CHECK_THROWS_AS(weak_value_spectral(Observable::pauli_z(), bare), CommutationRequired);
}

TEST_CASE("uncertainty violation in the 0.8 ensemble", "[measurement][property]") {
    Rng rng(9);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    CMatrix id = CMatrix::Identity(2, 2);
    Observable s1 = Observable::pauli_x();
    Observable s2 = Observable::pauli_y();
    for (int trial = 0; trial < 200; ++trial) {
        double l1 = uni(rng), l2 = uni(rng);
        DensityMatrix rho(0.5 * (id + l1 * pauli(1)));
        PovmElement effect(0.5 * (id + l2 * pauli(2)));
        ConnectionState w = connection_state(rho, effect);

        double v1 = weak_variance(s1, w);
        double v2 = weak_variance(s2, w);
        REQUIRE(v1 == Approx(1.0 - l1 * l1).margin(1e-12));
        REQUIRE(v2 == Approx(1.0 - l2 * l2).margin(1e-12));
        double sum = v1 + v2;
        REQUIRE(sum == Approx(2.0 - l1 * l1 - l2 * l2).margin(1e-12));

        double radius = std::sqrt(l1 * l1 + l2 * l2);
        Eigen::VectorXd evals = detail::hermitian_eigenvalues(w.herm_part());
        REQUIRE(evals(0) == Approx(0.5 * (1.0 - radius)).margin(1e-12));
        REQUIRE(evals(1) == Approx(0.5 * (1.0 + radius)).margin(1e-12));
        if (std::abs(l1 * l1 + l2 * l2 - 1.0) > 1e-12)
            REQUIRE((sum < 1.0) == (l1 * l1 + l2 * l2 > 1.0));
    }
}
