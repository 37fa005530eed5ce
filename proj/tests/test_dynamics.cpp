#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "ppslab/dynamics.hpp"
#include "test_helpers.hpp"

using namespace ppslab;
using namespace ppslab::testing;
using Catch::Approx;

namespace {

const double kPi = std::numbers::pi;

HamiltonianSchedule two_segment_schedule(double split = 0.7, double end = 1.5) {
    return HamiltonianSchedule({ScheduleSegment{0.0, split, pauli(1)},
                                ScheduleSegment{split, end, pauli(3)}});
}

// Midpoint-rule integration of the backward Heisenberg equation
// i dE/dt = [H(t), E] from t1 down to t; the O(dt^2) oracle for
// heisenberg_effect.
CMatrix integrate_effect_backward(const CMatrix& effect, const HamiltonianSchedule& sched,
                                  double t, double t1, double dt) {
    CMatrix e = effect;
    double tau = t1;
    auto f = [&sched](double at, const CMatrix& m) -> CMatrix {
        return -kImag * commutator(sched.hamiltonian_at(at), m);
    };
    while (tau > t + 1e-15) {
        double h = std::min(dt, tau - t);
        CMatrix k1 = f(tau, e);
        CMatrix k2 = f(tau - 0.5 * h, e - (0.5 * h) * k1);
        e -= h * k2;
        tau -= h;
    }
    return e;
}

}  // namespace

TEST_CASE("schedule validation", "[dynamics]") {
    CHECK_THROWS_AS(HamiltonianSchedule({ScheduleSegment{1.0, 0.5, pauli(3)}}), InvalidArgument);
    CHECK_THROWS_AS(HamiltonianSchedule({ScheduleSegment{0.0, 0.5, pauli(3)},
                                         ScheduleSegment{0.6, 1.0, pauli(3)}}),
                    InvalidArgument);
    CHECK_THROWS_AS(HamiltonianSchedule::constant(pauli(1) * pauli(2), 0.0, 1.0), NotHermitian);
}

TEST_CASE("propagator basics", "[dynamics]") {
    HamiltonianSchedule sched = two_segment_schedule();

    CHECK(operator_norm(propagator(sched, 0.3, 0.3) - CMatrix::Identity(2, 2)) < 1e-14);

    // Single constant segment: diag(exp(-i w dt / 2), exp(i w dt / 2)).
    double omega = 1.3, dt = 0.9;
    HamiltonianSchedule larmor = HamiltonianSchedule::constant(0.5 * omega * pauli(3), 0.0, 2.0);
    CMatrix u = propagator(larmor, 0.0, dt);
    CHECK(std::abs(u(0, 0) - std::exp(-kImag * omega * dt / 2.0)) < 1e-13);
    CHECK(std::abs(u(1, 1) - std::exp(kImag * omega * dt / 2.0)) < 1e-13);
    CHECK(std::abs(u(0, 1)) < 1e-14);

    // Two segments multiply in time order; reversing them changes the result.
    CMatrix expected = unitary_from_hamiltonian(pauli(3), 0.8) *
                       unitary_from_hamiltonian(pauli(1), 0.7);
    CHECK(operator_norm(propagator(sched, 0.0, 1.5) - expected) < 1e-12);
    CMatrix reversed = unitary_from_hamiltonian(pauli(1), 0.7) *
                       unitary_from_hamiltonian(pauli(3), 0.8);
    CHECK(operator_norm(expected - reversed) > 1e-6);

    CHECK_THROWS_AS(propagator(sched, -0.1, 1.0), OutOfScheduleRange);
    CHECK_THROWS_AS(propagator(sched, 0.0, 2.0), OutOfScheduleRange);
}

TEST_CASE("propagator composition and reversal", "[dynamics][property]") {
    HamiltonianSchedule sched = two_segment_schedule();
    Rng rng(1);
    std::uniform_real_distribution<double> uni(0.0, 1.5);
    for (int trial = 0; trial < 50; ++trial) {
        double a = uni(rng), b = uni(rng), c = uni(rng);
        CMatrix u_ab = propagator(sched, a, b);
        REQUIRE(approx_unitary(u_ab, 1e-10));
        REQUIRE(operator_norm(propagator(sched, b, a) - u_ab.adjoint()) < 1e-12);
        CMatrix through = propagator(sched, b, c) * u_ab;
        REQUIRE(operator_norm(through - propagator(sched, a, c)) < 1e-10);
    }
}

TEST_CASE("state evolution", "[dynamics]") {
    Rng rng(2);
    DensityMatrix rho = random_density(2, rng);
    CHECK(operator_norm(evolve_state(rho, CMatrix::Identity(2, 2)).matrix() - rho.matrix()) <
          1e-14);

    DensityMatrix flipped = evolve_state(DensityMatrix::pure(ket({1, 0})), pauli(1));
    CMatrix one = CMatrix::Zero(2, 2);
    one(1, 1) = 1.0;
    CHECK(operator_norm(flipped.matrix() - one) < 1e-14);

    for (int trial = 0; trial < 30; ++trial) {
        int d = 2 + static_cast<int>(rng() % 4);
        DensityMatrix state = random_density(d, rng);
        CMatrix u = random_unitary(d, rng);
        Eigen::VectorXd before = detail::hermitian_eigenvalues(state.matrix());
        Eigen::VectorXd after = detail::hermitian_eigenvalues(evolve_state(state, u).matrix());
        REQUIRE((before - after).cwiseAbs().maxCoeff() < 1e-12);
    }

    CHECK_THROWS_AS(evolve_state(rho, CMatrix(2.0 * CMatrix::Identity(2, 2))), NotUnitary);
}

TEST_CASE("heisenberg effect", "[dynamics]") {
    PovmElement plus = PovmElement::projector(ket({1, 1}));
    CHECK(operator_norm(heisenberg_effect(plus, CMatrix::Identity(2, 2)).matrix() -
                        plus.matrix()) < 1e-14);

    Rng rng(3);
    CMatrix u = random_unitary(3, rng);
    CHECK(operator_norm(heisenberg_effect(PovmElement::identity(3), u).matrix() -
                        CMatrix::Identity(3, 3)) < 1e-12);

    // H = sigma_3 over t1 - t = pi/2: U = diag(-i, i) turns |+><+| into |-><-|.
    CMatrix u_z = unitary_from_hamiltonian(pauli(3), kPi / 2);
    PovmElement rotated = heisenberg_effect(plus, u_z);
    CMatrix minus(2, 2);
    minus << 0.5, -0.5, -0.5, 0.5;
    CHECK(operator_norm(rotated.matrix() - minus) < 1e-12);

    // Finite-difference integration of the backward equation agrees to O(dt^2).
    HamiltonianSchedule sched = HamiltonianSchedule::constant(pauli(3), 0.0, kPi / 2);
    CMatrix ode = integrate_effect_backward(plus.matrix(), sched, 0.0, kPi / 2, 1e-3);
    CHECK(operator_norm(ode - rotated.matrix()) < 5e-6);
}

TEST_CASE("time-dependent connection state", "[dynamics]") {
    Rng rng(4);

    SECTION("free case is static") {
        HamiltonianSchedule flat = HamiltonianSchedule::constant(CMatrix::Zero(2, 2), 0.0, 1.0);
        DensityMatrix rho = random_density(2, rng);
        PovmElement effect = random_effect(2, rng);
        ConnectionState fixed = connection_state(rho, effect);
        for (double t : {0.0, 0.25, 0.8, 1.0}) {
            ConnectionState w = connection_state_at(rho, effect, flat, 0.0, t, 1.0);
            REQUIRE(operator_norm(w.w() - fixed.w()) < 1e-12);
        }
    }

    SECTION("pure-state form of w(t)") {
        double omega = 0.9;
        HamiltonianSchedule sched =
            HamiltonianSchedule::constant(0.5 * omega * pauli(3), 0.0, 2.0);
        CVector psi = ket({1, 0});
        CVector phi = ket({1, 1}) / std::sqrt(2.0);
        DensityMatrix rho = DensityMatrix::pure(psi);
        PovmElement effect = PovmElement::projector(phi);
        for (double t : {0.0, 0.5, 1.3, 2.0}) {
            CMatrix u_t = propagator(sched, 0.0, t);
            CMatrix u_post = propagator(sched, t, 2.0);
            Complex denom = (phi.adjoint() * propagator(sched, 0.0, 2.0) * psi)(0);
            CMatrix direct = (u_t * psi) * (phi.adjoint() * u_post) / denom;
            ConnectionState w = connection_state_at(rho, effect, sched, 0.0, t, 2.0);
            REQUIRE(operator_norm(w.w() - direct) < 1e-12);
        }
    }

    SECTION("final condition at t = t1") {
        HamiltonianSchedule sched = two_segment_schedule();
        DensityMatrix rho = random_density(2, rng);
        PovmElement effect = random_effect(2, rng);
        ConnectionState w_end = connection_state_at(rho, effect, sched, 0.0, 1.5, 1.5);
        DensityMatrix rho_end = evolve_state(rho, propagator(sched, 0.0, 1.5));
        ConnectionState direct = connection_state(rho_end, effect);
        REQUIRE(operator_norm(w_end.w() - direct.w()) < 1e-12);
    }
}

TEST_CASE("post-selection probability is time-independent", "[dynamics][property]") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        int d = 2 + static_cast<int>(rng() % 3);
        HamiltonianSchedule sched =
            HamiltonianSchedule({ScheduleSegment{0.0, 0.6, random_hermitian(d, rng)},
                                 ScheduleSegment{0.6, 1.4, random_hermitian(d, rng)}});
        DensityMatrix rho = random_density(d, rng);
        PovmElement effect = random_effect(d, rng);

        CMatrix u_full = propagator(sched, 0.0, 1.4);
        double p_forward =
            trace_of_product(rho.matrix(), u_full.adjoint() * effect.matrix() * u_full).real();
        double p_backward =
            trace_of_product(u_full * rho.matrix() * u_full.adjoint(), effect.matrix()).real();
        REQUIRE(std::abs(p_forward - p_backward) < 1e-12);

        for (int k = 0; k < 50; ++k) {
            double t = 1.4 * k / 49.0;
            ConnectionState w = connection_state_at(rho, effect, sched, 0.0, t, 1.4);
            REQUIRE(std::abs(w.post_selection_prob().value() - p_forward) < 1e-12);
        }
    }
}

TEST_CASE("symmetric form of the time-dependent state", "[dynamics][property]") {
    Rng rng(6);
    HamiltonianSchedule sched = two_segment_schedule();
    for (int trial = 0; trial < 20; ++trial) {
        DensityMatrix rho = random_density(2, rng);
        PovmElement effect = random_effect(2, rng);
        double t = 1.5 * (rng() % 1000) / 999.0;

        ConnectionState direct = connection_state_at(rho, effect, sched, 0.0, t, 1.5);
        DensityMatrix rho_t = evolve_state(rho, propagator(sched, 0.0, t));
        ConnectionState retr = retrodictive_at(effect, sched, t, 1.5);
        ConnectionState symmetric =
            connection_from_pred_retr(rho_t, DensityMatrix(retr.w()));
        REQUIRE(operator_norm(direct.w() - symmetric.w()) < 1e-12);

        // P' = P / Tr E lies in (0, 1].
        double p_prime = symmetric.post_selection_prob().value();
        REQUIRE(std::abs(p_prime - direct.post_selection_prob().value() / effect.trace()) <
                1e-12);
        REQUIRE(p_prime > 0.0);
        REQUIRE(p_prime <= 1.0 + 1e-12);
    }
}

TEST_CASE("von Neumann integration", "[dynamics]") {
    SECTION("free evolution is constant") {
        HamiltonianSchedule flat = HamiltonianSchedule::constant(CMatrix::Zero(2, 2), 0.0, 1.0);
        Rng rng(7);
        ConnectionState w0 = connection_state(random_density(2, rng), random_effect(2, rng));
        auto traj = evolve_connection_ode(w0, flat, 0.0, 1.0, 0.05);
        for (const auto& point : traj)
            REQUIRE(operator_norm(point.state.w() - w0.w()) < 1e-13);
    }

    SECTION("fourth-order convergence and trace preservation") {
        HamiltonianSchedule sched = HamiltonianSchedule::constant(pauli(3), 0.0, 1.0);
        ConnectionState w0 = connection_state(DensityMatrix::pure(ket({1, 0})),
                                              PovmElement::projector(ket({1, 1})));
        // The exact flow is unitary conjugation by the propagator.
        CMatrix u = propagator(sched, 0.0, 1.0);
        CMatrix exact = u * w0.w() * u.adjoint();

        auto error_at = [&](double dt) {
            auto traj = evolve_connection_ode(w0, sched, 0.0, 1.0, dt);
            for (const auto& point : traj)
                REQUIRE(std::abs(point.state.w().trace() - Complex(1.0)) < 1e-10);
            return operator_norm(traj.back().state.w() - exact);
        };
        double coarse = error_at(0.05);
        double fine = error_at(0.025);
        double ratio = coarse / fine;
        CHECK(coarse < 1e-4);
        CHECK(ratio > 12.0);
        CHECK(ratio < 20.0);
    }

    SECTION("backward integration returns to the initial state") {
        HamiltonianSchedule sched = two_segment_schedule(0.75, 1.5);  // boundary on the grid
        Rng rng(8);
        DensityMatrix rho = random_density(2, rng);
        PovmElement effect = random_effect(2, rng);
        ConnectionState w0 = connection_state_at(rho, effect, sched, 0.0, 0.0, 1.5);
        ConnectionState w1 = connection_state_at(rho, effect, sched, 0.0, 1.5, 1.5);
        double dt = 0.0125;
        auto back = evolve_connection_ode(w1, sched, 1.5, 0.0, dt);
        double err = operator_norm(back.back().state.w() - w0.w());
        REQUIRE(err < 50.0 * dt * dt * dt * dt);
    }
}

TEST_CASE("picture independence of weak values", "[dynamics][property]") {
    SECTION("free evolution") {
        HamiltonianSchedule flat = HamiltonianSchedule::constant(CMatrix::Zero(2, 2), 0.0, 1.0);
        Rng rng(9);
        DensityMatrix rho = random_density(2, rng);
        PovmElement effect = random_effect(2, rng);
        Observable a(random_hermitian(2, rng));
        Complex expected = weak_value(a, connection_state(rho, effect));
        for (const Picture& pic : {Picture::schroedinger(), Picture::forward_heisenberg(),
                                   Picture::backward_heisenberg(), Picture::heisenberg_at(0.3)})
            REQUIRE(std::abs(weak_value_in_picture(a, rho, effect, flat, 0.5, pic) - expected) <
                    1e-12);
    }

    SECTION("Larmor precession sampled over the window") {
        double omega = 1.1;
        HamiltonianSchedule sched =
            HamiltonianSchedule::constant(0.5 * omega * pauli(3), 0.0, 2.0);
        DensityMatrix rho = DensityMatrix::pure(ket({1, 0}));
        PovmElement effect = PovmElement::projector(ket({1, 1}));
        Observable a = Observable::pauli_x();
        for (int k = 0; k < 20; ++k) {
            double t = 2.0 * k / 19.0;
            Complex s = weak_value_in_picture(a, rho, effect, sched, t, Picture::schroedinger());
            Complex f =
                weak_value_in_picture(a, rho, effect, sched, t, Picture::forward_heisenberg());
            Complex b =
                weak_value_in_picture(a, rho, effect, sched, t, Picture::backward_heisenberg());
            Complex h =
                weak_value_in_picture(a, rho, effect, sched, t, Picture::heisenberg_at(1.0));
            REQUIRE(std::abs(s - f) < 1e-12);
            REQUIRE(std::abs(s - b) < 1e-12);
            REQUIRE(std::abs(s - h) < 1e-12);
        }
    }

    SECTION("conserved observable sees the final state") {
        HamiltonianSchedule sched = HamiltonianSchedule::constant(pauli(3), 0.0, 1.7);
        Rng rng(10);
        DensityMatrix rho = random_density(2, rng);
        PovmElement effect = random_effect(2, rng);
        Observable a = Observable::pauli_z();  // [A, H] = 0
        DensityMatrix rho_end = evolve_state(rho, propagator(sched, 0.0, 1.7));
        Complex expected = weak_value(a, connection_state(rho_end, effect));
        for (double t : {0.0, 0.4, 1.0, 1.7}) {
            Complex v =
                weak_value_in_picture(a, rho, effect, sched, t, Picture::schroedinger());
            REQUIRE(std::abs(v - expected) < 1e-12);
        }
    }
}

TEST_CASE("time-dependent retrodictive state", "[dynamics]") {
    Rng rng(11);
    PovmElement effect = random_effect(2, rng);

    HamiltonianSchedule flat = HamiltonianSchedule::constant(CMatrix::Zero(2, 2), 0.0, 1.0);
    ConnectionState static_retr = retrodictive_state(effect);
    for (double t : {0.0, 0.5, 1.0}) {
        ConnectionState w = retrodictive_at(effect, flat, t, 1.0);
        REQUIRE(operator_norm(w.w() - static_retr.w()) < 1e-13);
    }

    HamiltonianSchedule sched = HamiltonianSchedule::constant(pauli(1), 0.0, kPi / 4);
    ConnectionState uniform = retrodictive_at(PovmElement::identity(2), sched, 0.1, kPi / 4);
    CHECK(operator_norm(uniform.w() - 0.5 * CMatrix::Identity(2, 2)) < 1e-13);

    // Construction cross-check against heisenberg_effect.
    PovmElement zero_proj = PovmElement::projector(ket({1, 0}));
    ConnectionState rotated = retrodictive_at(zero_proj, sched, 0.0, kPi / 4);
    CMatrix u = propagator(sched, 0.0, kPi / 4);
    PovmElement expected = heisenberg_effect(zero_proj, u);
    CHECK(operator_norm(rotated.w() - expected.matrix()) < 1e-12);
    CHECK(classify(rotated).kind == StateClass::Usual);

    // Final condition.
    ConnectionState at_end = retrodictive_at(zero_proj, sched, kPi / 4, kPi / 4);
    CHECK(operator_norm(at_end.w() - zero_proj.matrix()) < 1e-13);
}
