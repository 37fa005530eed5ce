#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "ppslab/connection.hpp"
#include "ppslab/core.hpp"
#include "ppslab/observable.hpp"
#include "ppslab/states.hpp"

namespace ppslab {

struct ScheduleSegment {
    double t_start;
    double t_end;
    CMatrix h;  // Hermitian generator, angular-frequency units
};

// Piecewise-constant H(t) over [t0, t1], contiguous with no gaps or overlaps.
// The time-ordered propagator is then an exact finite product of segment
// exponentials.
class HamiltonianSchedule {
public:
    explicit HamiltonianSchedule(std::vector<ScheduleSegment> segments)
        : segments_(std::move(segments)) {
        if (segments_.empty())
            throw InvalidArgument("HamiltonianSchedule: no segments");
        for (std::size_t k = 0; k < segments_.size(); ++k) {
            const auto& seg = segments_[k];
            require_square(seg.h, "HamiltonianSchedule");
            require_dim_cap(seg.h, "HamiltonianSchedule");
            require_hermitian(seg.h, "HamiltonianSchedule");
            require_same_dim(seg.h, segments_.front().h, "HamiltonianSchedule");
            if (!(seg.t_start < seg.t_end))
                throw InvalidArgument("HamiltonianSchedule: segment " + std::to_string(k) +
                                      " has t_start >= t_end");
            if (k > 0 && std::abs(seg.t_start - segments_[k - 1].t_end) >
                             1e-12 * std::max(1.0, std::abs(seg.t_start)))
                throw InvalidArgument("HamiltonianSchedule: gap or overlap before segment " +
                                      std::to_string(k));
        }
    }

    static HamiltonianSchedule constant(const CMatrix& h, double t0, double t1) {
        return HamiltonianSchedule({ScheduleSegment{t0, t1, h}});
    }

    const std::vector<ScheduleSegment>& segments() const { return segments_; }
    double t0() const { return segments_.front().t_start; }
    double t1() const { return segments_.back().t_end; }
    int dim() const { return static_cast<int>(segments_.front().h.rows()); }

    bool contains(double t) const { return t >= t0() - slack() && t <= t1() + slack(); }

    // Right-continuous lookup; the final instant maps to the last segment.
    const CMatrix& hamiltonian_at(double t) const {
        require_in_range(t, "hamiltonian_at");
        for (const auto& seg : segments_)
            if (t < seg.t_end) return seg.h;
        return segments_.back().h;
    }

    void require_in_range(double t, const std::string& what) const {
        if (!std::isfinite(t) || !contains(t))
            throw OutOfScheduleRange(what + ": time " + std::to_string(t) +
                                     " outside schedule range [" + std::to_string(t0()) + ", " +
                                     std::to_string(t1()) + "]");
    }

private:
    double slack() const { return 1e-12 * std::max(1.0, std::max(std::abs(t0()), std::abs(t1()))); }

    std::vector<ScheduleSegment> segments_;
};

// U(to, from): time-ordered product of per-segment exponentials
// exp(-i H_k dt_k), later segments on the left. Reversed arguments give the
// adjoint, so propagator(s, a, b) always transports states from time a to
// time b.
inline CMatrix propagator(const HamiltonianSchedule& sched, double from, double to) {
    sched.require_in_range(from, "propagator");
    sched.require_in_range(to, "propagator");
    if (from > to) return propagator(sched, to, from).adjoint();
    CMatrix u = CMatrix::Identity(sched.dim(), sched.dim());
    for (const auto& seg : sched.segments()) {
        double lo = std::max(from, seg.t_start);
        double hi = std::min(to, seg.t_end);
        if (hi - lo <= 0.0) continue;
        u = unitary_from_hamiltonian(seg.h, hi - lo) * u;
    }
    return u;
}

// rho -> U rho U^dag.
inline DensityMatrix evolve_state(const DensityMatrix& rho, const CMatrix& u) {
    require_same_dim(rho.matrix(), u, "evolve_state");
    require_unitary(u, "evolve_state");
    return DensityMatrix(u * rho.matrix() * u.adjoint());
}

// E -> U^dag E U: the effect in the Heisenberg picture with respect to the
// start of the evolution U describes.
inline PovmElement heisenberg_effect(const PovmElement& effect, const CMatrix& u) {
    require_same_dim(effect.matrix(), u, "heisenberg_effect");
    require_unitary(u, "heisenberg_effect");
    return PovmElement(u.adjoint() * effect.matrix() * u);
}

// Time-dependent connection state
//   w(t) = rho(t) E(t1, t) / P,  P = Tr[rho(t) E(t1, t)],
// with rho prepared at t0 and the post-selection effect E applied at t1. The
// normalization P is independent of t.
inline ConnectionState connection_state_at(const DensityMatrix& rho, const PovmElement& effect,
                                           const HamiltonianSchedule& sched, double t0, double t,
                                           double t1) {
    if (!(t0 <= t && t <= t1))
        throw OutOfScheduleRange("connection_state_at: need t0 <= t <= t1");
    CMatrix u_prep = propagator(sched, t0, t);     // U(t, t0)
    CMatrix u_post = propagator(sched, t, t1);     // U(t1, t)
    CMatrix rho_t = u_prep * rho.matrix() * u_prep.adjoint();
    CMatrix effect_t = u_post.adjoint() * effect.matrix() * u_post;
    return detail::make_connection(rho_t, effect_t, effect.normalized(), "connection_state_at");
}

struct ConnectionTrajectoryPoint {
    double t;
    ConnectionState state;
};

// Classical fixed-step RK4 integration of the von Neumann equation
//   dw/dt = -i [H(t), w]
// from t_from to t_to (either direction). H is piecewise constant, so each
// step uses the generator at its own midpoint; for steps that do not straddle
// a segment boundary this is exact sampling and the endpoint matches the
// exact conjugation within O(dt^4). The commutator is traceless, so the
// integrator preserves Tr w to rounding.
inline std::vector<ConnectionTrajectoryPoint> evolve_connection_ode(const ConnectionState& w0,
                                                                    const HamiltonianSchedule& sched,
                                                                    double t_from, double t_to,
                                                                    double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw InvalidArgument("evolve_connection_ode: dt must be positive");
    sched.require_in_range(t_from, "evolve_connection_ode");
    sched.require_in_range(t_to, "evolve_connection_ode");
    if (sched.dim() != w0.dim())
        throw DimensionMismatch("evolve_connection_ode: schedule and state dimensions differ");

    double span = t_to - t_from;
    std::size_t steps = span == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(std::abs(span) / dt));
    std::vector<ConnectionTrajectoryPoint> traj;
    traj.reserve(steps + 1);
    traj.push_back({t_from, ConnectionState(w0.w(), w0.post_selection_prob(),
                                            w0.effect_normalized())});

    CMatrix w = w0.w();
    double t = t_from;
    for (std::size_t k = 0; k < steps; ++k) {
        double remaining = t_to - t;
        double h = std::copysign(std::min(dt, std::abs(remaining)), remaining);
        const CMatrix& gen = sched.hamiltonian_at(t + 0.5 * h);
        auto rhs = [&gen](const CMatrix& m) -> CMatrix { return -kImag * commutator(gen, m); };
        CMatrix k1 = rhs(w);
        CMatrix k2 = rhs(w + (0.5 * h) * k1);
        CMatrix k3 = rhs(w + (0.5 * h) * k2);
        CMatrix k4 = rhs(w + h * k3);
        w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = (k + 1 == steps) ? t_to : t + h;
        traj.push_back({t, ConnectionState(w, w0.post_selection_prob(),
                                           w0.effect_normalized())});
    }
    return traj;
}

// Representation used to evaluate a weak value at the measurement time t.
struct Picture {
    enum class Kind { Schroedinger, HeisenbergAt, ForwardHeisenberg, BackwardHeisenberg };

    Kind kind = Kind::Schroedinger;
    double t_ref = 0.0;  // reference time, HeisenbergAt only

    static Picture schroedinger() { return {Kind::Schroedinger, 0.0}; }
    static Picture heisenberg_at(double t_ref) { return {Kind::HeisenbergAt, t_ref}; }
    static Picture forward_heisenberg() { return {Kind::ForwardHeisenberg, 0.0}; }
    static Picture backward_heisenberg() { return {Kind::BackwardHeisenberg, 0.0}; }
};

// A_w = Tr[A w(t)] evaluated in the requested picture; every picture returns
// the same value for the same physical configuration. Preparation is at
// sched.t0(), post-selection at sched.t1().
inline Complex weak_value_in_picture(const Observable& a, const DensityMatrix& rho,
                                     const PovmElement& effect, const HamiltonianSchedule& sched,
                                     double t, const Picture& picture) {
    double t0 = sched.t0();
    double t1 = sched.t1();
    if (!(t0 <= t && t <= t1))
        throw OutOfScheduleRange("weak_value_in_picture: need t0 <= t <= t1");

    double t_ref = 0.0;
    switch (picture.kind) {
        case Picture::Kind::Schroedinger: {
            ConnectionState w = connection_state_at(rho, effect, sched, t0, t, t1);
            return trace_of_product(a.matrix(), w.w());
        }
        case Picture::Kind::HeisenbergAt:
            t_ref = picture.t_ref;
            if (!(t0 <= t_ref && t_ref <= t1))
                throw OutOfScheduleRange("weak_value_in_picture: reference time outside [t0, t1]");
            break;
        case Picture::Kind::ForwardHeisenberg:
            t_ref = t0;
            break;
        case Picture::Kind::BackwardHeisenberg:
            t_ref = t1;
            break;
    }

    // Heisenberg picture with respect to t_ref: the observable carries the
    // evolution between t_ref and t, while rho and E are fixed at t_ref.
    CMatrix u_obs = propagator(sched, t_ref, t);  // U(t, t_ref)
    CMatrix a_moved = u_obs.adjoint() * a.matrix() * u_obs;
    CMatrix u_prep = propagator(sched, t0, t_ref);
    CMatrix rho_ref = u_prep * rho.matrix() * u_prep.adjoint();
    CMatrix u_post = propagator(sched, t_ref, t1);
    CMatrix effect_ref = u_post.adjoint() * effect.matrix() * u_post;
    Complex p = (rho_ref * effect_ref).trace();
    if (p.real() <= kPostSelectionEps)
        throw DegeneratePostSelection("weak_value_in_picture: post-selection trace at cutoff");
    return (a_moved * rho_ref * effect_ref).trace() / p;
}

// E(t1, t) / Tr E: time-dependent retrodictive state, with the final
// condition rho_retr(t1) = E / Tr E.
inline ConnectionState retrodictive_at(const PovmElement& effect, const HamiltonianSchedule& sched,
                                       double t, double t1) {
    if (!(t <= t1)) throw OutOfScheduleRange("retrodictive_at: need t <= t1");
    double tr = effect.trace();
    if (tr <= kPostSelectionEps)
        throw DegeneratePostSelection("retrodictive_at: Tr E at or below cutoff");
    CMatrix u_post = propagator(sched, t, t1);  // U(t1, t)
    CMatrix effect_t = u_post.adjoint() * effect.matrix() * u_post;
    int d = effect.dim();
    CMatrix rho = CMatrix::Identity(d, d) / static_cast<double>(d);
    return ConnectionState(effect_t / tr, tr / d, effect.normalized(),
                           std::make_pair(rho, effect_t));
}

}  // namespace ppslab
