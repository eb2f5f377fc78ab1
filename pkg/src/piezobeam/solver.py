"""Method-of-lines discretization of the coupled beam system with delayed damping.

Spatial layout: uniform grid on [0, L], Dirichlet at x=0 for both fields,
zero-slope (Neumann) closure at x=L.  The delayed velocity v_t(x, t - tau(t))
is realized by a time-stamped history ring buffer with linear interpolation,
not by discretizing the auxiliary transport variable on a second axis.

Two integrators: an explicit central-difference (velocity-Verlet style) scheme
with semi-implicit treatment of the instantaneous damping, and a backward-Euler
resolvent step that is implicit in the stiff wave part and explicit in the
delay.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import (
    ConfigError,
    DivergenceError,
    GridError,
    HistoryUnderrunError,
    ProfileEvaluationError,
)


@dataclass(frozen=True)
class Grid:
    """Uniform spatial grid with x_0 = 0 and x_{n-1} = L."""

    n: int
    length: float

    def __post_init__(self):
        if self.n < 3:
            raise GridError(f"grid needs at least 3 nodes, got n={self.n}")
        if not self.length > 0:
            raise GridError("grid length must be > 0")

    @property
    def dx(self):
        return self.length / (self.n - 1)

    @property
    def x(self):
        return np.linspace(0.0, self.length, self.n)


@dataclass
class SimState:
    """Displacement and velocity fields at time t."""

    t: float
    v: np.ndarray
    vt: np.ndarray
    p: np.ndarray
    pt: np.ndarray

    def copy(self):
        return SimState(self.t, self.v.copy(), self.vt.copy(),
                        self.p.copy(), self.pt.copy())

    def scale(self):
        return max(
            float(np.max(np.abs(f))) for f in (self.v, self.vt, self.p, self.pt)
        )


class SpatialOperator:
    """Second-difference stencil for the coupled acceleration block.

    Accelerations:
        a_v = (alpha/rho) v_xx - (gamma*beta/rho) p_xx
        a_p = (beta/mu)   p_xx - (gamma*beta/mu)  v_xx

    Node 0 is Dirichlet (row zeroed); node n-1 uses a mirror ghost node
    (u_n = u_{n-2}), which imposes the zero-slope condition to second order.
    """

    def __init__(self, params, grid):
        self.params = params
        self.grid = grid
        self.a_vv = params.alpha / params.rho
        self.a_vp = -params.gamma * params.beta / params.rho
        self.a_pp = params.beta / params.mu
        self.a_pv = -params.gamma * params.beta / params.mu
        self._implicit_cache = None

    def second_difference(self, u):
        dx2 = self.grid.dx**2
        out = np.zeros_like(u)
        out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx2
        out[-1] = 2.0 * (u[-2] - u[-1]) / dx2  # mirror ghost: u_n = u_{n-2}
        return out

    def apply(self, v, p):
        d2v = self.second_difference(v)
        d2p = self.second_difference(p)
        acc_v = self.a_vv * d2v + self.a_vp * d2p
        acc_p = self.a_pp * d2p + self.a_pv * d2v
        return acc_v, acc_p


def build_operator(params, grid):
    """Coupled stencil with the boundary closures baked in.

    The two flux conditions at x=L are equivalent to v_x(L) = p_x(L) = 0
    because the reduced stiffness alpha1 is positive, so the closure imposes
    plain zero slope on both fields.
    """
    if grid.n < 3:
        raise GridError(f"grid needs at least 3 nodes, got n={grid.n}")
    return SpatialOperator(params, grid)


class HistoryBuffer:
    """Ring of (timestamp, v_t snapshot) pairs for delayed sampling.

    Timestamps are equispaced with gap dt.  Each snapshot caches its spatial
    integral of v_t^2 (trapezoid) so the exponentially weighted delay-energy
    integral costs O(tau/dt) scalars per evaluation instead of O(n * tau/dt).
    """

    def __init__(self, dt, span, dx):
        if not dt > 0:
            raise ConfigError("history dt must be > 0")
        self.dt = dt
        self.span = span
        self.dx = dx
        self.times = deque()
        self.snaps = deque()
        self.sq_integrals = deque()

    def push(self, t, vt):
        if self.times and not t > self.times[-1]:
            raise ConfigError("history timestamps must be strictly increasing")
        self.times.append(float(t))
        snap = np.array(vt, dtype=float, copy=True)
        self.snaps.append(snap)
        self.sq_integrals.append(float(np.trapezoid(snap**2, dx=self.dx)))

    def evict(self, t_now):
        cutoff = t_now - self.span - 0.5 * self.dt
        while len(self.times) > 2 and self.times[1] <= cutoff:
            self.times.popleft()
            self.snaps.popleft()
            self.sq_integrals.popleft()

    @property
    def newest_time(self):
        return self.times[-1]

    @property
    def newest(self):
        return self.snaps[-1]

    def _bracket(self, t_query):
        t0 = self.times[0]
        eps = 1e-9 * self.dt
        if t_query < t0 - eps:
            raise HistoryUnderrunError(
                f"query t={t_query:.9g} precedes history start {t0:.9g}; "
                "buffer span is too short for the configured delay"
            )
        if t_query > self.times[-1] + eps:
            raise HistoryUnderrunError(
                f"query t={t_query:.9g} is ahead of newest snapshot "
                f"{self.times[-1]:.9g}"
            )
        pos = (t_query - t0) / self.dt
        i = int(math.floor(pos))
        i = max(0, min(i, len(self.times) - 2))
        w = (t_query - self.times[i]) / (self.times[i + 1] - self.times[i])
        return i, min(max(w, 0.0), 1.0)

    def sample(self, t_query):
        """Linear interpolation in time, elementwise in x; exact at stored stamps."""
        if len(self.times) == 1:
            i, w = 0, 0.0
            t0 = self.times[0]
            eps = 1e-9 * self.dt
            if abs(t_query - t0) > eps:
                raise HistoryUnderrunError(
                    f"single-snapshot history cannot interpolate at t={t_query:.9g}"
                )
            return self.snaps[0].copy()
        i, w = self._bracket(t_query)
        if w == 0.0:
            return self.snaps[i].copy()
        if w == 1.0:
            return self.snaps[i + 1].copy()
        return (1.0 - w) * self.snaps[i] + w * self.snaps[i + 1]

    def square_integral_at(self, t_query):
        """Trapezoid of the interpolated snapshot squared."""
        snap = self.sample(t_query)
        return float(np.trapezoid(snap**2, dx=self.dx))

    def weighted_square_integral(self, t, tau_t, lam):
        """Double integral over [t - tau_t, t] of exp(lam*(s-t)) * int v_t^2 dx ds.

        Trapezoid over the stored timestamps inside the window plus a partial
        cell at the lower endpoint using the interpolated snapshot there.
        """
        t_lo = t - tau_t
        times = np.asarray(self.times)
        eps = 1e-9 * self.dt
        if t_lo < times[0] - eps:
            raise HistoryUnderrunError(
                f"delay-energy window start {t_lo:.9g} precedes history start"
            )
        mask = (times >= t_lo - eps) & (times <= t + eps)
        ts = times[mask]
        vals = np.asarray(self.sq_integrals)[mask]
        weights = np.exp(lam * (ts - t))
        total = float(np.trapezoid(vals * weights, ts)) if len(ts) > 1 else 0.0
        # partial cell between t_lo and the first stored stamp in the window
        if len(ts) > 0 and ts[0] > t_lo + eps:
            f_lo = self.square_integral_at(t_lo) * math.exp(lam * (t_lo - t))
            f_first = vals[0] * weights[0]
            total += 0.5 * (f_lo + f_first) * (ts[0] - t_lo)
        return total


def sample_delayed_velocity(history, query_time):
    """Delayed velocity snapshot at query_time via linear interpolation."""
    return history.sample(query_time)


def init_history(grid, delay, g0, dt, span=None):
    """Pre-fill a history buffer from the initial-history function g0(x, s).

    Snapshots at s_k = -k*dt down past -tau_bar; the newest entry (s=0)
    matches the initial velocity when g0(., 0) does.
    """
    if span is None:
        span = delay.tau_bar + 2.0 * dt
    buf = HistoryBuffer(dt, span, grid.dx)
    k_max = int(math.ceil((delay.tau_bar + dt) / dt))
    x = grid.x
    for k in range(k_max, -1, -1):
        s = -k * dt
        snap = np.asarray(g0(x, s), dtype=float)
        if snap.shape != x.shape:
            snap = np.broadcast_to(snap, x.shape).astype(float)
        if not np.all(np.isfinite(snap)):
            raise ProfileEvaluationError(
                f"initial history g0 non-finite at s={s:.6g}"
            )
        buf.push(s, snap)
    return buf


def cfl_timestep(params, grid, delay=None, safety=0.5):
    """Explicit step bound: safety * dx / c_max, clamped to tau0 / 4.

    c_max is the square root of the largest eigenvalue of the 2x2 coefficient
    matrix; the delay clamp keeps at least 4 steps inside the shortest delay
    so the history interpolation stays meaningful.
    """
    if not 0 < safety <= 1:
        raise ConfigError(f"cfl safety must be in (0, 1], got {safety}")
    m = np.array([
        [params.alpha / params.rho, -params.gamma * params.beta / params.rho],
        [-params.gamma * params.beta / params.mu, params.beta / params.mu],
    ])
    c_max = math.sqrt(float(np.max(np.real(np.linalg.eigvals(m)))))
    dt = safety * grid.dx / c_max
    if delay is not None:
        dt = min(dt, delay.tau0 / 4.0)
    return dt


def wave_speed(params):
    """Fastest characteristic speed of the coupled system."""
    m = np.array([
        [params.alpha / params.rho, -params.gamma * params.beta / params.rho],
        [-params.gamma * params.beta / params.mu, params.beta / params.mu],
    ])
    return math.sqrt(float(np.max(np.real(np.linalg.eigvals(m)))))


def _core_energy(state, operator):
    """Delay-free quadratic form used by the blow-up guard."""
    pr = operator.params
    dx = operator.grid.dx
    dvm = np.diff(state.v) / dx
    dpm = np.diff(state.p) / dx
    return float(
        0.5 * pr.rho * np.trapezoid(state.vt**2, dx=dx)
        + 0.5 * pr.mu * np.trapezoid(state.pt**2, dx=dx)
        + 0.5 * pr.alpha1 * np.sum(dvm**2) * dx
        + 0.5 * pr.beta * np.sum((pr.gamma * dvm - dpm)**2) * dx
    )


def _check_blowup(e_before, e_after, step_label):
    if not np.isfinite(e_after) or (e_before > 1e-300 and e_after > 10.0 * e_before):
        raise DivergenceError(
            f"energy blow-up guard tripped during {step_label} "
            f"({e_before:.3e} -> {e_after:.3e}); time step too large",
        )


def step_explicit(state, history, operator, weights, delay, dt):
    """One central-difference step with semi-implicit instantaneous damping.

    The delayed term is frozen from the history at t - tau(t); the
    instantaneous damping is averaged between velocity levels so large
    damping gains add no extra step restriction.
    """
    pr = operator.params
    t = state.t
    tau_t = float(delay.tau(t))
    z = history.sample(t - tau_t)
    d1_now = float(weights.delta1(t))
    d1_mid = float(weights.delta1(t + 0.5 * dt))
    d2_now = float(weights.delta2(t))

    e0 = _core_energy(state, operator)

    acc_v0, acc_p0 = operator.apply(state.v, state.p)
    total_v0 = acc_v0 - (d1_now * state.vt + d2_now * z) / pr.rho

    v_new = state.v + dt * state.vt + 0.5 * dt**2 * total_v0
    p_new = state.p + dt * state.pt + 0.5 * dt**2 * acc_p0
    v_new[0] = 0.0
    p_new[0] = 0.0

    acc_v1, acc_p1 = operator.apply(v_new, p_new)
    pt_new = state.pt + 0.5 * dt * (acc_p0 + acc_p1)
    denom = pr.rho + 0.5 * dt * d1_mid
    vt_new = (
        (pr.rho - 0.5 * dt * d1_mid) * state.vt
        + 0.5 * dt * pr.rho * (acc_v0 + acc_v1)
        - dt * d2_now * z
    ) / denom
    vt_new[0] = 0.0
    pt_new[0] = 0.0

    new = SimState(t + dt, v_new, vt_new, p_new, pt_new)
    _check_blowup(e0, _core_energy(new, operator), "explicit step")
    history.push(new.t, vt_new)
    history.evict(new.t)
    return new


def _implicit_matrix(operator, weights, dt, t_new):
    """Banded matrix of the backward-Euler resolvent step, interleaved (v,p)."""
    pr = operator.params
    n = operator.grid.n
    dx2 = operator.grid.dx**2
    nb = 4  # bandwidth; the one-sided boundary rows reach offset 4

    cache = operator._implicit_cache
    if cache is None or cache[0] != dt:
        ab = np.zeros((2 * nb + 1, 2 * n))

        def put(rows, cols, val):
            ab[nb + rows - cols, cols] += val

        i = np.arange(1, n - 1)
        rv = 2 * i
        rp = 2 * i + 1
        # v rows: (rho/dt^2) w - alpha D2 w + gamma beta D2 q  (+ delta1/dt later)
        put(rv, rv, pr.rho / dt**2 + 2.0 * pr.alpha / dx2)
        put(rv, rv - 2, -pr.alpha / dx2)
        put(rv, rv + 2, -pr.alpha / dx2)
        put(rv, rv + 1, -2.0 * pr.gamma * pr.beta / dx2)
        put(rv, rv - 1, pr.gamma * pr.beta / dx2)
        put(rv, rv + 3, pr.gamma * pr.beta / dx2)
        # p rows: (mu/dt^2) q - beta D2 q + gamma beta D2 w
        put(rp, rp, pr.mu / dt**2 + 2.0 * pr.beta / dx2)
        put(rp, rp - 2, -pr.beta / dx2)
        put(rp, rp + 2, -pr.beta / dx2)
        put(rp, rp - 1, -2.0 * pr.gamma * pr.beta / dx2)
        put(rp, rp - 3, pr.gamma * pr.beta / dx2)
        put(rp, rp + 1, pr.gamma * pr.beta / dx2)
        # Dirichlet rows at node 0
        put(np.array([0]), np.array([0]), 1.0)
        put(np.array([1]), np.array([1]), 1.0)
        # second-order one-sided zero-slope rows at node n-1
        last_v = 2 * (n - 1)
        last_p = last_v + 1
        for row, step in ((last_v, 2), (last_p, 2)):
            put(np.array([row]), np.array([row]), 3.0)
            put(np.array([row]), np.array([row - step]), -4.0)
            put(np.array([row]), np.array([row - 2 * step]), 1.0)
        operator._implicit_cache = (dt, ab)
        cache = operator._implicit_cache

    ab = cache[1].copy()
    d1 = float(weights.delta1(t_new))
    i = np.arange(1, n - 1)
    ab[nb, 2 * i] += d1 / dt
    return ab, d1


def step_implicit(state, history, operator, weights, delay, dt):
    """Backward-Euler step, implicit in the wave part, explicit in the delay.

    Solves the discrete resolvent system for the new displacements; the
    zero-slope condition at x=L is imposed as a direct row constraint, so the
    implicit solution satisfies it to solver roundoff.
    """
    pr = operator.params
    n = operator.grid.n
    t_new = state.t + dt
    tau_new = float(delay.tau(t_new))
    z = history.sample(t_new - tau_new)
    d2_new = float(weights.delta2(t_new))

    ab, d1 = _implicit_matrix(operator, weights, dt, t_new)

    rhs = np.zeros(2 * n)
    i = np.arange(1, n - 1)
    rhs[2 * i] = ((pr.rho / dt**2 + d1 / dt) * state.v[i]
                  + pr.rho * state.vt[i] / dt - d2_new * z[i])
    rhs[2 * i + 1] = pr.mu * state.p[i] / dt**2 + pr.mu * state.pt[i] / dt

    sol = solve_banded((4, 4), ab, rhs)
    if not np.all(np.isfinite(sol)):
        raise DivergenceError("implicit solve returned non-finite values")
    v_new = sol[0::2]
    p_new = sol[1::2]
    vt_new = (v_new - state.v) / dt
    pt_new = (p_new - state.p) / dt
    vt_new[0] = 0.0
    pt_new[0] = 0.0

    new = SimState(t_new, v_new, vt_new, p_new, pt_new)
    _check_blowup(_core_energy(state, operator),
                  _core_energy(new, operator), "implicit step")
    history.push(t_new, vt_new)
    history.evict(t_new)
    return new


STEPPERS = {"explicit": step_explicit, "implicit": step_implicit}


@dataclass
class TrajectoryRecord:
    t: float
    energy: "object"  # diagnostics.EnergyReport
    k1: float
    k2: float
    k3: float
    lyap: float


@dataclass
class FieldSnapshot:
    index: int
    t: float
    x: np.ndarray
    v: np.ndarray
    vt: np.ndarray
    p: np.ndarray
    pt: np.ndarray


@dataclass
class Trajectory:
    scenario: "object"
    certificate: "object"
    multipliers: "object"
    dt: float
    dx: float
    records: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    status: str = "ok"

    @property
    def times(self):
        return np.array([r.t for r in self.records])

    @property
    def energies(self):
        return np.array([r.energy.total for r in self.records])


def run(scenario, collect_fields=True):
    """Integrate a scenario and record energy/Lyapunov diagnostics.

    Deterministic: fixed dt (CFL- and delay-clamped, then rounded so an
    integer number of steps hits the horizon exactly), no randomness.
    Divergence raises DivergenceError with the partial trajectory attached.
    """
    from . import diagnostics
    from .scenario import initial_fields

    grid = Grid(scenario.n, scenario.beam.length)
    operator = build_operator(scenario.beam, grid)
    certificate = scenario.build_certificate()

    dt0 = cfl_timestep(scenario.beam, grid, scenario.delay, scenario.cfl_safety)
    if scenario.dt is not None:
        if not scenario.dt > 0:
            raise ConfigError("numerics dt override must be > 0")
        dt0 = min(scenario.dt, scenario.delay.tau0 / 4.0)
    n_steps = max(0, int(math.ceil(scenario.horizon / dt0 - 1e-12)))
    dt = scenario.horizon / n_steps if n_steps else dt0

    x = grid.x
    v0, v1, p0, p1, g0 = initial_fields(scenario, x)
    state = SimState(0.0, v0.copy(), v1.copy(), p0.copy(), p1.copy())
    history = init_history(grid, scenario.delay, g0, dt)

    multipliers = None
    if certificate.valid:
        multipliers = diagnostics.select_multipliers(
            scenario.beam, scenario.weights, certificate)

    traj = Trajectory(scenario, certificate, multipliers, dt, grid.dx)

    def record(step_index, st, final=False):
        rep = diagnostics.energy(st, history, scenario.beam, certificate,
                                 scenario.delay, weights=scenario.weights)
        k1 = diagnostics.lyapunov_k1(st, scenario.beam)
        k2 = diagnostics.lyapunov_k2(st, scenario.beam)
        k3 = diagnostics.lyapunov_k3(st, scenario.beam)
        lyap = math.nan
        if multipliers is not None:
            m = multipliers
            lyap = m.n * rep.total + m.n1 * k1 + m.n2 * k2 + m.n3 * k3
        traj.records.append(TrajectoryRecord(st.t, rep, k1, k2, k3, lyap))
        if collect_fields and (step_index % scenario.field_stride == 0 or final):
            traj.fields.append(FieldSnapshot(
                len(traj.fields), st.t, x.copy(), st.v.copy(), st.vt.copy(),
                st.p.copy(), st.pt.copy()))

    stepper = STEPPERS[scenario.integrator]
    record(0, state)
    e_prev = traj.records[0].energy.total
    for k in range(1, n_steps + 1):
        try:
            state = stepper(state, history, operator, scenario.weights,
                            scenario.delay, dt)
        except DivergenceError as exc:
            traj.status = "diverged"
            err = DivergenceError(f"{exc} (step {k})", step=k)
            err.trajectory = traj
            raise err from exc
        if k % scenario.output_stride == 0 or k == n_steps:
            record(k, state, final=(k == n_steps))
            e_now = traj.records[-1].energy.total
            if e_prev > 1e-300 and e_now > 10.0 * e_prev:
                traj.status = "diverged"
                err = DivergenceError(
                    f"energy grew {e_now / e_prev:.2f}x between records "
                    f"(step {k})", step=k)
                err.trajectory = traj
                raise err
            e_prev = e_now
    return traj
