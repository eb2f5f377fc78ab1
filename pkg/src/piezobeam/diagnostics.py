"""Energy and Lyapunov diagnostics along simulated trajectories.

Spatial integrals use the trapezoid rule on the solver grid; derivatives use
staggered midpoint differences (second order, and consistent with the discrete
stiffness form, so the measured energy of the undamped semi-discrete system is
conserved up to time-integration error only).  The delay-energy double
integral is a trapezoid over stored history snapshots with an exponential
kernel and a partial cell at the moving lower endpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, MultiplierSearchError, UndefinedRatioError


@dataclass(frozen=True)
class EnergyReport:
    """Componentwise energy at one time; total is the sum of the five terms."""

    t: float
    kinetic_v: float
    kinetic_p: float
    elastic: float
    coupling: float
    delay_term: float
    int_vt2: float
    int_vt2_delayed: float
    delay_kernel_integral: float

    @property
    def total(self):
        return (self.kinetic_v + self.kinetic_p + self.elastic
                + self.coupling + self.delay_term)


def _dx_of(state, params):
    return params.length / (len(state.v) - 1)


def energy(state, history, params, certificate, delay, weights=None):
    """Delay-augmented energy of the current state.

    The delay term weight is xi_bar * delta1(t); an invalid certificate
    (non-finite xi_bar) contributes no delay energy.
    """
    dx = _dx_of(state, params)
    xi_bar = certificate.xi_bar if math.isfinite(certificate.xi_bar) else 0.0
    lam = certificate.lam if math.isfinite(certificate.lam) else 0.0
    d1 = float(weights.delta1(state.t)) if weights is not None else 1.0
    xi_t = xi_bar * d1

    dvm = np.diff(state.v) / dx
    dpm = np.diff(state.p) / dx
    kinetic_v = 0.5 * params.rho * float(np.trapezoid(state.vt**2, dx=dx))
    kinetic_p = 0.5 * params.mu * float(np.trapezoid(state.pt**2, dx=dx))
    elastic = 0.5 * params.alpha1 * float(np.sum(dvm**2)) * dx
    coupling = 0.5 * params.beta * float(
        np.sum((params.gamma * dvm - dpm)**2)) * dx

    tau_t = float(delay.tau(state.t))
    int_vt2 = float(np.trapezoid(state.vt**2, dx=dx))
    int_vt2_delayed = history.square_integral_at(state.t - tau_t)
    kernel = history.weighted_square_integral(state.t, tau_t, lam)
    delay_term = 0.5 * xi_t * kernel

    return EnergyReport(state.t, kinetic_v, kinetic_p, elastic, coupling,
                        delay_term, int_vt2, int_vt2_delayed, kernel)


def lyapunov_k1(state, params):
    """rho * int v_t v + gamma mu * int p_t v."""
    dx = _dx_of(state, params)
    return float(params.rho * np.trapezoid(state.vt * state.v, dx=dx)
                 + params.gamma * params.mu * np.trapezoid(state.pt * state.v, dx=dx))


def lyapunov_k2(state, params):
    """rho * int v_t (gamma v - p) + gamma mu * int p_t (gamma v - p)."""
    dx = _dx_of(state, params)
    w = params.gamma * state.v - state.p
    return float(params.rho * np.trapezoid(state.vt * w, dx=dx)
                 + params.gamma * params.mu * np.trapezoid(state.pt * w, dx=dx))


def lyapunov_k3(state, params):
    """rho * int v_t v + mu * int p_t p."""
    dx = _dx_of(state, params)
    return float(params.rho * np.trapezoid(state.vt * state.v, dx=dx)
                 + params.mu * np.trapezoid(state.pt * state.p, dx=dx))


@dataclass(frozen=True)
class Multipliers:
    """Weights of the combined Lyapunov functional N*E + N1*K1 + N2*K2 + N3*K3."""

    n: float
    n1: float
    n2: float
    n3: float
    c_prime: float

    def as_dict(self):
        return {"N": self.n, "N1": self.n1, "N2": self.n2, "N3": self.n3,
                "c_prime": self.c_prime}


def default_poincare_constant(length):
    """Poincare constant of (0, L) with a left Dirichlet condition: (2L/pi)^2."""
    return (2.0 * length / math.pi)**2


def multiplier_inequalities(params, weights, certificate, mult):
    """The five sign conditions the multiplier choice must satisfy.

    Returns the five left-hand sides; each must exceed 1.  Free constants
    follow the coefficient-balancing choices documented in
    select_multipliers.
    """
    pr = params
    a1 = pr.alpha1
    cp = mult.c_prime
    d10 = float(weights.delta1(0.0))
    beta0 = weights.beta0
    cmin = certificate.c
    n, n1, n2, n3 = mult.n, mult.n1, mult.n2, mult.n3

    eps = cp * d10 / a1 if d10 > 0 else 1.0  # eps1..eps4 all equal
    # coefficient of |v_x|^2 inside each bracket: a1 - a1/4 - beta0*a1/4
    a_coeff = a1 * (3.0 - beta0) / 4.0

    ineq_coupling = n3 * pr.beta - 3.0
    ineq_pt = n2 * pr.gamma * pr.mu / 2.0 - pr.gamma * pr.mu / 4.0 - n3 * pr.mu
    ineq_vx = n1 * a_coeff - n2**2 * a1**2 / 4.0 + n3 * a_coeff

    s1 = (n1 * (pr.rho + n1 * pr.gamma * pr.mu + eps * d10)
          + n2 * (pr.rho * pr.gamma + pr.rho**2 / (pr.gamma * pr.mu)
                  + pr.gamma**3 * pr.mu + n2 * cp * d10**2 / 4.0)
          + n3 * (pr.rho + eps * d10))
    ineq_vt = cmin * n - s1

    if beta0 > 0:
        s2 = (n1 * eps * beta0 * d10
              + n2 * (n2 * cp * beta0**2 * d10**2 / 4.0)
              + n3 * eps * beta0 * d10)
    else:
        s2 = 0.0
    ineq_delayed = cmin * n - s2

    return (ineq_coupling, ineq_pt, ineq_vx, ineq_vt, ineq_delayed)


def select_multipliers(params, weights, certificate, c_prime=None,
                       max_doublings=64):
    """Feasibility search over the multipliers, resolved in dependency order.

    Free constants: eps_i = c' * delta1(0) / alpha1 (each Young term then
    equals alpha1/4), eta1 = gamma*mu/(4 rho) and eta2 = 1/(4 gamma) (the
    p_t coefficient becomes exactly gamma*mu/2), eta5 = 1/(N2 alpha1),
    eta3 = 1/(N2 c' delta1(0)), eta4 = 1/(N2 c' beta0 delta1(0)).  Each
    multiplier doubles from 1 until its inequality clears 1.
    """
    if c_prime is None:
        c_prime = default_poincare_constant(params.length)
    if not c_prime > 0:
        raise MultiplierSearchError(
            f"Poincare constant must be > 0, got {c_prime} "
            "(the eta constants divide by it)")
    if not certificate.c > 0:
        raise MultiplierSearchError(
            "certificate dissipation constant is non-positive; "
            "no admissible multipliers")

    def double_until(check):
        val = 1.0
        for _ in range(max_doublings):
            if check(val):
                return val
            val *= 2.0
        raise MultiplierSearchError(
            "multiplier search did not terminate after "
            f"{max_doublings} doublings")

    n3 = double_until(lambda m: multiplier_inequalities(
        params, weights, certificate,
        Multipliers(1.0, 1.0, 1.0, m, c_prime))[0] > 1.0)
    n2 = double_until(lambda m: multiplier_inequalities(
        params, weights, certificate,
        Multipliers(1.0, 1.0, m, n3, c_prime))[1] > 1.0)
    n1 = double_until(lambda m: multiplier_inequalities(
        params, weights, certificate,
        Multipliers(1.0, m, n2, n3, c_prime))[2] > 1.0)
    n = double_until(lambda m: all(
        v > 1.0 for v in multiplier_inequalities(
            params, weights, certificate,
            Multipliers(m, n1, n2, n3, c_prime))[3:]))
    return Multipliers(n, n1, n2, n3, c_prime)


@dataclass(frozen=True)
class DissipationReport:
    """Per-step check of the certified energy-decay inequality."""

    n_pairs: int
    n_violations: int
    worst_margin: float  # most positive violation; <= 0 means all pairs pass
    worst_t: float
    tolerance: float

    @property
    def passed(self):
        return self.n_violations == 0

    def as_dict(self):
        return {"n_pairs": self.n_pairs, "n_violations": self.n_violations,
                "worst_margin": self.worst_margin, "worst_t": self.worst_t,
                "tolerance": self.tolerance, "passed": self.passed}


def energy_dissipation_check(trajectory, certificate, c_tol=10.0):
    """Check dE/dt <= -C (int v_t^2 + delayed) - C * kernel integral, discretely.

    The continuum inequality is checked between consecutive records with the
    right-hand side averaged over the pair and a resolution-scaled tolerance
    c_tol * (dt^2 + dx^2) * max(E(0), 1).
    """
    recs = trajectory.records
    if len(recs) < 2:
        return DissipationReport(0, 0, -math.inf, math.nan, 0.0)
    cmin = certificate.c if math.isfinite(certificate.c) else 0.0
    cmin = max(cmin, 0.0)
    scale = max(recs[0].energy.total, 1.0)
    tol = c_tol * (trajectory.dt**2 + trajectory.dx**2) * scale

    n_violations = 0
    worst_margin = -math.inf
    worst_t = math.nan
    for a, b in zip(recs[:-1], recs[1:]):
        dt_pair = b.t - a.t
        lhs = (b.energy.total - a.energy.total) / dt_pair
        damping = 0.5 * ((a.energy.int_vt2 + a.energy.int_vt2_delayed)
                         + (b.energy.int_vt2 + b.energy.int_vt2_delayed))
        kernel = 0.5 * (a.energy.delay_kernel_integral
                        + b.energy.delay_kernel_integral)
        rhs = -cmin * damping - cmin * kernel
        margin = lhs - rhs - tol
        if margin > 0:
            n_violations += 1
        if margin > worst_margin:
            worst_margin = margin
            worst_t = b.t
    return DissipationReport(len(recs) - 1, n_violations, worst_margin,
                             worst_t, tol)


def lyapunov_equivalence(trajectory, multipliers):
    """Empirical equivalence ratios (b1, b2) of the combined functional vs E."""
    ratios = []
    for r in trajectory.records:
        e = r.energy.total
        if e > 0:
            lyap = (multipliers.n * e + multipliers.n1 * r.k1
                    + multipliers.n2 * r.k2 + multipliers.n3 * r.k3)
            ratios.append(lyap / e)
    if not ratios:
        raise UndefinedRatioError(
            "trajectory has no positive-energy samples; equivalence ratios "
            "are undefined")
    return min(ratios), max(ratios)


@dataclass(frozen=True)
class DecayFit:
    """Log-linear fit E(t) ~ H1 * E(0) * exp(-H2 * t) over a time window."""

    h1: float
    h2: float
    r_squared: float
    window: tuple

    def as_dict(self):
        return {"H1": self.h1, "H2": self.h2, "r_squared": self.r_squared,
                "window": list(self.window)}


def fit_decay_rate(trajectory, window_fraction=0.5):
    """Least-squares line through (t, log E) on the trailing window.

    Only samples with E > 0 enter the fit; H2 is minus the slope (negative
    H2 means growth).
    """
    recs = trajectory.records
    if not recs:
        raise InsufficientDataError("empty trajectory")
    e0 = recs[0].energy.total
    t_end = recs[-1].t
    t_lo = t_end - window_fraction * (t_end - recs[0].t)
    pts = [(r.t, r.energy.total) for r in recs
           if r.t >= t_lo and r.energy.total > 0]
    if len(pts) < 10:
        raise InsufficientDataError(
            f"need >= 10 positive-energy samples in the window, got {len(pts)}")
    ts = np.array([p[0] for p in pts])
    log_e = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(ts, log_e, 1)
    resid = log_e - (slope * ts + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((log_e - log_e.mean())**2))
    r2 = 1.0 if ss_tot < 1e-300 else 1.0 - ss_res / ss_tot
    h1 = math.exp(intercept) / e0 if e0 > 0 else math.nan
    return DecayFit(h1, -float(slope), r2, (float(t_lo), float(t_end)))
