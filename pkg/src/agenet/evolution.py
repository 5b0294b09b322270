"""Time integration of the age-structured network on the locked mesh
dt = dx (exact transport characteristics).

Each step: decay the density by the survival factor exp(-k dt), book
the absorbed mass plus the mass advected past the age horizon as the
discharge p, shift the density one cell toward older ages, and reinject
p in the youngest cell.  Cell mass is conserved to rounding by
construction.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from typing import Callable, Optional, Union

import numpy as np

from .delay_kernel import DelayKernel, DischargeHistory
from .errors import (AmbiguousActivityError, DegenerateInputError,
                     InvariantViolationError, ModelInconsistencyError)
from .firing_rate import StepRate, estimate_xi, half_rate_age
from .grid import AgeGrid, DensityState

__all__ = [
    "SimulationConfig", "SimulationTrace", "ActivitySolution", "DecayFit",
    "solve_activity_implicit", "kappa0", "step", "run", "decay_fit",
    "stepper_equilibrium",
]


@dataclasses.dataclass(frozen=True)
class SimulationConfig:
    grid: AgeGrid
    model: object
    kernel: DelayKernel = dataclasses.field(default_factory=DelayKernel.dirac)
    t_end: float = 10.0
    record_every: int = 10
    fixed_point_tol: float = 1e-12
    fixed_point_max_iter: int = 200
    q: float = 1.0
    tau: Optional[float] = None
    allow_zero_kappa0: bool = False

    def __post_init__(self):
        if self.t_end <= 0.0:
            raise ValueError("t_end must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.fixed_point_tol <= 0.0:
            raise ValueError("fixed_point_tol must be positive")
        if self.fixed_point_max_iter < 1:
            raise ValueError("fixed_point_max_iter must be >= 1")
        if self.q < 0.0:
            raise ValueError("q must be >= 0")

    @property
    def dt(self):
        """Time step, locked to the age resolution."""
        return self.grid.dx


@dataclasses.dataclass(frozen=True)
class ActivitySolution:
    m: float
    iterations: int
    method: str


@dataclasses.dataclass(frozen=True)
class SimulationTrace:
    times: np.ndarray
    m_series: np.ndarray
    p_series: np.ndarray
    mass_series: np.ndarray
    linf_series: np.ndarray
    l1q_series: np.ndarray
    l1_dist_to_F: Optional[np.ndarray]
    final_state: DensityState
    kappa0: float
    dt: float


@dataclasses.dataclass(frozen=True)
class DecayFit:
    alpha: float
    C: float
    r2: float
    window: tuple
    n_points: int


def kappa0(model, grid, f0):
    """Rest-rate mass int k(x, 0) f0(x) dx; positive kappa0 keeps the
    discharge bounded away from zero along the whole run."""
    values = f0.values if isinstance(f0, DensityState) else np.asarray(
        f0, dtype=float)
    return float(np.dot(model.rate(grid.midpoints, 0.0), values)) * grid.dx


def _activity_quadrature(model, grid, values):
    """Return G with G(mu) = int k(x, lam*mu) f(x) dx on the midpoint
    mesh.  Step rates get an exact cumulative-sum evaluation so the
    fixed-point loop costs O(log n) per call."""
    mids = grid.midpoints
    dx = grid.dx
    if isinstance(model, StepRate):
        csum = np.concatenate(([0.0], np.cumsum(values))) * dx
        total = csum[-1]

        def G(mu):
            idx = np.searchsorted(mids, model.threshold(mu), side="right")
            return total - csum[idx]
    else:
        def G(mu):
            return float(np.dot(model.rate(mids, mu), values)) * dx
    return G


def _continuous_roots(G, lo, hi, n_scan, tol):
    """All mu in (lo, hi] where Phi(mu) = G(mu) - mu crosses zero
    continuously.  Sign changes across a jump of G are refined and then
    discarded when |Phi| stays above tol."""
    mus = np.linspace(lo, hi, n_scan)
    phis = np.array([G(mu) - mu for mu in mus])
    if not np.all(np.isfinite(phis)):
        raise ModelInconsistencyError("activity map returned non-finite "
                                      "values during the root scan")
    roots = []
    for i in range(n_scan - 1):
        a, b = mus[i], mus[i + 1]
        fa, fb = phis[i], phis[i + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0.0:
            for _ in range(200):
                mid = 0.5 * (a + b)
                fm = G(mid) - mid
                if fm == 0.0 or (b - a) < 1e-17:
                    break
                if fa * fm < 0.0:
                    b, fb = mid, fm
                else:
                    a, fa = mid, fm
            root = 0.5 * (a + b)
            if abs(G(root) - root) <= max(tol, 1e-9):
                roots.append(root)
    if phis[-1] == 0.0:
        roots.append(mus[-1])
    # collapse near-duplicates from adjacent scan cells
    out = []
    for r in roots:
        if not out or abs(r - out[-1]) > 1e-9 * max(1.0, hi):
            out.append(r)
    return out


def solve_activity_implicit(model, grid, values, bracket=None, tol=1e-12,
                            max_iter=200, warm_start=None):
    """Solve the implicit activity m = int k(x, lam*m) f(x) dx for a
    density of mass approx 1.

    Damped fixed-point iteration first; on a stall, bisection over the
    bracket left by the last oscillation, then a full scan of the
    bracket (default (0, k1]) that reports every continuous root.
    Zero roots means the model violates its own bounds; several roots
    make the dynamics ambiguous and both cases raise."""
    G = _activity_quadrature(model, grid, values)
    k1 = model.k1
    lo, hi = (0.0, k1) if bracket is None else map(float, bracket)
    if not 0.0 <= lo < hi:
        raise ValueError("bracket must satisfy 0 <= lo < hi")

    mu = G(0.0) if warm_start is None else float(warm_start)
    mu = min(max(mu, lo), hi)
    prev_delta = None
    osc_lo, osc_hi = None, None
    for it in range(1, max_iter + 1):
        target = G(mu)
        delta = target - mu
        if abs(delta) <= tol:
            return ActivitySolution(m=mu, iterations=it, method="fixed-point")
        if prev_delta is not None and delta * prev_delta < 0.0:
            # oscillating: remember the straddle and damp the update
            a, b = (mu, mu + delta) if delta > 0 else (mu + delta, mu)
            osc_lo, osc_hi = a, b
            mu = mu + 0.5 * delta
        else:
            mu = target
        mu = min(max(mu, lo), hi)
        prev_delta = delta

    # stalled; try the oscillation bracket first
    if osc_lo is not None:
        a, b = osc_lo, osc_hi
        fa, fb = G(a) - a, G(b) - b
        if fa == 0.0:
            return ActivitySolution(m=a, iterations=max_iter, method="bisect")
        if fa * fb < 0.0:
            for _ in range(200):
                mid = 0.5 * (a + b)
                fm = G(mid) - mid
                if fm == 0.0:
                    a = b = mid
                    break
                if fa * fm < 0.0:
                    b, fb = mid, fm
                else:
                    a, fa = mid, fm
            root = 0.5 * (a + b)
            if abs(G(root) - root) <= max(tol, 1e-9):
                return ActivitySolution(m=root, iterations=max_iter,
                                        method="bisect")

    # last resort: exhaustive scan, which also detects ambiguity
    n_scan = 1024
    if isinstance(model, StepRate):
        lam = abs(model.lam)
        modulus = model.sigma_modulus
        if modulus is None:
            modulus = (model.sigma_plus - model.sigma_minus) * model.decay
        jumps = lam * modulus * k1 / grid.dx
        n_scan = int(min(2e5, max(1024, 4.0 * jumps)))
    roots = _continuous_roots(G, lo, hi, n_scan, tol)
    if not roots:
        raise ModelInconsistencyError(
            "no continuous solution of m = int k(x, lam*m) f dx in "
            f"[0, {k1!r}]; the rate family breaks its stated bounds")
    if len(roots) > 1:
        raise AmbiguousActivityError(
            "the implicit activity admits " + str(len(roots))
            + " solutions: " + ", ".join(f"{r:.6g}" for r in roots),
            roots)
    return ActivitySolution(m=roots[0], iterations=max_iter, method="scan")


def step(state, m, config):
    """One transport step at activity m.  Returns (new_state, p)."""
    grid = config.grid
    dt = grid.dx
    values = state.values
    rates = config.model.rate(grid.midpoints, m)
    survived = values * np.exp(-rates * dt)
    absorbed = (float(values.sum()) - float(survived.sum())) * grid.dx
    outflow = float(survived[-1]) * grid.dx
    p = (absorbed + outflow) / dt
    new = np.empty_like(values)
    new[1:] = survived[:-1]
    new[0] = p
    if p < 0.0 or new[-1] < 0.0:
        raise InvariantViolationError(
            "negative density produced by a transport step",
            {"t": state.t, "p": p, "m": m})
    mass = float(new.sum()) * grid.dx
    return DensityState(values=new, mass=mass, m=m, p=p, t=state.t + dt), p


def _check_strong_regime_gate(config, k0_mass):
    """A vanishing rest-rate mass with no delay forfeits the discharge
    lower bound; in the strong regime that combination is refused."""
    model = config.model
    if getattr(model, "lam", 0.0) == 0.0:
        return
    est = estimate_xi(model, x_max=config.grid.x_max)
    if math.isfinite(est.lambda_strong) and abs(model.lam) >= est.lambda_strong:
        raise DegenerateInputError(
            "initial density carries no rest-rate mass (kappa0 = 0) and the "
            "connectivity sits in the strong regime; the discharge can die "
            "out and the relaxation guarantee is void.  Pass "
            "allow_zero_kappa0=True to run anyway.")


def run(config, f0, steady=None):
    """Integrate the network from f0 up to t_end.

    f0 may be a DensityState, an array of cell values, or a callable
    of age.  If steady is given (a SteadyState), the trace records the
    L1 distance to its profile at every sample.

    Running checks on every recorded sample: unit mass within 1e-10,
    sup bound, p <= k1, m in [0, k1], and for kappa0 > 0 the uniform
    activity floor once t passes the half-rate age.
    """
    grid, model, kernel = config.grid, config.model, config.kernel
    dt = config.dt
    if not isinstance(f0, DensityState):
        f0 = grid.project(f0)
    state = f0
    k1 = model.k1
    k0 = model.k0

    k0_mass = kappa0(model, grid, state)
    if k0_mass <= 0.0 and kernel.is_dirac and not config.allow_zero_kappa0:
        _check_strong_regime_gate(config, k0_mass)

    x0 = half_rate_age(model)
    tau = x0 if config.tau is None else config.tau
    sup_bound = float(np.max(state.values)) + k1 + 10.0 * grid.dx
    m_floor = min(k0_mass, 0.5 * k0) * math.exp(-k1 * x0) - 10.0 * grid.dx

    # initial activity: the self-consistent discharge of f0, which also
    # pads the pre-history for delayed kernels
    sol = solve_activity_implicit(model, grid, state.values,
                         tol=config.fixed_point_tol,
                         max_iter=config.fixed_point_max_iter)
    m0 = sol.m
    state = dataclasses.replace(state, m=m0, p=m0)

    history = None
    weights = None
    if not kernel.is_dirac:
        _, weights = kernel.weights(dt)
        history = DischargeHistory.constant(m0, weights.size, dt)

    n_steps = int(round(config.t_end / dt))
    if n_steps < 1:
        raise ValueError("t_end shorter than one time step")

    F = steady.F if steady is not None else None

    times = [0.0]
    m_series = [m0]
    p_series = [m0]
    mass_series = [state.mass]
    linf_series = [float(np.max(state.values))]
    l1q_series = [grid.l1q_norm(state.values, config.q)]
    dist_series = None
    if F is not None:
        dist_series = [grid.l1_distance(state.values, F)]

    def _record(t, st, m, p):
        times.append(t)
        m_series.append(m)
        p_series.append(p)
        mass_series.append(st.mass)
        linf_series.append(float(np.max(st.values)))
        l1q_series.append(grid.l1q_norm(st.values, config.q))
        if dist_series is not None:
            dist_series.append(grid.l1_distance(st.values, F))
        _check_running(t, st, m, p)

    def _check_running(t, st, m, p):
        diag = {"t": t, "m": m, "p": p, "mass": st.mass}
        if not (math.isfinite(m) and math.isfinite(p)
                and math.isfinite(st.mass)):
            raise InvariantViolationError("non-finite state", diag)
        if abs(st.mass - 1.0) > 1e-10:
            raise InvariantViolationError("mass drifted off 1", diag)
        if np.max(st.values) > sup_bound:
            diag["sup_bound"] = sup_bound
            raise InvariantViolationError("density exceeded its sup bound",
                                          diag)
        if p > k1 * (1.0 + 1e-12) or p < 0.0:
            raise InvariantViolationError("discharge left [0, k1]", diag)
        if m > k1 * (1.0 + 1e-12) or m < 0.0:
            raise InvariantViolationError("activity left [0, k1]", diag)
        if k0_mass > 0.0 and t >= max(tau, x0) and m < m_floor:
            diag["floor"] = m_floor
            raise InvariantViolationError(
                "activity fell below its uniform lower bound", diag)

    _check_running(0.0, state, m0, m0)

    warm = m0
    for n in range(1, n_steps + 1):
        if kernel.is_dirac:
            try:
                sol = solve_activity_implicit(model, grid, state.values,
                                     tol=config.fixed_point_tol,
                                     max_iter=config.fixed_point_max_iter,
                                     warm_start=warm)
            except AmbiguousActivityError as exc:
                exc.t = state.t
                raise
            m = sol.m
            warm = m
        else:
            m = float(weights @ history.lagged(weights.size))
        state, p = step(state, m, config)
        state = dataclasses.replace(state, t=n * dt)
        if history is not None:
            history.push(p)
        if not (math.isfinite(p) and math.isfinite(m)):
            raise InvariantViolationError(
                "non-finite step output", {"t": n * dt, "m": m, "p": p})
        if n % config.record_every == 0 or n == n_steps:
            _record(n * dt, state, m, p)

    return SimulationTrace(
        times=np.asarray(times),
        m_series=np.asarray(m_series),
        p_series=np.asarray(p_series),
        mass_series=np.asarray(mass_series),
        linf_series=np.asarray(linf_series),
        l1q_series=np.asarray(l1q_series),
        l1_dist_to_F=None if dist_series is None else np.asarray(dist_series),
        final_state=state,
        kappa0=k0_mass,
        dt=dt,
    )


def decay_fit(trace, window):
    """Least-squares line through log ||f(t) - F||_1 over the window.

    Returns slope alpha, prefactor C and the r^2 of the fit.  Distances
    at the rounding floor (1e-13) are cut from the window tail with a
    warning; they carry no decay information."""
    if trace.l1_dist_to_F is None:
        raise ValueError("trace has no recorded distance to a steady state; "
                         "rerun with steady=...")
    t0, t1 = float(window[0]), float(window[1])
    if not t1 > t0:
        raise ValueError("window must satisfy t0 < t1")
    sel = (trace.times >= t0) & (trace.times <= t1)
    t = trace.times[sel]
    d = trace.l1_dist_to_F[sel]
    floor = 1e-13
    if np.any(d <= floor):
        cut = int(np.argmax(d <= floor))
        if cut < 3:
            raise ValueError("distance sits at the rounding floor over the "
                             "whole window; nothing to fit")
        warnings.warn("distance reaches the rounding floor inside the fit "
                      "window; shrinking the window", stacklevel=2)
        t, d = t[:cut], d[:cut]
    if t.size < 3:
        raise ValueError("need at least 3 samples in the fit window")
    logd = np.log(d)
    slope, intercept = np.polyfit(t, logd, 1)
    pred = slope * t + intercept
    ss_res = float(np.sum((logd - pred) ** 2))
    ss_tot = float(np.sum((logd - logd.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(alpha=float(slope), C=float(np.exp(intercept)), r2=r2,
                    window=(float(t[0]), float(t[-1])), n_points=int(t.size))


def stepper_equilibrium(model, grid, tol=1e-13):
    """Fixed point of the discrete time-stepper with no delay.

    The profile the simulation itself relaxes to: it satisfies
    f_{j+1} = f_j exp(-k(x_j, lam*m) dx) with unit mass and an activity
    m consistent with the midpoint quadrature of k f.  It sits within
    O(dx) of the cell-exact stationary profile of solve_steady_state;
    measuring a relaxation rate from a trace is only meaningful against
    this profile, because the distance to any other reference saturates
    at that O(dx) offset.  Returned as a SteadyState so it can be
    passed to run(steady=...)."""
    from .steady_state import SteadyState

    mids = grid.midpoints
    dx = grid.dx

    def profile(m):
        s = np.exp(-model.rate(mids, m) * dx)
        f = np.empty(grid.n_cells)
        f[0] = 1.0
        np.cumprod(s[:-1], out=f[1:])
        return f / (f.sum() * dx)

    def phi(m):
        f = profile(m)
        return float(np.dot(model.rate(mids, m), f)) * dx - m

    a, b = 0.0, model.k1
    fa = phi(a)
    if fa <= 0.0:
        m_star = a
    else:
        for _ in range(200):
            mid = 0.5 * (a + b)
            fm = phi(mid)
            if fm == 0.0 or (b - a) < tol * max(1.0, mid):
                break
            if fm > 0.0:
                a = mid
            else:
                b = mid
        m_star = 0.5 * (a + b)
    F = profile(m_star)
    k_mid = np.asarray(model.rate(mids, m_star))
    if grid.n_cells >= 3:
        dF = (F[2:] - F[:-2]) / (2.0 * dx)
        residual_ode = float(np.max(np.abs(dF + k_mid[1:-1] * F[1:-1])))
    else:
        residual_ode = 0.0
    return SteadyState(M=m_star, F=F, lam=float(model.lam),
                       residual_ode=residual_ode,
                       residual_activity=abs(phi(m_star)))
