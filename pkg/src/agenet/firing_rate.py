"""Firing-rate families k(x, lam*mu) for the age-structured network.

A rate model maps the age x (time elapsed since a neuron's last
discharge) and the raw network activity mu to an instantaneous firing
rate.  The coupling strength lam is stored on the model and applied
internally, so every caller passes the unscaled activity.

All families are nonnegative, nondecreasing in both age and activity,
and bounded by k1.  k0 is the resting rate of an old neuron
(the large-age limit of k(., 0)).
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ConstantRate",
    "SmoothSaturatingRate",
    "StepRate",
    "RegimeEstimate",
    "estimate_xi",
    "half_rate_age",
    "weight_threshold_age",
    "moment_tail_constant",
]

# 5-point Gauss-Legendre rule on [-1, 1]; composite panels of this rule
# integrate the smooth rate families to machine precision.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)


def _check_domain(x, mu):
    if np.ndim(mu) != 0:
        raise ValueError("activity mu must be a scalar")
    if float(mu) < 0.0:
        raise ValueError("activity mu must be nonnegative")
    if np.any(np.asarray(x) < 0.0):
        raise ValueError("age x must be nonnegative")


def _match_shape(x, out):
    # scalar in, scalar out; array in, array out
    return float(out) if np.ndim(x) == 0 else out


def _panel_cumulative(rate_at, xs, panel=0.05):
    """Cumulative integral of rate_at over [0, x] for each x in xs.

    Consecutive sorted targets are bridged with Gauss panels no wider
    than `panel`, and the panel integrals are accumulated.  xs is a 1d
    float array; rate_at must accept a flat array of ages.
    """
    order = np.argsort(xs, kind="stable")
    edges = np.concatenate([[0.0], xs[order]])
    gaps = np.diff(edges)
    n_panels = np.maximum(np.ceil(gaps / panel).astype(int), 1)
    widths = gaps / n_panels
    starts = np.repeat(edges[:-1], n_panels)
    pw = np.repeat(widths, n_panels)
    first = np.concatenate([[0], np.cumsum(n_panels)[:-1]])
    within = np.arange(int(n_panels.sum())) - np.repeat(first, n_panels)
    a = starts + within * pw
    nodes = a[:, None] + (pw[:, None] * 0.5) * (_GL_X[None, :] + 1.0)
    vals = rate_at(nodes.ravel()).reshape(nodes.shape)
    panel_ints = (pw * 0.5) * (vals @ _GL_W)
    seg_ints = np.add.reduceat(panel_ints, first)
    out = np.empty_like(xs)
    out[order] = np.cumsum(seg_ints)
    return out


@dataclasses.dataclass(frozen=True)
class ConstantRate:
    """Age- and activity-independent rate, k(x, mu) = k0."""

    k0: float
    lam: float = 0.0

    def __post_init__(self):
        if self.k0 <= 0.0:
            raise ValueError("k0 must be positive")
        if self.lam < 0.0:
            raise ValueError("coupling lam must be nonnegative")

    @property
    def k1(self):
        return self.k0

    def rate(self, x, mu):
        _check_domain(x, mu)
        out = np.full(np.shape(x), self.k0)
        return _match_shape(x, out if out.ndim else self.k0)

    def cumulative(self, x, mu):
        _check_domain(x, mu)
        return _match_shape(x, self.k0 * np.asarray(x, dtype=float))


@dataclasses.dataclass(frozen=True)
class SmoothSaturatingRate:
    """Smooth saturating rate k(x, m) = gain(lam*m) * (1 - exp(-x/x_scale)).

    The activity gain k0 + (k1-k0)*(1 - exp(-mu/mu_scale)) rises from
    k0 at rest to k1 under strong drive, so the rate is nondecreasing
    in both arguments, bounded by k1, and k(x, 0) -> k0 for old ages.
    """

    k0: float
    k1: float
    lam: float = 0.0
    mu_scale: float = 1.0
    x_scale: float = 1.0

    def __post_init__(self):
        if self.k0 <= 0.0:
            raise ValueError("k0 must be positive")
        if self.k1 < self.k0:
            raise ValueError("k1 must be >= k0")
        if self.mu_scale <= 0.0 or self.x_scale <= 0.0:
            raise ValueError("mu_scale and x_scale must be positive")
        if self.lam < 0.0:
            raise ValueError("coupling lam must be nonnegative")

    def gain(self, mu):
        mu_eff = self.lam * float(mu)
        return self.k0 - (self.k1 - self.k0) * math.expm1(-mu_eff / self.mu_scale)

    def rate(self, x, mu):
        _check_domain(x, mu)
        xs = np.asarray(x, dtype=float)
        out = self.gain(mu) * (-np.expm1(-xs / self.x_scale))
        return _match_shape(x, out)

    def cumulative(self, x, mu):
        # composite Gauss quadrature; no closed form is assumed here
        _check_domain(x, mu)
        flat = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        out = _panel_cumulative(lambda z: self.rate(z, mu), flat)
        return _match_shape(x, out.reshape(np.shape(x)))


@dataclasses.dataclass(frozen=True)
class StepRate:
    """Hard-threshold rate: k(x, m) = 1 if x > sigma(lam*m), else 0.

    The threshold map sigma is nonincreasing with sigma(0) = sigma_plus
    and sigma(inf) = sigma_minus, so stronger activity lowers the
    firing threshold.  The built-in family is
    sigma(mu) = sigma_minus + (sigma_plus - sigma_minus)*exp(-decay*mu).

    A custom `sigma` callable may be supplied.  Pass `sigma_modulus`
    (a bound on |sigma'|) along with it; without one, regime
    estimation reports the Lipschitz modulus as unknown (xi = inf).
    The indicator is evaluated exactly, never smoothed.
    """

    sigma_plus: float = 0.5
    sigma_minus: float = 0.25
    lam: float = 0.0
    decay: float = 1.0
    sigma: Optional[Callable[[float], float]] = dataclasses.field(
        default=None, compare=False)
    sigma_modulus: Optional[float] = None

    def __post_init__(self):
        if not (0.0 < self.sigma_minus < self.sigma_plus < 1.0):
            raise ValueError(
                "thresholds must satisfy 0 < sigma_minus < sigma_plus < 1")
        if self.decay <= 0.0:
            raise ValueError("decay must be positive")
        if self.lam < 0.0:
            raise ValueError("coupling lam must be nonnegative")

    @property
    def k0(self):
        return 1.0

    @property
    def k1(self):
        return 1.0

    def threshold(self, mu):
        """Firing threshold sigma(lam*mu)."""
        mu_eff = self.lam * float(mu)
        if self.sigma is not None:
            return float(self.sigma(mu_eff))
        span = self.sigma_plus - self.sigma_minus
        return self.sigma_minus + span * math.exp(-self.decay * mu_eff)

    def rate(self, x, mu):
        _check_domain(x, mu)
        out = (np.asarray(x, dtype=float) > self.threshold(mu)).astype(float)
        return _match_shape(x, out)

    def cumulative(self, x, mu):
        _check_domain(x, mu)
        xs = np.asarray(x, dtype=float)
        out = np.maximum(0.0, xs - self.threshold(mu))
        return _match_shape(x, out)


@dataclasses.dataclass(frozen=True)
class RegimeEstimate:
    """Sampled Lipschitz modulus and the couplings it delimits.

    xi bounds how fast the rate profile moves in L1 per unit of
    activity.  lambda_weak is the largest coupling below which the
    sampled contraction factor stays under 1 (activity fixed points
    provably unique there); lambda_strong is the smallest coupling
    beyond which the factor, sampled over high activities, stays under
    1 again.  Both are sampled estimates, not certificates.
    """

    xi: float
    lambda_weak: float
    lambda_strong: float


def _xi_sampled(model, x_max, lo, hi, samples):
    # Monotonicity in mu makes |k(., b) - k(., a)| single-signed, so the
    # L1 difference collapses to |K(x_max, b) - K(x_max, a)|.
    mus = np.linspace(lo, hi, samples)
    kx = np.array([model.cumulative(x_max, m) for m in mus])
    i, j = np.triu_indices(samples, k=1)
    return float(np.max(np.abs(kx[j] - kx[i]) / (mus[j] - mus[i])))


def _contraction(model, lam, x_max, lo, hi, samples, f_inf_scale):
    probe = dataclasses.replace(model, lam=lam)
    xi = _xi_sampled(probe, x_max, lo, hi, samples)
    return 2.0 * model.k1 * xi * (f_inf_scale + model.k1)


def estimate_xi(model, x_max=10.0, mu_range=(0.0, 1.0), samples=33,
                f_inf_scale=1.0, mu_inf=None, lam_cap=1e4):
    """Estimate the L1-in-age Lipschitz modulus of mu -> k(., lam*mu).

    xi is the largest sampled difference quotient
        |K(x_max, mu2) - K(x_max, mu1)| / |mu2 - mu1|
    over all pairs drawn from mu_range (the integral is truncated at
    the horizon x_max).  lambda_weak and lambda_strong are found by
    bisection on the contraction factor
        2 * k1 * xi(lam) * (f_inf_scale + k1) < 1,
    sampled over (0, mu_range[1]) for the weak side and over
    (mu_inf, k1) for the strong side (mu_inf defaults to k1/10).
    """
    lo, hi = float(mu_range[0]), float(mu_range[1])
    if not (0.0 <= lo < hi):
        raise ValueError("mu_range must be nondegenerate and nonnegative")
    if samples < 2:
        raise ValueError("need at least two activity samples")
    if isinstance(model, StepRate) and model.sigma is not None \
            and model.sigma_modulus is None:
        # custom threshold map with no declared modulus: cannot certify
        return RegimeEstimate(xi=math.inf, lambda_weak=0.0,
                              lambda_strong=math.inf)

    xi = _xi_sampled(model, x_max, lo, hi, samples)
    k1 = model.k1

    def weak_factor(lam):
        return _contraction(model, lam, x_max, 0.0, hi, samples, f_inf_scale)

    if weak_factor(lam_cap) < 1.0:
        lambda_weak = math.inf
    else:
        a, b = 0.0, lam_cap
        for _ in range(60):
            mid = 0.5 * (a + b)
            if weak_factor(mid) < 1.0:
                a = mid
            else:
                b = mid
        lambda_weak = a

    m_inf = (k1 / 10.0) if mu_inf is None else float(mu_inf)
    hi_strong = k1 if k1 > m_inf else 2.0 * m_inf

    def strong_factor(lam):
        return _contraction(model, lam, x_max, m_inf, hi_strong, samples,
                            f_inf_scale)

    lams = np.geomspace(1e-3, lam_cap, 49)
    facs = np.array([strong_factor(l) for l in lams])
    if np.all(facs < 1.0):
        lambda_strong = 0.0
    elif facs[-1] >= 1.0:
        lambda_strong = math.inf
    else:
        j = int(np.max(np.nonzero(facs >= 1.0)[0]))
        a, b = lams[j], lams[j + 1]
        for _ in range(60):
            mid = 0.5 * (a + b)
            if strong_factor(mid) >= 1.0:
                a = mid
            else:
                b = mid
        lambda_strong = b

    return RegimeEstimate(xi=float(xi), lambda_weak=float(lambda_weak),
                          lambda_strong=float(lambda_strong))


def _rising_threshold(fn, target, x_cap=1e6):
    # smallest x with fn(x) >= target, for nondecreasing fn
    if fn(0.0) >= target:
        return 0.0
    hi = 1.0
    while fn(hi) < target:
        hi *= 2.0
        if hi > x_cap:
            raise ValueError("rate never reaches the requested level")
    lo = 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if fn(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def half_rate_age(model):
    """Smallest age x0 past which the resting rate stays >= k0/2.

    Monotonicity in mu extends the floor to every activity: for any
    mu >= 0, k(x, mu) >= k0/2 for x >= x0.
    """
    return _rising_threshold(lambda x: model.rate(x, 0.0), model.k0 / 2.0)


def weight_threshold_age(model, q):
    """Smallest age x0 >= 1 with k(x, 0) - q/x >= k0/2 for all x >= x0.

    This is the pivot used by the moment bound below; both sides of
    the inequality are monotone, so a doubling bracket plus bisection
    finds it.
    """
    if q < 0.0:
        raise ValueError("moment exponent q must be nonnegative")
    x0 = _rising_threshold(
        lambda x: model.rate(x, 0.0) - (q / x if x > 0.0 else math.inf),
        model.k0 / 2.0)
    return max(1.0, x0)


def moment_tail_constant(model, q):
    """The additive constant K_q in the running moment bound
    ||f_t||_{L1,q} <= ||f_0||_{L1,q} + K_q, with K_q = 2*x0^q*(1+k1/k0)."""
    x0 = weight_threshold_age(model, q)
    return 2.0 * x0 ** q * (1.0 + model.k1 / model.k0)
