"""Linearized dynamics around a stationary profile.

The generator acts on cell averages with upwind transport at speed 1,
absorption at the frozen rates k(x, lam*M), and a boundary row that
books every absorbed or advected unit of mass back into the youngest
cell.  Columns then sum to zero exactly, so the generator conserves
mass and 0 is one of its eigenvalues, mirroring the conservation law
of the flow itself.
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np
from scipy import linalg

from .errors import ConfigError
from .grid import AgeGrid

__all__ = [
    "GeneratorMatrix", "SpectrumReport", "DelaySystem",
    "DelaySpectrumReport", "build_generator", "spectrum",
    "build_delay_system", "delay_spectrum", "activity_readout",
]


@dataclasses.dataclass(frozen=True)
class GeneratorMatrix:
    A: np.ndarray
    grid: AgeGrid
    lam: float
    M: float
    F: np.ndarray
    rates: np.ndarray


@dataclasses.dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray   # sorted by descending real part
    zero_eigenvalue: complex  # the eigenvalue closest to 0
    gap: float                # largest real part among the others
    kernel_vector: np.ndarray  # zero-mode eigenvector, unit L1 mass
    kernel_match: float       # L1 distance to the stationary profile


@dataclasses.dataclass(frozen=True)
class DelaySystem:
    A: np.ndarray
    n_age: int
    n_lag: int
    dy: float
    readout: np.ndarray
    grid: AgeGrid
    lam: float
    M: float
    F: np.ndarray
    rates: np.ndarray


@dataclasses.dataclass(frozen=True)
class DelaySpectrumReport:
    eigenvalues: np.ndarray
    zero_eigenvalue: complex
    gap: float
    kernel_vector: np.ndarray  # age block unit L1 mass, lag block constant
    kernel_match: float
    lag_eigenvalue: float     # -1/dy, the (defective) lag transport mode
    age_gap: float


def build_generator(model, grid, steady):
    """Generator matrix at the stationary pair (F, M).

    Stencil per column j: 1/dx to cell j+1 (transport), -1/dx - k_j on
    the diagonal, k_j added to row 0 (the discharge functional feeding
    the boundary), and 1/dx from the last column into row 0 (mass
    advected past the age horizon re-enters, keeping the truncated
    operator conservative)."""
    if steady.F.shape != (grid.n_cells,):
        raise ConfigError([
            f"steady profile has {steady.F.shape[0]} cells but the grid "
            f"has {grid.n_cells}; recompute the steady state on this grid"])
    k = np.asarray(model.rate(grid.midpoints, steady.M), dtype=float)
    n = grid.n_cells
    dx = grid.dx
    A = np.zeros((n, n))
    idx = np.arange(n)
    A[idx, idx] = -1.0 / dx - k
    A[idx[1:], idx[:-1]] = 1.0 / dx
    A[0, :] += k
    A[0, -1] += 1.0 / dx
    return GeneratorMatrix(A=A, grid=grid, lam=float(model.lam),
                           M=float(steady.M), F=np.array(steady.F),
                           rates=k)


def _eig_sorted(A):
    w, V = linalg.eig(A)
    order = np.lexsort((np.abs(w.imag), -w.real))
    return w[order], V[:, order]


def _kernel_vector(w, V, dx, n_norm=None):
    """Eigenvector for the eigenvalue nearest 0, phase-fixed to be real
    and scaled to unit L1 mass (positive orientation) over its first
    n_norm entries."""
    i0 = int(np.argmin(np.abs(w)))
    v = V[:, i0]
    pivot = v[np.argmax(np.abs(v))]
    v = (v / pivot).real
    head = v if n_norm is None else v[:n_norm]
    mass = float(head.sum()) * dx
    if mass < 0.0:
        v = -v
        mass = -mass
    if mass == 0.0:
        raise ValueError("kernel eigenvector carries no mass")
    return i0, v / mass


def spectrum(gen, k_eigs=None):
    """Dense eigendecomposition of the generator.

    Reports the eigenvalues sorted by descending real part (all of
    them, or the k_eigs leading ones), the one nearest 0, the spectral
    gap (largest real part among the remaining modes, negative for a
    stable profile), the zero-mode eigenvector normalized as a density,
    and its L1 distance to the stationary profile."""
    w, V = _eig_sorted(gen.A)
    i0, v = _kernel_vector(w, V, gen.grid.dx)
    rest = np.delete(w, i0)
    gap = float(np.max(rest.real)) if rest.size else float("-inf")
    F_unit = gen.F / (float(gen.F.sum()) * gen.grid.dx)
    match = gen.grid.l1_distance(v, F_unit)
    eigs = w if k_eigs is None else w[:int(k_eigs)]
    return SpectrumReport(eigenvalues=eigs, zero_eigenvalue=complex(w[i0]),
                          gap=gap, kernel_vector=v, kernel_match=match)


def build_delay_system(model, grid, steady, kernel, y_grid):
    """Block system coupling the age density to the transported
    discharge history: [[A, 0], [B, T]] with A the plain generator,
    B feeding the discharge into the youngest lag cell, and T pure
    transport in the lag variable (history older than the lag horizon
    just leaves).

    The activity readout applies the kernel density sampled on the lag
    mesh, renormalized to unit sum, to the lag block of a state
    vector."""
    if kernel.is_dirac:
        raise ConfigError([
            "the Dirac kernel carries no history; analyze the plain "
            "generator instead of a delay system"])
    horizon = kernel.memory_horizon()
    if y_grid.x_max < horizon:
        warnings.warn(
            f"lag grid covers [0, {y_grid.x_max:g}] but the kernel's "
            f"memory horizon is {horizon:g}; the truncated tail is "
            "dropped", stacklevel=2)
    gen = build_generator(model, grid, steady)
    n_age, n_lag = grid.n_cells, y_grid.n_cells
    dy = y_grid.dx
    A21 = np.zeros((n_lag, n_age))
    A21[0, :] = gen.rates * grid.dx / dy
    A22 = np.zeros((n_lag, n_lag))
    li = np.arange(n_lag)
    A22[li, li] = -1.0 / dy
    A22[li[1:], li[:-1]] = 1.0 / dy
    A = np.block([[gen.A, np.zeros((n_age, n_lag))], [A21, A22]])
    w = kernel.density(y_grid.midpoints) * dy
    total = float(w.sum())
    if total <= 0.0:
        raise ConfigError(["kernel density vanishes on the lag grid"])
    w /= total
    readout = np.concatenate([np.zeros(n_age), w])
    return DelaySystem(A=A, n_age=n_age, n_lag=n_lag, dy=dy,
                       readout=readout, grid=grid, lam=gen.lam, M=gen.M,
                       F=gen.F, rates=gen.rates)


def activity_readout(system, v):
    """Activity carried by a state vector of the delay system: the
    renormalized kernel weights applied to its lag block."""
    v = np.asarray(v, dtype=float)
    if v.shape != (system.n_age + system.n_lag,):
        raise ValueError("state vector has the wrong length")
    return float(system.readout @ v)


def delay_spectrum(system, k_eigs=None):
    """Dense spectrum of the delay block system.

    The block triangular structure makes the exact spectrum the union
    of the age-block eigenvalues and -1/dy (an n_lag-fold defective
    transport mode, which dense solvers scatter into a cluster left of
    the age gap).  The age gap is therefore also computed from the age
    block alone and reported separately."""
    w, V = _eig_sorted(system.A)
    i0, v = _kernel_vector(w, V, system.grid.dx, n_norm=system.n_age)
    rest = np.delete(w, i0)
    gap = float(np.max(rest.real)) if rest.size else float("-inf")
    F_unit = system.F / (float(system.F.sum()) * system.grid.dx)
    match = system.grid.l1_distance(v[:system.n_age], F_unit)
    w_age, _ = _eig_sorted(system.A[:system.n_age, :system.n_age])
    j0 = int(np.argmin(np.abs(w_age)))
    rest_age = np.delete(w_age, j0)
    age_gap = float(np.max(rest_age.real)) if rest_age.size else float("-inf")
    eigs = w if k_eigs is None else w[:int(k_eigs)]
    return DelaySpectrumReport(
        eigenvalues=eigs, zero_eigenvalue=complex(w[i0]), gap=gap,
        kernel_vector=v, kernel_match=match,
        lag_eigenvalue=-1.0 / system.dy, age_gap=age_gap)
