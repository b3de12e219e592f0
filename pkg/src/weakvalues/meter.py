"""
Gaussian pointer states of the measuring device.

The initial pointer wavefunction is real,

    m(q) = (2 pi delta^2)^(-1/4) exp(-q^2 / (4 delta^2)),

so that the position density |m(q)|^2 has standard deviation ``delta``.
A coupled, postselected pointer is a finite superposition of translated
copies of ``m`` (kind 0) and, for the linearized coupling, translated
copies of ``d/da m(q - a) = -m'(q - a)`` (kind 1).  All overlaps and first
moments between such branches have closed forms; everything here works on
those, and the grid representation exists only to cross-check them and to
draw Monte Carlo samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import BadWidth, RangeTooSmall, ZeroMeter

__all__ = [
    "GaussianSpec",
    "MeterBranch",
    "BranchMeterState",
    "GridMeterState",
    "init_gaussian",
    "derivative_branch",
    "shift_branches",
    "overlap_matrix",
    "moment_matrix",
    "meter_inner",
    "norm_squared",
    "q_mean",
    "default_grid_range",
    "render_grid",
    "grid_norm_squared",
    "grid_q_mean",
    "sample_q",
]

GAUSSIAN = 0
DERIVATIVE = 1
DEFAULT_GRID_POINTS = 2 ** 14


@dataclass(frozen=True)
class GaussianSpec:
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise BadWidth(f"pointer width must be positive, got {self.delta!r}")


@dataclass(frozen=True)
class MeterBranch:
    coefficient: complex
    shift: float
    kind: int = GAUSSIAN


@dataclass(frozen=True)
class BranchMeterState:
    """phi(q) = sum_k c_k f_k(q - shift_k), with f_k the branch profile."""

    spec: GaussianSpec
    branches: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))

    def scaled(self, factor: complex) -> "BranchMeterState":
        return BranchMeterState(self.spec, tuple(
            MeterBranch(factor * b.coefficient, b.shift, b.kind) for b in self.branches))

    def merged(self) -> "BranchMeterState":
        """Combine branches with identical shift and kind; drop exact zeros."""
        acc: dict = {}
        for b in self.branches:
            key = (b.shift, b.kind)
            acc[key] = acc.get(key, 0j) + complex(b.coefficient)
        return BranchMeterState(self.spec, tuple(
            MeterBranch(c, s, k) for (s, k), c in acc.items() if c != 0))

    def __add__(self, other: "BranchMeterState") -> "BranchMeterState":
        if other.spec != self.spec:
            raise ValueError("cannot add pointer states with different widths")
        return BranchMeterState(self.spec, self.branches + other.branches)

    def _arrays(self):
        c = np.array([b.coefficient for b in self.branches], dtype=complex)
        a = np.array([b.shift for b in self.branches], dtype=float)
        k = np.array([b.kind for b in self.branches], dtype=int)
        return c, a, k


@dataclass(frozen=True, eq=False)
class GridMeterState:
    q_min: float
    q_max: float
    n_points: int
    samples: np.ndarray

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("grid needs at least two points")
        if len(self.samples) != self.n_points:
            raise ValueError("sample count does not match n_points")

    @property
    def q(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.n_points)


def init_gaussian(spec: GaussianSpec) -> BranchMeterState:
    return BranchMeterState(spec, (MeterBranch(1.0 + 0j, 0.0, GAUSSIAN),))


def derivative_branch(spec: GaussianSpec, coefficient: complex = 1.0,
                      shift: float = 0.0) -> BranchMeterState:
    """The state -m'(q - shift) scaled by ``coefficient``; equals ``i P_M`` applied to m."""
    return BranchMeterState(spec, (MeterBranch(complex(coefficient), float(shift), DERIVATIVE),))


def shift_branches(m: BranchMeterState, amount: float) -> BranchMeterState:
    if amount == 0:
        return m
    return BranchMeterState(m.spec, tuple(
        MeterBranch(b.coefficient, b.shift + amount, b.kind) for b in m.branches))


def _kernels(spec: GaussianSpec, a_bra, k_bra, a_ket, k_ket):
    # K(a, b) = <f_a | f_b>,  M(a, b) = <f_a | Q | f_b>; kind-1 entries are
    # derivatives of the Gaussian-Gaussian kernels with respect to the shift.
    kk = 1.0 / (4.0 * spec.delta ** 2)
    a = np.asarray(a_bra, float)[:, None]
    b = np.asarray(a_ket, float)[None, :]
    ka = np.asarray(k_bra)[:, None]
    kb = np.asarray(k_ket)[None, :]
    u = a - b
    mid = 0.5 * (a + b)
    o = np.exp(-0.5 * kk * u * u)

    over = np.where(
        (ka == 0) & (kb == 0), o,
        np.where((ka == 0) & (kb == 1), kk * u * o,
                 np.where((ka == 1) & (kb == 0), -kk * u * o,
                          (kk - kk * kk * u * u) * o)))
    mom = np.where(
        (ka == 0) & (kb == 0), mid * o,
        np.where((ka == 0) & (kb == 1), 0.5 * o + mid * kk * u * o,
                 np.where((ka == 1) & (kb == 0), 0.5 * o - mid * kk * u * o,
                          mid * (kk - kk * kk * u * u) * o)))
    return over, mom


def overlap_matrix(m: BranchMeterState) -> np.ndarray:
    _, a, k = m._arrays()
    return _kernels(m.spec, a, k, a, k)[0]


def moment_matrix(m: BranchMeterState) -> np.ndarray:
    _, a, k = m._arrays()
    return _kernels(m.spec, a, k, a, k)[1]


def meter_inner(m1: BranchMeterState, m2: BranchMeterState) -> complex:
    """<m1|m2> in closed form."""
    if m1.spec != m2.spec:
        raise ValueError("pointer states have different widths")
    if not m1.branches or not m2.branches:
        return 0j
    c1, a1, k1 = m1._arrays()
    c2, a2, k2 = m2._arrays()
    over, _ = _kernels(m1.spec, a1, k1, a2, k2)
    return complex(c1.conj() @ over @ c2)


def norm_squared(m: BranchMeterState) -> float:
    if not m.branches:
        return 0.0
    c, a, k = m._arrays()
    over, _ = _kernels(m.spec, a, k, a, k)
    return max(float((c.conj() @ over @ c).real), 0.0)


def q_mean(m: BranchMeterState) -> float:
    """Normalized pointer-position mean <phi|Q|phi>/<phi|phi>."""
    if not m.branches:
        raise ZeroMeter("pointer state has no branches")
    c, a, k = m._arrays()
    over, mom = _kernels(m.spec, a, k, a, k)
    n2 = float((c.conj() @ over @ c).real)
    if n2 <= 0.0:
        raise ZeroMeter("pointer state has zero norm")
    return float((c.conj() @ mom @ c).real) / n2


def _profile(spec: GaussianSpec, q: np.ndarray, shift: float, kind: int) -> np.ndarray:
    x = q - shift
    g = (2.0 * np.pi * spec.delta ** 2) ** -0.25 * np.exp(-x * x / (4.0 * spec.delta ** 2))
    if kind == DERIVATIVE:
        return x / (2.0 * spec.delta ** 2) * g
    return g


def default_grid_range(m: BranchMeterState, width: float = 12.0) -> tuple[float, float]:
    shifts = [b.shift for b in m.branches] or [0.0]
    d = m.spec.delta
    return min(shifts) - width * d, max(shifts) + width * d


def render_grid(m: BranchMeterState, q_min: Optional[float] = None,
                q_max: Optional[float] = None,
                n_points: int = DEFAULT_GRID_POINTS) -> GridMeterState:
    """Evaluate phi(q) on a uniform grid covering every branch +- 8 delta."""
    lo, hi = default_grid_range(m)
    q_min = lo if q_min is None else q_min
    q_max = hi if q_max is None else q_max
    shifts = [b.shift for b in m.branches] or [0.0]
    margin = 8.0 * m.spec.delta
    if q_min > min(shifts) - margin or q_max < max(shifts) + margin:
        raise RangeTooSmall(
            f"grid [{q_min}, {q_max}] does not cover shifts +- 8 delta")
    q = np.linspace(q_min, q_max, n_points)
    phi = np.zeros(n_points, dtype=complex)
    for b in m.branches:
        phi += b.coefficient * _profile(m.spec, q, b.shift, b.kind)
    return GridMeterState(float(q_min), float(q_max), int(n_points), phi)


def grid_norm_squared(grid: GridMeterState) -> float:
    return float(np.trapezoid(np.abs(grid.samples) ** 2, grid.q))


def grid_q_mean(grid: GridMeterState) -> float:
    dens = np.abs(grid.samples) ** 2
    q = grid.q
    n2 = np.trapezoid(dens, q)
    if n2 <= 0:
        raise ZeroMeter("grid pointer state has zero norm")
    return float(np.trapezoid(q * dens, q) / n2)


def sample_q(grid: GridMeterState, n: int, seed: Optional[int] = None,
             rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    Draw ``n`` pointer readings from |phi(q)|^2 by inverting the grid CDF.

    The CDF is the cumulative trapezoid integral of the density, and draws
    are linearly interpolated between grid nodes.  Pass either ``seed`` or
    an existing ``rng``.
    """
    dens = np.abs(grid.samples) ** 2
    q = grid.q
    steps = 0.5 * (dens[1:] + dens[:-1]) * np.diff(q)
    cdf = np.concatenate(([0.0], np.cumsum(steps)))
    total = cdf[-1]
    if total <= 0:
        raise ZeroMeter("cannot sample from a zero-norm pointer state")
    cdf /= total
    if rng is None:
        rng = np.random.default_rng(seed)
    u = rng.random(int(n))
    return np.interp(u, cdf, q)
