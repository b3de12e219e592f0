"""
Operational weak-measurement pipeline.

couple -> evolve -> postselect -> pointer mean, then the weak-coupling
limit.  The coupling exp(-i g S (x) P_M) is applied exactly: with
S = sum_k s_k Pi_k, the joint state becomes sum_k Pi_k|in> (x) m(q - g s_k).
The first-order expansion is kept alongside as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import hilbert as hb
from . import meter as mt
from .errors import NotHermitian, NotUnitary, UndefinedWeakValue, ZeroPostselection
from .hilbert import Operator, StateVector
from .meter import BranchMeterState, GaussianSpec
from .scenarios import Scenario

__all__ = [
    "JointState",
    "CouplingSpec",
    "GSchedule",
    "WeakValueEstimate",
    "MonteCarloEstimate",
    "couple_exact",
    "couple_linearized",
    "evolve",
    "postselect",
    "joint_inner",
    "joint_norm_squared",
    "joint_distance",
    "linearization_error",
    "pointer_mean_postselected",
    "neville_extrapolate",
    "operational_weak_value",
    "delta_sweep_weak_value",
    "default_deltas",
    "monte_carlo_weak_value",
]

OVERLAP_TOL = 1e-12
MIN_PROBABILITY = 1e-30
RICHARDSON_LEVELS = 3


@dataclass(frozen=True)
class JointState:
    """sum_k |psi_k> (x) |phi_k>."""

    branches: tuple

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))


@dataclass(frozen=True)
class CouplingSpec:
    observable: Operator
    g: float

    def __post_init__(self):
        if not hb.is_hermitian(self.observable):
            raise NotHermitian("coupling observable must be Hermitian")


@dataclass(frozen=True)
class GSchedule:
    g_max: float = 0.1
    ratio: float = 0.5
    count: int = 8

    def __post_init__(self):
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if self.count < 3:
            raise ValueError("a schedule needs at least three couplings")
        if not self.g_max > 0:
            raise ValueError("g_max must be positive")

    @classmethod
    def for_delta(cls, delta: float, ratio: float = 0.5, count: int = 8) -> "GSchedule":
        return cls(0.1 * delta, ratio, count)

    def values(self) -> np.ndarray:
        return self.g_max * self.ratio ** np.arange(self.count)


@dataclass(frozen=True)
class WeakValueEstimate:
    value: float
    per_g_table: tuple
    residual: float
    postselection_probabilities: tuple
    variable: str = "g"
    method: str = f"richardson (polynomial in g^2, {RICHARDSON_LEVELS} levels)"


class MonteCarloEstimate(NamedTuple):
    estimate: float
    stderr: float
    accepted: int
    n_runs: int
    probability: float
    exact: float


# ---------------------------------------------------------------------------
# joint-state mechanics

def couple_exact(state: StateVector, meter: BranchMeterState, c: CouplingSpec) -> JointState:
    if c.g == 0:
        return JointState(((state, meter),))
    dec = hb.spectral_decompose(c.observable)
    branches = []
    for s, proj in zip(dec.eigenvalues, dec.projectors):
        part = hb.apply(proj, state)
        if part.norm_squared() < 1e-30:
            continue
        branches.append((part, mt.shift_branches(meter, c.g * s)))
    return JointState(tuple(branches))


def _momentum_action(meter: BranchMeterState) -> BranchMeterState:
    # i P_M acting on a Gaussian branch gives the derivative-of-Gaussian branch
    out = []
    for b in meter.branches:
        if b.kind != mt.GAUSSIAN:
            raise ValueError("linearized coupling needs a Gaussian pointer state")
        out.append(mt.MeterBranch(b.coefficient, b.shift, mt.DERIVATIVE))
    return BranchMeterState(meter.spec, tuple(out))


def couple_linearized(state: StateVector, meter: BranchMeterState, c: CouplingSpec) -> JointState:
    """First-order coupling |in>|m> - i g S|in> P_M|m>."""
    source = hb.apply(c.observable, state)
    if c.g == 0 or not np.any(source.amplitudes):
        return JointState(((state, meter),))
    return JointState(((state, meter), (source.scaled(c.g), _momentum_action(meter))))


def evolve(j: JointState, u: Operator) -> JointState:
    if not hb.check_unitary(u):
        raise NotUnitary("system evolution must be unitary")
    return JointState(tuple((hb.apply(u, psi), phi) for psi, phi in j.branches))


def postselect(j: JointState, f: StateVector) -> tuple[BranchMeterState, float]:
    """Project the system onto |f>; returns the unnormalized pointer state and its norm^2."""
    spec = j.branches[0][1].spec
    acc = BranchMeterState(spec, ())
    for psi, phi in j.branches:
        amp = hb.inner(f, psi)
        if amp != 0:
            acc = acc + phi.scaled(amp)
    acc = acc.merged()
    return acc, min(max(mt.norm_squared(acc), 0.0), 1.0)


def joint_inner(a: JointState, b: JointState) -> complex:
    total = 0j
    for psi1, phi1 in a.branches:
        for psi2, phi2 in b.branches:
            total += hb.inner(psi1, psi2) * mt.meter_inner(phi1, phi2)
    return total


def joint_norm_squared(j: JointState) -> float:
    return float(joint_inner(j, j).real)


def joint_distance(a: JointState, b: JointState) -> float:
    """||a - b|| via Gram sums; loses relative accuracy once the distance drops below ~1e-7."""
    d2 = joint_norm_squared(a) + joint_norm_squared(b) - 2.0 * joint_inner(a, b).real
    return math.sqrt(max(d2, 0.0))


def _excess(x: float) -> float:
    # 1 + x - (1 + 2x) e^{-x}, summed as a series when x is small
    if x > 0.5:
        return 1.0 + x - (1.0 + 2.0 * x) * math.exp(-x)
    total, term, n = 0.0, x, 1
    while True:
        n += 1
        term *= -x / n
        inc = term * (2 * n - 1) * -1
        total += inc
        if abs(inc) <= 1e-18 * abs(total) or n > 60:
            return total


def linearization_error(state: StateVector, spec: GaussianSpec, c: CouplingSpec) -> float:
    """
    ||exact - linearized|| for coupling the Gaussian pointer to ``state``.

    The difference splits over eigenprojectors as
    sum_k Pi_k|in> (x) (m_{g s_k} - m - g s_k (-m')), whose pointer factors
    have norm^2 2[1 + x - (1 + 2x) e^{-x}] with x = (g s_k)^2 / (8 delta^2).
    Evaluating that in series form keeps full relative precision at tiny g,
    where the generic Gram-sum distance cancels catastrophically.
    """
    if c.g == 0:
        return 0.0
    dec = hb.spectral_decompose(c.observable)
    total = 0.0
    for s, proj in zip(dec.eigenvalues, dec.projectors):
        w = hb.apply(proj, state).norm_squared()
        x = (c.g * s) ** 2 / (8.0 * spec.delta ** 2)
        total += w * 2.0 * _excess(x)
    return math.sqrt(max(total, 0.0))


# ---------------------------------------------------------------------------
# pointer statistics for a scenario

def _postselected_meter(s: Scenario, g: float) -> tuple[BranchMeterState, float]:
    j = couple_exact(s.preselected, mt.init_gaussian(s.meter), CouplingSpec(s.observable, g))
    for _, u in s.stages:
        j = evolve(j, u)
    return postselect(j, s.postselected)


def _pointer_mean(s: Scenario, g: float) -> tuple[float, float]:
    meter, prob = _postselected_meter(s, g)
    if prob < MIN_PROBABILITY:
        raise ZeroPostselection(f"postselection probability {prob:.3g} at g={g}")
    return mt.q_mean(meter), prob


def pointer_mean_postselected(s: Scenario, g: float) -> tuple[float, float]:
    """Exact postselected pointer mean f<Q_M> and postselection probability at coupling g."""
    if g < 0:
        raise ValueError("coupling strength must be non-negative")
    return _pointer_mean(s, g)


def _require_defined(s: Scenario) -> None:
    if abs(s.postselection_amplitude()) < OVERLAP_TOL:
        raise UndefinedWeakValue(
            f"<f|U_sys|in> vanishes for scenario {s.name!r}; weak value undefined")


def neville_extrapolate(x: Sequence[float], y: Sequence[float],
                        levels: int = RICHARDSON_LEVELS) -> tuple[float, float]:
    """
    Extrapolate y(x) to x = 0 with a polynomial through the last ``levels`` nodes.

    Returns (value, residual) where the residual is the difference from the
    same extrapolation one node earlier.  With geometric nodes x = g^2 this
    is exactly the Richardson tableau.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if len(x) < levels:
        raise ValueError(f"need at least {levels} nodes, got {len(x)}")

    def at_zero(xs, ys):
        p = list(ys)
        n = len(xs)
        for m in range(1, n):
            for i in range(n - m):
                p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i])
        return p[0]

    best = at_zero(x[-levels:], y[-levels:])
    if len(x) > levels:
        prev = at_zero(x[-levels - 1:-1], y[-levels - 1:-1])
    else:
        prev = y[-1]
    return float(best), float(abs(best - prev))


def operational_weak_value(s: Scenario, sched: Optional[GSchedule] = None) -> WeakValueEstimate:
    """Extract Re S_w from pointer means along a shrinking-g schedule."""
    _require_defined(s)
    sched = sched or GSchedule.for_delta(s.meter.delta)
    rows, probs = [], []
    for g in map(float, sched.values()):
        mean, prob = _pointer_mean(s, g)
        rows.append((g, mean, mean / g))
        probs.append(prob)
    value, residual = neville_extrapolate([r[0] ** 2 for r in rows], [r[2] for r in rows])
    return WeakValueEstimate(value, tuple(rows), residual, tuple(probs))


def default_deltas(delta: float, count: int = 8) -> list:
    return [delta * 2.0 ** k for k in range(count)]


def delta_sweep_weak_value(s: Scenario, g: float,
                           deltas: Optional[Sequence[float]] = None) -> WeakValueEstimate:
    """Weak value from the wide-pointer limit at fixed g, extrapolated in 1/delta^2."""
    if not g > 0:
        raise ValueError("delta sweep needs g > 0")
    _require_defined(s)
    deltas = list(deltas) if deltas is not None else default_deltas(s.meter.delta)
    if any(b <= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly increasing")
    rows, probs = [], []
    for d in map(float, deltas):
        mean, prob = _pointer_mean(s.with_delta(d), g)
        rows.append((d, mean, mean / g))
        probs.append(prob)
    value, residual = neville_extrapolate([1.0 / r[0] ** 2 for r in rows], [r[2] for r in rows])
    return WeakValueEstimate(
        value, tuple(rows), residual, tuple(probs), variable="delta",
        method=f"richardson (polynomial in 1/delta^2, {RICHARDSON_LEVELS} levels)")


def monte_carlo_weak_value(s: Scenario, g: float, n_runs: int,
                           seed: int) -> MonteCarloEstimate:
    """
    Simulate repeated runs: Bernoulli postselection, then a pointer reading per kept run.

    The estimate is the sample mean over g with standard error
    sample_std / (g sqrt(accepted)).
    """
    if not g > 0:
        raise ValueError("Monte Carlo needs g > 0")
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    meter, prob = _postselected_meter(s, g)
    if prob < MIN_PROBABILITY:
        raise ZeroPostselection(f"postselection probability {prob:.3g} at g={g}")
    exact = mt.q_mean(meter) / g
    rng = np.random.default_rng(seed)
    accepted = int(rng.binomial(n_runs, prob))
    if accepted == 0:
        raise ZeroPostselection(f"no run out of {n_runs} passed postselection")
    q = mt.sample_q(mt.render_grid(meter), accepted, rng=rng)
    est = float(np.mean(q)) / g
    std = float(np.std(q, ddof=1)) if accepted > 1 else float("inf")
    return MonteCarloEstimate(est, std / (g * math.sqrt(accepted)), accepted, n_runs, prob, exact)
