"""
Analytic weak values and representativeness diagnostics.

A weak value is *well-behaved* when the probe's source state S|in> keeps a
component along the undisturbed state at every point up to detection.
When that overlap vanishes the probe has pushed the system into an
orthogonal state ("derailed" it), and the resulting weak value says
nothing about the undisturbed system even though it stays finite.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import hilbert as hb
from .errors import UndefinedWeakValue
from .hilbert import StateVector
from .scenarios import Scenario

__all__ = [
    "BehaviorClass",
    "TracePoint",
    "DiagnosticsReport",
    "NULL_PROJECTION_CAVEAT",
    "analytic_weak_value",
    "s_expectation",
    "source_norm",
    "derailment_trace",
    "classify",
    "channel_weak_values",
]

DEFAULT_TOL = 1e-10

NULL_PROJECTION_CAVEAT = (
    "S|in> = 0: the weak value is zero, but whether a projection onto the null "
    "vector counts as leaving the undisturbed ray is a matter of judgment; "
    "this class asserts neither representativeness nor derailment."
)


class BehaviorClass(str, enum.Enum):
    WELL_BEHAVED = "WellBehaved"
    DERAILED_AT_INSERTION = "DerailedAtInsertion"
    NULL_PROJECTION = "NullProjection"
    DERAILED_UNDER_EVOLUTION = "DerailedUnderEvolution"
    UNDEFINED_POSTSELECTION = "UndefinedPostselection"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class TracePoint:
    stage: str
    full_overlap: complex
    live_overlap: complex


@dataclass(frozen=True)
class DiagnosticsReport:
    behavior: BehaviorClass
    s_expectation: complex
    source_norm: float
    postselection_overlap: complex
    trace: tuple
    analytic_weak_value: Optional[complex]

    @property
    def caveat(self) -> Optional[str]:
        if self.behavior is BehaviorClass.NULL_PROJECTION:
            return NULL_PROJECTION_CAVEAT
        return None


def analytic_weak_value(s: Scenario, tol: float = 1e-12) -> complex:
    """<f|U_sys S|in> / <f|U_sys|in>."""
    u = s.system_unitary()
    denom = hb.inner(s.postselected, hb.apply(u, s.preselected))
    if abs(denom) < tol:
        raise UndefinedWeakValue(f"<f|U_sys|in> = {denom:.3g} vanishes for {s.name!r}")
    numer = hb.inner(s.postselected, hb.apply(u, hb.apply(s.observable, s.preselected)))
    return numer / denom


def s_expectation(s: Scenario) -> complex:
    return hb.inner(s.preselected, hb.apply(s.observable, s.preselected))


def source_norm(s: Scenario) -> float:
    """||S|in>||."""
    return hb.apply(s.observable, s.preselected).norm()


def _live(v: StateVector, live: Sequence) -> StateVector:
    mask = np.array([lab in live for lab in v.labels])
    return StateVector(v.labels, np.where(mask, v.amplitudes, 0))


def derailment_trace(s: Scenario) -> tuple:
    """
    Overlap between the undisturbed state and the probe's source state at each stage.

    Both U|in> and U S|in> are propagated stage by stage.  ``live_overlap``
    restricts both to the scenario's live arms, so amplitude that has
    already left through an irrelevant detector does not count.
    """
    und = s.preselected
    src = hb.apply(s.observable, s.preselected)

    def point(label):
        return TracePoint(label, hb.inner(und, src),
                          hb.inner(_live(und, s.live_labels), _live(src, s.live_labels)))

    points = [point("probe")]
    for label, u in s.stages:
        und = hb.apply(u, und)
        src = hb.apply(u, src)
        points.append(point(label))
    return tuple(points)


def classify(s: Scenario, tol: float = DEFAULT_TOL) -> DiagnosticsReport:
    """
    Assign a BehaviorClass, checking conditions in a fixed order.

    1. |<f|U_sys|in>| < tol            -> UndefinedPostselection
    2. ||S|in>|| < tol                 -> NullProjection
    3. |<in|S|in>| < tol               -> DerailedAtInsertion
    4. stages present and the final live overlap < tol -> DerailedUnderEvolution
    5. otherwise                       -> WellBehaved

    Only the final stage enters rule 4; a transient zero that later revives
    is visible in the trace but does not change the class.
    """
    denom = s.postselection_amplitude()
    expect = s_expectation(s)
    snorm = source_norm(s)
    trace = derailment_trace(s)

    if abs(denom) < tol:
        behavior = BehaviorClass.UNDEFINED_POSTSELECTION
    elif snorm < tol:
        behavior = BehaviorClass.NULL_PROJECTION
    elif abs(expect) < tol:
        behavior = BehaviorClass.DERAILED_AT_INSERTION
    elif s.stages and abs(trace[-1].live_overlap) < tol:
        behavior = BehaviorClass.DERAILED_UNDER_EVOLUTION
    else:
        behavior = BehaviorClass.WELL_BEHAVED

    wv = None if behavior is BehaviorClass.UNDEFINED_POSTSELECTION else analytic_weak_value(s)
    return DiagnosticsReport(behavior, expect, snorm, denom, trace, wv)


def channel_weak_values(s: Scenario, channels: Sequence[StateVector],
                        tol: float = DEFAULT_TOL) -> list:
    """Weak value of the projector onto each (mutually orthogonal) channel."""
    for i, a in enumerate(channels):
        for b in channels[i + 1:]:
            if abs(hb.inner(a, b)) > tol * max(a.norm() * b.norm(), 1.0):
                raise ValueError("channels must be mutually orthogonal")
    return [analytic_weak_value(s.with_operator(hb.projector(c), "channel")) for c in channels]
