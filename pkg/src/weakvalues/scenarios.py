"""
Pre/postselected interferometer scenarios.

A :class:`Scenario` bundles everything one weak-measurement run needs:
the state just before the probe, the probed observable, the ordered
unitary stages between probe and detection, the postselected state, the
subset of arms that remain "live" for the derailment analysis, and the
pointer width.

Beamsplitter convention (used for every splitter built here): the first
input goes to ``(out1 + i out2)/sqrt(2)`` and the second input to
``(out2 + i out1)/sqrt(2)``.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from . import hilbert as hb
from .errors import SchemaError, UnknownLabel, ValidationError
from .hilbert import Operator, StateVector
from .meter import GaussianSpec

__all__ = [
    "CONVENTION",
    "BeamsplitterSpec",
    "Finding",
    "Scenario",
    "beamsplitter_unitary",
    "sigma_z",
    "build_simple_mzi",
    "build_cheshire",
    "build_nested_mzi",
    "build_appendix_a",
    "BUILTINS",
    "builtin",
    "builtin_path",
    "load_scenario",
    "load_scenario_file",
    "serialize_scenario",
    "dump_scenario",
    "scenario_hash",
    "validate_scenario",
]

log = logging.getLogger(__name__)

CONVENTION = (
    "beamsplitter: in1 -> (out1 + i out2)/sqrt2, in2 -> (out2 + i out1)/sqrt2; "
    "sigma_z = -i(|V><H| - |H><V|) from |+-> = (|V> +- i|H>)/sqrt2; "
    "pointer: |m(q)|^2 gaussian with standard deviation delta; hbar = 1"
)

SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class BeamsplitterSpec:
    input_labels: tuple
    output_labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "input_labels", tuple(self.input_labels))
        object.__setattr__(self, "output_labels", tuple(self.output_labels))
        if len(self.input_labels) != 2 or len(self.output_labels) != 2:
            raise ValueError("a beamsplitter has exactly two inputs and two outputs")


@dataclass(frozen=True)
class Finding:
    code: str
    message: str

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    basis: tuple
    preselected: StateVector
    observable: Operator
    stages: tuple
    postselected: StateVector
    live_labels: tuple = ()
    meter: GaussianSpec = GaussianSpec(1.0)
    observable_name: str = "S"
    observables: Mapping[str, Operator] = field(default_factory=dict)
    convention: str = CONVENTION

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(self.basis))
        object.__setattr__(self, "stages", tuple((str(l), op) for l, op in self.stages))
        live = tuple(self.live_labels) if self.live_labels else self.basis
        object.__setattr__(self, "live_labels", live)
        obs = dict(self.observables)
        obs.setdefault(self.observable_name, self.observable)
        object.__setattr__(self, "observables", obs)

    def with_observable(self, name: str) -> "Scenario":
        if name not in self.observables:
            raise UnknownLabel(
                f"observable {name!r} not in {sorted(self.observables)}")
        return replace(self, observable=self.observables[name], observable_name=name)

    def with_operator(self, op: Operator, name: str = "S") -> "Scenario":
        return replace(self, observable=op, observable_name=name)

    def with_postselection(self, f: StateVector) -> "Scenario":
        return replace(self, postselected=f)

    def with_delta(self, delta: float) -> "Scenario":
        return replace(self, meter=GaussianSpec(delta))

    def system_unitary(self) -> Operator:
        """U_sys: the stages multiplied in order (first stage acts first)."""
        u = hb.identity(self.basis)
        for _, op in self.stages:
            u = op @ u
        return u

    def postselection_amplitude(self) -> complex:
        """<f|U_sys|in>."""
        return hb.inner(self.postselected, hb.apply(self.system_unitary(), self.preselected))


def _index(basis: Sequence, label) -> int:
    try:
        return basis.index(label)
    except ValueError:
        raise UnknownLabel(label) from None


def beamsplitter_unitary(specs: Union[BeamsplitterSpec, Iterable[BeamsplitterSpec]],
                         basis: Iterable) -> Operator:
    """
    Unitary for one or more balanced splitters acting on disjoint arms.

    When the output arms differ from the input arms, the output columns are
    sent back to the inputs (out1 -> in1, out2 -> in2) to complete the
    unitary; those arms are empty when the splitter acts in every scenario
    built here.  All other labels pass through unchanged.
    """
    if isinstance(specs, BeamsplitterSpec):
        specs = [specs]
    basis = tuple(basis)
    u = np.eye(len(basis), dtype=complex)
    touched: set = set()
    for spec in specs:
        i1, i2 = (_index(basis, lab) for lab in spec.input_labels)
        o1, o2 = (_index(basis, lab) for lab in spec.output_labels)
        ins, outs = {i1, i2}, {o1, o2}
        if len(ins) != 2 or len(outs) != 2:
            raise ValueError("beamsplitter arms must be distinct")
        if ins & outs and ins != outs:
            raise ValueError("beamsplitter inputs and outputs partially overlap")
        if (ins | outs) & touched:
            raise ValueError("beamsplitters in one stage must act on disjoint arms")
        touched |= ins | outs
        for idx in ins | outs:
            u[:, idx] = 0.0
        u[o1, i1] = SQRT_HALF
        u[o2, i1] = 1j * SQRT_HALF
        u[o2, i2] = SQRT_HALF
        u[o1, i2] = 1j * SQRT_HALF
        if ins != outs:
            u[i1, o1] = 1.0
            u[i2, o2] = 1.0
    return Operator(basis, u)


def sigma_z() -> Operator:
    """Circular-polarization observable on the (H, V) basis."""
    pol = ("H", "V")
    h = hb.basis_state(pol, "H").amplitudes
    v = hb.basis_state(pol, "V").amplitudes
    return Operator(pol, -1j * (np.outer(v, h) - np.outer(h, v)))


def build_simple_mzi(delta: float = 1.0) -> Scenario:
    basis = ("L", "R", "L'", "R'")
    pre = hb.state_from_amplitudes(basis, {"L": SQRT_HALF, "R": 1j * SQRT_HALF})
    bs2 = beamsplitter_unitary(BeamsplitterSpec(("L", "R"), ("L'", "R'")), basis)
    observables = {
        "Pi_L": hb.projector(hb.basis_state(basis, "L")),
        "Pi_R": hb.projector(hb.basis_state(basis, "R")),
    }
    return Scenario(
        name="simple-mzi",
        basis=basis,
        preselected=pre,
        observable=observables["Pi_L"],
        observable_name="Pi_L",
        observables=observables,
        stages=(("BS2", bs2),),
        postselected=hb.basis_state(basis, "R'"),
        meter=GaussianSpec(delta),
    )


def build_cheshire(delta: float = 1.0, observable: str = "sigma_z_R") -> Scenario:
    path = ("L", "R", "L'", "R'")
    pol = ("H", "V")
    basis = tuple((p, s) for p in path for s in pol)
    pre = hb.state_from_amplitudes(
        basis, {("R", "V"): SQRT_HALF, ("L", "H"): SQRT_HALF})
    bs2 = beamsplitter_unitary(
        [BeamsplitterSpec((("L", s), ("R", s)), (("L'", s), ("R'", s))) for s in pol],
        basis)
    pi_l = hb.projector(hb.basis_state(path, "L"))
    pi_r = hb.projector(hb.basis_state(path, "R"))
    sz = sigma_z()
    observables = {
        "Pi_L": hb.tensor(pi_l, hb.identity(pol)),
        "Pi_R": hb.tensor(pi_r, hb.identity(pol)),
        "sigma_z_L": hb.tensor(pi_l, sz),
        "sigma_z_R": hb.tensor(pi_r, sz),
    }
    return Scenario(
        name="cheshire",
        basis=basis,
        preselected=pre,
        observable=observables[observable],
        observable_name=observable,
        observables=observables,
        stages=(("BS2", bs2),),
        postselected=hb.basis_state(basis, ("L'", "H")),
        meter=GaussianSpec(delta),
    )


def build_nested_mzi(delta: float = 1.0) -> Scenario:
    basis = ("A", "B", "C", "E", "D1", "D2", "D3")
    pre = hb.state_from_amplitudes(
        basis, {"A": 1j * math.sqrt(2.0) / 2.0, "B": 0.5j, "C": 0.5})
    bs3 = beamsplitter_unitary(BeamsplitterSpec(("B", "C"), ("D3", "E")), basis)
    bs4 = beamsplitter_unitary(BeamsplitterSpec(("A", "E"), ("D2", "D1")), basis)
    observables = {
        f"Pi_{arm}": hb.projector(hb.basis_state(basis, arm)) for arm in ("A", "B", "C", "E")
    }
    return Scenario(
        name="nested-mzi",
        basis=basis,
        preselected=pre,
        observable=observables["Pi_B"],
        observable_name="Pi_B",
        observables=observables,
        stages=(("BS3", bs3), ("BS4", bs4)),
        postselected=hb.basis_state(basis, "D2"),
        live_labels=tuple(lab for lab in basis if lab != "D3"),
        meter=GaussianSpec(delta),
    )


def build_appendix_a(delta: float = 1.0) -> Scenario:
    basis = ("a", "b", "d")
    pre = hb.state_from_amplitudes(basis, {"a": SQRT_HALF, "b": SQRT_HALF})
    observables = {
        "Pi_d": hb.projector(hb.basis_state(basis, "d")),
        "Pi_a": hb.projector(hb.basis_state(basis, "a")),
    }
    return Scenario(
        name="appendix-a",
        basis=basis,
        preselected=pre,
        observable=observables["Pi_d"],
        observable_name="Pi_d",
        observables=observables,
        stages=(),
        postselected=hb.basis_state(basis, "a"),
        meter=GaussianSpec(delta),
    )


BUILTINS = {
    "simple-mzi": build_simple_mzi,
    "cheshire": build_cheshire,
    "nested-mzi": build_nested_mzi,
    "appendix-a": build_appendix_a,
}


def builtin(name: str, observable: Optional[str] = None) -> Scenario:
    try:
        s = BUILTINS[name]()
    except KeyError:
        raise UnknownLabel(f"no built-in scenario {name!r}; choose from {sorted(BUILTINS)}") from None
    return s.with_observable(observable) if observable else s


def builtin_path(name: str) -> Path:
    return Path(str(resources.files("weakvalues") / "data" / f"{name}.json"))


# ---------------------------------------------------------------------------
# validation

def validate_scenario(s: Scenario) -> list:
    findings = []
    basis = s.basis
    for what, vec in (("preselected", s.preselected), ("postselected", s.postselected)):
        if vec.labels != basis:
            findings.append(Finding("space_mismatch", f"{what} state is not on the scenario basis"))
        elif abs(vec.norm_squared() - 1.0) > 1e-12:
            findings.append(Finding(
                "not_normalized", f"{what} state not normalized (norm^2 = {vec.norm_squared():.3g})"))
    for name, op in {**s.observables, s.observable_name: s.observable}.items():
        if op.labels != basis:
            findings.append(Finding("space_mismatch", f"observable {name} is not on the scenario basis"))
        elif not hb.is_hermitian(op):
            findings.append(Finding("not_hermitian", f"observable not Hermitian: {name}"))
    for label, op in s.stages:
        if op.labels != basis:
            findings.append(Finding("space_mismatch", f"stage {label} is not on the scenario basis"))
        elif not hb.check_unitary(op):
            findings.append(Finding("not_unitary", f"stage not unitary: {label}"))
    unknown = [lab for lab in s.live_labels if lab not in basis]
    if unknown:
        findings.append(Finding("unknown_label", f"live labels not in basis: {unknown}"))
    if not findings and abs(s.postselection_amplitude()) < 1e-12:
        findings.append(Finding(
            "vanishing_overlap", "vanishing postselection overlap <f|U_sys|in> = 0"))
    return findings


# ---------------------------------------------------------------------------
# JSON documents

def _complex(pair, where: str) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise SchemaError(f"{where}: complex numbers are written as [re, im], got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def _pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _require(doc: Mapping, key: str, where: str = "scenario"):
    if key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    return doc[key]


def _parse_state(doc, basis, where: str) -> StateVector:
    if not isinstance(doc, Mapping):
        raise SchemaError(f"{where}: expected a map label -> [re, im]")
    amps = {}
    for key, value in doc.items():
        lab = hb.parse_label(key)
        if lab not in basis:
            raise ValidationError([Finding("unknown_label", f"{where}: unknown label {key!r}")])
        amps[lab] = _complex(value, f"{where}[{key}]")
    state = hb.state_from_amplitudes(basis, amps)
    n2 = state.norm_squared()
    if n2 == 0:
        raise ValidationError([Finding("zero_state", f"{where}: zero vector")])
    if abs(math.sqrt(n2) - 1.0) > 1e-6:
        log.warning("%s state has norm %.6g; normalizing", where, math.sqrt(n2))
        state = state.normalize()
    return state


def _parse_matrix(rows, basis, where: str) -> Operator:
    n = len(basis)
    if not isinstance(rows, list) or len(rows) != n or any(
            not isinstance(r, list) or len(r) != n for r in rows):
        raise SchemaError(f"{where}: matrix must be {n}x{n} rows of [re, im] pairs")
    mat = np.array([[_complex(x, where) for x in row] for row in rows], dtype=complex)
    return Operator(basis, mat)


def _parse_observable(doc, basis, where: str) -> Operator:
    if not isinstance(doc, Mapping):
        raise SchemaError(f"{where}: expected an object")
    if "projector_onto" in doc:
        return hb.projector(_parse_state(doc["projector_onto"], basis, where))
    if "matrix" in doc:
        return _parse_matrix(doc["matrix"], basis, where)
    raise SchemaError(f"{where}: needs 'projector_onto' or 'matrix'")


def _parse_splitters(doc, basis, where: str) -> Operator:
    docs = doc if isinstance(doc, list) else [doc]
    specs = []
    for d in docs:
        try:
            ins = [hb.parse_label(x) for x in d["inputs"]]
            outs = [hb.parse_label(x) for x in d["outputs"]]
        except (KeyError, TypeError):
            raise SchemaError(f"{where}: beamsplitter needs 'inputs' and 'outputs'") from None
        specs.append(BeamsplitterSpec(ins, outs))
    try:
        return beamsplitter_unitary(specs, basis)
    except UnknownLabel as exc:
        raise ValidationError([Finding("unknown_label", f"{where}: unknown label {exc}")]) from None


def load_scenario(document: Union[str, Mapping]) -> Scenario:
    """
    Parse and validate a scenario document (JSON text or an already-decoded dict).

    Raises SchemaError for structural problems and ValidationError for
    physical ones (non-unitary stage, non-Hermitian observable, unknown
    label).  A vanishing postselection overlap is *not* a load error.
    """
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from None
    else:
        doc = document
    if not isinstance(doc, Mapping):
        raise SchemaError("scenario document must be a JSON object")

    raw_basis = _require(doc, "basis")
    if not isinstance(raw_basis, list) or not raw_basis:
        raise SchemaError("'basis' must be a non-empty list of strings")
    basis = tuple(hb.parse_label(str(x)) for x in raw_basis)
    if len(set(basis)) != len(basis):
        raise ValidationError([Finding("duplicate_label", "basis labels must be unique")])

    pre = _parse_state(_require(doc, "preselected"), basis, "preselected")
    post = _parse_state(_require(doc, "postselected"), basis, "postselected")
    observable = _parse_observable(_require(doc, "observable"), basis, "observable")
    obs_name = str(doc.get("observable_name", "S"))
    observables = {
        str(name): _parse_observable(spec, basis, f"observables[{name}]")
        for name, spec in doc.get("observables", {}).items()
    }

    stages = []
    for i, st in enumerate(doc.get("stages", [])):
        if not isinstance(st, Mapping):
            raise SchemaError(f"stages[{i}] must be an object")
        label = str(_require(st, "label", f"stages[{i}]"))
        if "matrix" in st:
            op = _parse_matrix(st["matrix"], basis, f"stage {label}")
        elif "beamsplitter" in st:
            op = _parse_splitters(st["beamsplitter"], basis, f"stage {label}")
        else:
            raise SchemaError(f"stage {label}: needs 'matrix' or 'beamsplitter'")
        stages.append((label, op))

    live = tuple(hb.parse_label(str(x)) for x in doc.get("live_labels", [])) or basis
    meter_doc = _require(doc, "meter")
    try:
        meter = GaussianSpec(float(_require(meter_doc, "delta", "meter")))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"meter: {exc}") from None

    s = Scenario(
        name=str(doc.get("name", "scenario")),
        basis=basis,
        preselected=pre,
        observable=observable,
        observable_name=obs_name,
        observables=observables,
        stages=tuple(stages),
        postselected=post,
        live_labels=live,
        meter=meter,
        convention=str(doc.get("convention", CONVENTION)),
    )
    fatal = [f for f in validate_scenario(s) if f.code != "vanishing_overlap"]
    if fatal:
        raise ValidationError(fatal)
    return s


def load_scenario_file(path: Union[str, Path]) -> Scenario:
    return load_scenario(Path(path).read_text())


def serialize_scenario(s: Scenario) -> dict:
    """Lossless dict form; every operator is written as an explicit matrix."""
    def state(v: StateVector) -> dict:
        return {hb.label_str(lab): _pair(a) for lab, a in zip(v.labels, v.amplitudes) if a != 0}

    def matrix(op: Operator) -> list:
        return [[_pair(x) for x in row] for row in op.matrix]

    return {
        "name": s.name,
        "convention": s.convention,
        "basis": [hb.label_str(lab) for lab in s.basis],
        "preselected": state(s.preselected),
        "postselected": state(s.postselected),
        "observable_name": s.observable_name,
        "observable": {"matrix": matrix(s.observable)},
        "observables": {name: {"matrix": matrix(op)} for name, op in s.observables.items()},
        "stages": [{"label": lab, "matrix": matrix(op)} for lab, op in s.stages],
        "live_labels": [hb.label_str(lab) for lab in s.live_labels],
        "meter": {"delta": s.meter.delta},
    }


def dump_scenario(s: Scenario) -> str:
    """JSON text with each [re, im] pair and each matrix row on one line."""
    text = json.dumps(serialize_scenario(s), indent=2)
    text = _PAIR.sub(lambda m: "[" + m.group(1) + ", " + m.group(2) + "]", text)
    text = _ROW.sub(lambda m: "[" + re.sub(r"\s+", " ", m.group(1)).strip() + "]", text)
    return text + "\n"


_NUM = r"(-?\d+(?:\.\d+)?(?:e[-+]?\d+)?)"
_PAIR = re.compile(r"\[\s*" + _NUM + r",\s*" + _NUM + r"\s*\]")
_ROW = re.compile(r"\[\s*((?:\[[^\[\]]*\],?\s*)+?)\s*\]")


def scenario_hash(s: Scenario) -> str:
    canon = json.dumps(serialize_scenario(s), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()
