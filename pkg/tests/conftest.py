import numpy as np
import pytest
from hypothesis import settings

from weakvalues import hilbert as hb
from weakvalues.meter import GaussianSpec
from weakvalues.scenarios import BUILTINS, Scenario, builtin

settings.register_profile("ci", max_examples=100, deadline=None)
settings.load_profile("ci")

_acceptance_key = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_acceptance_key] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = config.stash.get(_acceptance_key, [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in rows:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture
def acceptance(request):
    log = request.config.stash[_acceptance_key]

    def record(name, ok, detail=""):
        log.append((name, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        assert ok, f"{name}: {detail}"

    return record


ALL_OBSERVABLES = [(name, obs) for name in BUILTINS for obs in builtin(name).observables]


@pytest.fixture(params=sorted(BUILTINS))
def scenario(request):
    return builtin(request.param)


def eigenstate_scenario(delta=1.0):
    """|in> = |f> = |L>, S = Pi_L, no stages: the pointer shifts by exactly g."""
    basis = ("L", "R")
    left = hb.basis_state(basis, "L")
    return Scenario(
        name="eigenstate",
        basis=basis,
        preselected=left,
        observable=hb.projector(left),
        observable_name="Pi_L",
        stages=(),
        postselected=left,
        meter=GaussianSpec(delta),
    )


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)
