import numpy as np
import pytest
from hypothesis import given, strategies as st

from weakvalues import hilbert as hb
from weakvalues.errors import NotHermitian, SpaceMismatch, ZeroState
from weakvalues.scenarios import BeamsplitterSpec, beamsplitter_unitary, sigma_z

from conftest import random_hermitian, random_state

ARMS = ("L", "R")
POL = ("H", "V")
S2 = 1 / np.sqrt(2)


def ket(label, labels=ARMS):
    return hb.basis_state(labels, label)


def test_inner_orthonormal_basis():
    assert hb.inner(ket("L"), ket("L")) == 1
    assert hb.inner(ket("L"), ket("R")) == 0


def test_inner_is_antilinear_in_bra():
    psi = hb.StateVector(ARMS, [S2, 1j * S2])
    assert hb.inner(psi, ket("R")) == pytest.approx(-1j * S2, abs=1e-15)


def test_inner_space_mismatch():
    with pytest.raises(SpaceMismatch):
        hb.inner(ket("L"), ket("H", POL))


def test_apply_identity_and_projector():
    psi = hb.StateVector(ARMS, [S2, 1j * S2])
    np.testing.assert_array_equal(hb.apply(hb.identity(ARMS), psi).amplitudes, psi.amplitudes)
    out = hb.apply(hb.projector(ket("L")), psi)
    np.testing.assert_allclose(out.amplitudes, [S2, 0], atol=1e-15)


def test_sigma_z_maps_v_to_i_h():
    out = hb.apply(sigma_z(), ket("V", POL))
    np.testing.assert_allclose(out.amplitudes, [1j, 0], atol=1e-15)


def test_tensor_labels_and_dimension():
    rv = hb.tensor(ket("R"), ket("V", POL))
    assert rv.labels == (("L", "H"), ("L", "V"), ("R", "H"), ("R", "V"))
    assert rv.amplitude(("R", "V")) == 1
    assert rv.norm_squared() == 1
    three = hb.tensor(hb.tensor(hb.identity(ARMS), hb.identity(POL)), hb.identity(("x", "y", "z")))
    assert three.dim == 12
    assert three.labels[0] == ("L", "H", "x")


def test_tensor_builds_arm_resolved_spin():
    sz_r = hb.tensor(hb.projector(ket("R")), sigma_z())
    idx = sz_r.labels.index
    m = sz_r.matrix
    assert m[idx(("R", "H")), idx(("R", "V"))] == pytest.approx(1j)
    assert m[idx(("R", "V")), idx(("R", "H"))] == pytest.approx(-1j)
    assert np.count_nonzero(m) == 2


def test_tensor_dagger_commutes():
    rng = np.random.default_rng(3)
    a = hb.Operator(ARMS, rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    b = hb.Operator(POL, rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    np.testing.assert_allclose(hb.tensor(a, b).dagger().matrix,
                               hb.tensor(a.dagger(), b.dagger()).matrix)


def test_projector_is_normalization_invariant():
    np.testing.assert_allclose(hb.projector(ket("L").scaled(2)).matrix,
                               hb.projector(ket("L")).matrix)


def test_projector_orthogonal_to_channels():
    labels = ("a", "b", "d")
    pi_d = hb.projector(ket("d", labels))
    psi = hb.StateVector(labels, [S2, S2, 0])
    assert hb.apply(pi_d, psi).norm() == 0


def test_projector_zero_vector():
    with pytest.raises(ZeroState):
        hb.projector(hb.StateVector(ARMS, [0, 0]))


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_projector_hermitian_idempotent(dim, seed):
    rng = np.random.default_rng(seed)
    p = hb.projector(hb.StateVector(tuple(range(dim)), 3 * random_state(rng, dim)))
    np.testing.assert_allclose(p.matrix, p.matrix.conj().T, atol=1e-12)
    np.testing.assert_allclose(p.matrix @ p.matrix, p.matrix, atol=1e-12)


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_inner_self_is_real_nonnegative(dim, seed):
    v = hb.StateVector(tuple(range(dim)), random_state(np.random.default_rng(seed), dim) * 1.7)
    z = hb.inner(v, v)
    assert z.imag == 0 and z.real >= 0


def test_spectrum_of_projector():
    dec = hb.spectral_decompose(hb.projector(ket("L")))
    assert dec.eigenvalues == (0.0, 1.0)


def test_spectrum_of_sigma_z():
    dec = hb.spectral_decompose(sigma_z())
    assert dec.eigenvalues == (-1.0, 1.0)
    plus = hb.StateVector(POL, [1j * S2, S2])    # (|V> + i|H>)/sqrt2 on (H, V)
    minus = hb.StateVector(POL, [-1j * S2, S2])
    np.testing.assert_allclose(dec.projectors[1].matrix, hb.projector(plus).matrix, atol=1e-12)
    np.testing.assert_allclose(dec.projectors[0].matrix, hb.projector(minus).matrix, atol=1e-12)


def test_degenerate_eigenvalues_share_projector():
    op = hb.label_projector(("a", "b", "c", "d"), ["a", "c"])
    dec = hb.spectral_decompose(op)
    assert dec.eigenvalues == (0.0, 1.0)
    assert np.trace(dec.projectors[1].matrix).real == pytest.approx(2)


def test_spectral_decompose_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hb.spectral_decompose(hb.Operator(ARMS, [[0, 1], [0, 0]]))


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_spectral_reconstruction(dim, seed):
    rng = np.random.default_rng(seed)
    op = hb.Operator(tuple(range(dim)), random_hermitian(rng, dim))
    dec = hb.spectral_decompose(op)
    np.testing.assert_allclose(dec.reconstruct().matrix, op.matrix, atol=1e-10)
    total = sum(p.matrix for p in dec.projectors)
    np.testing.assert_allclose(total, np.eye(dim), atol=1e-10)
    for i, p in enumerate(dec.projectors):
        for j, q in enumerate(dec.projectors):
            expect = p.matrix if i == j else np.zeros((dim, dim))
            np.testing.assert_allclose(p.matrix @ q.matrix, expect, atol=1e-10)


def test_check_unitary():
    assert hb.check_unitary(hb.identity(ARMS))
    assert not hb.check_unitary(hb.projector(ket("L")))
    bs = beamsplitter_unitary(BeamsplitterSpec(("N", "W"), ("L", "R")), ("N", "W", "L", "R"))
    assert hb.check_unitary(bs)
    # explicit 2x2 block in the output arms
    np.testing.assert_allclose(bs.matrix[2:, :2], [[S2, 1j * S2], [1j * S2, S2]])


def test_normalized_flag_is_checked():
    with pytest.raises(ValueError):
        hb.StateVector(ARMS, [1, 1], normalized=True)


def test_labels_round_trip_through_text():
    for lab in ["D2", ("L'", "H")]:
        assert hb.parse_label(hb.label_str(lab)) == lab
