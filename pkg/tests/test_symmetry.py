"""Virtual symmetry extraction, phase classification, and the
protected/junk factorization."""

import math

import numpy as np
import pytest

from sptmqc import (
    FactorizationError,
    aklt,
    build_mps,
    canonicalize,
    classify_d2_phase,
    extract_virtual_symmetry,
    factorize_protected_junk,
    spin1_rotation,
    toy_junk_ops,
    toy_tensor,
    verify_s4_invariance,
)
from sptmqc.exceptions import NotASymmetryError
from sptmqc.toymodel import TRIAD, ToyModelParams

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def proportional(a, b, tol=1e-10):
    """True when a = phase * b for a single complex phase."""
    overlap = np.trace(b.conj().T @ a)
    if abs(overlap) < tol:
        return False
    return np.max(np.abs(a - (overlap / abs(overlap)) * b * (abs(overlap) / np.trace(b.conj().T @ b).real))) < tol


def test_spin1_rotation_pinned_matrix():
    got = spin1_rotation("z", math.pi / 2)
    assert np.allclose(got, [[0, -1, 0], [1, 0, 0], [0, 0, 1]], atol=1e-15)


def test_spin1_rotation_identity_and_order_four():
    assert np.allclose(spin1_rotation("z", 0.0), np.eye(3))
    r = spin1_rotation("z", math.pi / 2)
    assert np.allclose(np.linalg.matrix_power(r, 4), np.eye(3), atol=1e-14)


def test_extract_aklt_quarter_turn():
    can = canonicalize(aklt())
    act = extract_virtual_symmetry(can, spin1_rotation("z", math.pi / 2))
    u = act.virtual_op
    assert act.residual < 1e-8
    assert np.max(np.abs(u @ SX @ u.conj().T - SY)) < 1e-10
    assert np.max(np.abs(u @ SZ @ u.conj().T - SZ)) < 1e-10
    # protected factor is exp(-i pi/4 sigma_z) up to a phase
    target = np.diag([np.exp(-1j * math.pi / 4), np.exp(1j * math.pi / 4)])
    assert abs(abs(np.trace(u.conj().T @ target)) - 2.0) < 1e-10


def test_extract_identity_insert():
    can = canonicalize(aklt())
    act = extract_virtual_symmetry(can, np.eye(3))
    assert np.max(np.abs(act.virtual_op - np.eye(2))) < 1e-10


def test_extract_unitarity_and_projective_power():
    can = canonicalize(toy_tensor((1.2, 0.5)).to_mps())
    act = extract_virtual_symmetry(can, spin1_rotation("z", math.pi / 2))
    u = act.virtual_op
    assert np.max(np.abs(u @ u.conj().T - np.eye(4))) < 1e-10
    u4 = np.linalg.matrix_power(u, 4)
    phase = np.trace(u4) / 4.0
    assert abs(abs(phase) - 1.0) < 1e-8
    assert np.max(np.abs(u4 - phase * np.eye(4))) < 1e-8


def test_extract_rejects_non_symmetry():
    can = canonicalize(toy_tensor((1.2, 0.5)).to_mps())
    rng = np.random.default_rng(0)
    u = rng.normal(size=(3, 3))
    with pytest.raises(NotASymmetryError):
        extract_virtual_symmetry(can, u)


def test_pi_rotation_virtual_ops_anticommute_on_toy():
    can = canonicalize(toy_tensor((math.pi / 2, math.pi / 4)).to_mps())
    uz = extract_virtual_symmetry(can, spin1_rotation("z", math.pi)).virtual_op
    ux = extract_virtual_symmetry(can, spin1_rotation("x", math.pi)).virtual_op
    assert np.max(np.abs(ux @ uz + uz @ ux)) < 1e-8


def test_classify_aklt_nontrivial():
    label = classify_d2_phase(canonicalize(aklt()))
    assert label.value == "D2_SPTO"
    assert abs(label.commutator_sign + 1.0) < 1e-8


def test_classify_product_state_trivial():
    # |z z z ...>: invariant under pi rotations up to the (-1)^n 1D-rep phase
    zero = np.array([[0.0]])
    one = np.array([[1.0]])
    state = build_mps([zero, zero, one], ["x", "y", "z"])
    label = classify_d2_phase(canonicalize(state))
    assert label.value == "Trivial"
    assert abs(label.commutator_sign - 1.0) < 1e-8


def test_classify_toy_nontrivial():
    label = classify_d2_phase(canonicalize(toy_tensor((math.pi / 2, math.pi / 4)).to_mps()))
    assert label.value == "D2_SPTO"


def test_factorize_recovers_kronecker_input():
    params = ToyModelParams(1.1, 0.7)
    fact = factorize_protected_junk(canonicalize(toy_tensor(params).to_mps()))
    for got, want in zip(fact.junk_parts, toy_junk_ops(params)):
        assert np.max(np.abs(got - want)) < 1e-12
    wz = fact.virtual_junk_symmetries["z"]
    assert np.max(np.abs(wz - TRIAD[2])) < 1e-10
    wx = fact.virtual_junk_symmetries["x"]
    assert min(np.max(np.abs(wx - TRIAD[0])), np.max(np.abs(wx + TRIAD[0]))) < 1e-10


def test_factorize_aklt_trivial_junk():
    fact = factorize_protected_junk(canonicalize(aklt()))
    for a in fact.junk_parts:
        assert np.max(np.abs(a - np.array([[1 / math.sqrt(3)]]))) < 1e-12
    for w in fact.virtual_junk_symmetries.values():
        assert np.max(np.abs(w @ w - np.eye(1))) < 1e-10


def test_factorize_gauge_invariant_singular_values():
    params = ToyModelParams(1.1, 0.7)
    rng = np.random.default_rng(5)
    g = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    mats = [g.conj().T @ m @ g for m in toy_tensor(params).to_mps().matrices]
    fact = factorize_protected_junk(canonicalize(build_mps(mats, ("x", "y", "z"))))
    for got, want in zip(fact.junk_parts, toy_junk_ops(params)):
        sv_got = np.linalg.svd(got, compute_uv=False)
        sv_want = np.linalg.svd(want, compute_uv=False)
        assert np.max(np.abs(sv_got - sv_want)) < 1e-9


def test_factorize_roundtrip_and_junk_relation():
    fact = factorize_protected_junk(canonicalize(toy_tensor((2.0, 1.3)).to_mps()))
    mps = fact.to_mps()
    basis = fact.basis
    for m, l in zip(mps.matrices, ("x", "y", "z")):
        orig = fact.parent.matrix(l)
        assert np.max(np.abs(m - basis.conj().T @ orig @ basis)) < 1e-10
    wz = fact.virtual_junk_symmetries["z"]
    assert np.max(np.abs(wz @ wz - np.eye(2))) < 1e-10
    a_x, a_y = fact.junk_parts[0], fact.junk_parts[1]
    assert np.max(np.abs(wz @ a_x @ wz.conj().T - a_y)) < 1e-10


def test_factorize_rejects_trivial_phase():
    zero = np.array([[0.0]])
    one = np.array([[1.0]])
    state = build_mps([zero, zero, one], ["x", "y", "z"])
    with pytest.raises(FactorizationError):
        factorize_protected_junk(canonicalize(state))


def test_verify_s4_on_family_and_aklt():
    for params in [(0.6, 1.0), (1.7, 3.9), (2.8, 5.5)]:
        report = verify_s4_invariance(canonicalize(toy_tensor(params).to_mps()))
        assert report.accepted
        assert report.max_residual < 1e-10
    assert verify_s4_invariance(canonicalize(aklt())).accepted


def test_verify_s4_rejects_broken_symmetry():
    mats = [SX * 1.1, SY, SZ]
    state = build_mps(mats, ("x", "y", "z"))
    report = verify_s4_invariance(canonicalize(state))
    assert not report.accepted
