"""Constructors for the exactly parameterized family and the Pauli-matrix state."""

import math
import warnings

import numpy as np
import pytest

from sptmqc import (
    ToyModelParams,
    aklt,
    aklt_factorized,
    canonicalize,
    classify_d2_phase,
    critical_theta,
    junk_spectrum,
    toy_junk_ops,
    toy_tensor,
    verify_s4_invariance,
)
from sptmqc.toymodel import TRIAD

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def test_equal_weight_point_junk_ops():
    junk = toy_junk_ops(ToyModelParams(0.0, 0.0))
    for a in junk:
        assert np.max(np.abs(a - np.eye(2) / math.sqrt(3))) < 1e-15


def test_rank_one_point():
    fact = toy_tensor(ToyModelParams(math.pi / 2, 0.0))
    want = (np.eye(2) + SX) / math.sqrt(6)
    assert np.max(np.abs(fact.junk("z") - want)) < 1e-14
    assert np.linalg.matrix_rank(fact.junk("z"), tol=1e-12) == 1
    spect = junk_spectrum(fact.junk("z"), fact.virtual_junk_symmetries["z"])
    assert spect.zeta == 0.0


def test_family_is_s4_invariant_on_grid():
    for theta in np.linspace(0.15, math.pi - 0.15, 5):
        for phi in np.linspace(0.0, 2 * math.pi, 5, endpoint=False):
            can = canonicalize(toy_tensor((theta, phi)).to_mps(), allow_degenerate=True)
            report = verify_s4_invariance(can)
            assert report.max_residual < 1e-10


@pytest.mark.filterwarnings("ignore:parameters wrapped")
def test_junk_eigenvalue_closed_form_on_grid():
    # |lambda_pm|^2 = (1 +- sin(theta) cos(phi)) / 3
    for theta in np.linspace(0.0, math.pi, 9):
        for phi in np.linspace(0.0, 2 * math.pi, 9):
            fact = toy_tensor(ToyModelParams(theta, phi))
            vals = np.linalg.eigvals(fact.junk("z"))
            got = np.sort(np.abs(vals) ** 2)
            s = math.sin(theta) * math.cos(phi)
            want = np.sort([(1 - abs(s)) / 3.0, (1 + abs(s)) / 3.0])
            assert np.max(np.abs(got - want)) < 1e-12


def test_triad_properties():
    wz = TRIAD[2]
    for n in TRIAD:
        assert abs(np.trace(n)) < 1e-15
        assert np.max(np.abs(n - n.conj().T)) < 1e-15
        assert np.max(np.abs(n @ n - np.eye(2))) < 1e-14
    # quarter-turn junk factor permutes the triad: wz n_x wz = n_y
    assert np.max(np.abs(wz @ TRIAD[0] @ wz - TRIAD[1])) < 1e-14


def test_family_already_canonical():
    fact = toy_tensor((1.9, 2.6))
    mats = fact.to_mps().matrices
    chan = sum(m @ m.conj().T for m in mats)
    assert np.max(np.abs(chan - np.eye(4))) < 1e-14


def test_critical_theta_identities():
    tc = critical_theta()
    assert abs(math.tan(tc / 2.0) - 2.0) < 1e-15
    assert abs(math.cos(tc / 2.0) - 0.5 * math.sin(tc / 2.0)) < 1e-15
    assert abs(math.cos(tc / 2.0) + math.sin(tc / 2.0) - 3.0 / math.sqrt(5.0)) < 1e-12


def test_aklt_basics():
    can = canonicalize(aklt())
    assert abs(can.xi - 1.0 / math.log(3.0)) < 1e-10
    assert classify_d2_phase(can).value == "D2_SPTO"
    fact = aklt_factorized()
    assert np.max(np.abs(fact.to_mps().matrices[0] - SX / math.sqrt(3))) < 1e-15


def test_out_of_range_parameters_wrap_with_warning():
    with pytest.warns(UserWarning):
        p = ToyModelParams(1.0, 7.0)
    assert 0.0 <= p.phi < 2.0 * math.pi
    with pytest.warns(UserWarning):
        p = ToyModelParams(-0.3, 0.0)
    assert 0.0 <= p.theta <= math.pi
    # the South-pole limit point is allowed silently
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ToyModelParams(math.pi, 0.0)
