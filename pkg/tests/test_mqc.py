"""Measurement outcomes, gate fidelity, postselection statistics, and the
stochastic protocol (both sampling backends)."""

import math

import numpy as np
import pytest

from sptmqc import (
    NullOutcomeError,
    aklt_factorized,
    attempt_success_probability,
    buffer,
    critical_theta,
    fixed_point,
    gate_fidelity,
    junk_spectrum,
    measurement_operator,
    overhead_estimate,
    postselect_probability,
    protocol_statistics,
    rotation_outcome,
    simulate_protocol,
    toy_tensor,
)
from sptmqc import mqc
from sptmqc import _protocol_py

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)

TOY_POINT = (math.pi / 2, math.pi / 4)


def test_rotation_outcome_coefficients():
    assert np.allclose(rotation_outcome(0.0, "z").coefficients, [1, 0, 0])
    assert np.allclose(rotation_outcome(math.pi, "z").coefficients, [0, -1, 0])
    theta = 0.8
    got = rotation_outcome(theta, "z").coefficients
    assert np.allclose(got, [math.cos(theta / 2), -math.sin(theta / 2), 0.0])


def test_rotation_outcome_operator_on_pauli_state():
    fact = aklt_factorized()
    theta = 1.1
    for axis, byp, gen in (("z", SX, SZ), ("x", SZ, SX)):
        out = rotation_outcome(theta, axis, fact)
        want = byp @ (
            math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * gen
        ) / math.sqrt(3)
        assert np.max(np.abs(out.operator - np.kron(want, np.eye(1)))) < 1e-12


def test_measurement_operator_coeff_count():
    with pytest.raises(ValueError):
        measurement_operator(aklt_factorized(), [1.0, 0.0])


def test_gate_fidelity_pauli_state_exact():
    r0 = buffer(aklt_factorized(), "z", 0)
    for theta in (0.0, math.pi / 8, math.pi / 4, math.pi / 2, math.pi):
        rep = gate_fidelity(r0, theta)
        assert abs(rep.fidelity - 1.0) < 1e-12
    rx = buffer(aklt_factorized(), "x", 0)
    assert abs(gate_fidelity(rx, 0.7).fidelity - 1.0) < 1e-12


def test_gate_fidelity_bounds_and_monotone_improvement():
    fact = toy_tensor(TOY_POINT)
    fids = []
    for m in (0, 2, 4, 8):
        f = gate_fidelity(buffer(fact, "z", m), math.pi / 2).fidelity
        assert 0.0 <= f <= 1.0 + 1e-12
        fids.append(f)
    assert fids == sorted(fids)
    assert fids[-1] > 0.999


def test_gate_fidelity_rate_is_twice_the_flow_rate():
    # exact behavior: the chi selection rule removes the linear junk-mixing
    # term, so the infidelity decays at rate 2/zeta (not 1/zeta)
    for params in [TOY_POINT, (1.9, 5.7)]:
        fact = toy_tensor(params)
        zeta = junk_spectrum(fact.junk("z"), fact.virtual_junk_symmetries["z"]).zeta
        ms = np.arange(3, 12)
        infid = [
            1.0 - gate_fidelity(buffer(fact, "z", int(m)), math.pi / 2).fidelity
            for m in ms
        ]
        rate = -np.polyfit(ms, np.log(infid), 1)[0]
        assert abs(rate * zeta - 2.0) < 0.15 * 2.0


def test_gate_fidelity_x_axis_converges_too():
    fact = toy_tensor((1.9, 0.7))
    f0 = gate_fidelity(buffer(fact, "x", 0), math.pi / 2).fidelity
    f8 = gate_fidelity(buffer(fact, "x", 8), math.pi / 2).fidelity
    f_lim = gate_fidelity(fixed_point(fact, "x"), math.pi / 2).fidelity
    assert f0 < f8 <= 1.0 + 1e-12
    assert abs(f_lim - 1.0) < 1e-10


def test_gate_fidelity_asymptotically_perfect_on_grid():
    rng = np.random.default_rng(6)
    checked = 0
    while checked < 5:
        theta = rng.uniform(0.3, math.pi - 0.3)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        if abs(math.cos(phi)) < 0.2 or abs(theta - critical_theta()) < 0.2:
            continue
        fact = toy_tensor((theta, phi))
        zeta = junk_spectrum(fact.junk("z"), fact.virtual_junk_symmetries["z"]).zeta
        m = int(math.ceil(40.0 * zeta))
        f = gate_fidelity(buffer(fact, "z", m), math.pi / 2).fidelity
        assert f > 0.999
        checked += 1


def test_gate_fidelity_critical_point_inverts_rotation():
    fact = toy_tensor((critical_theta(), 0.0))
    for theta in (math.pi / 6, math.pi / 3, math.pi / 2):
        f = gate_fidelity(buffer(fact, "z", 12), theta).fidelity
        assert abs(f - math.cos(theta) ** 2) < 1e-3
    assert gate_fidelity(buffer(fact, "z", 12), math.pi / 2).fidelity < 0.01


def test_gate_fidelity_null_outcome_at_degenerate_fixed_point():
    limit = fixed_point(toy_tensor((critical_theta(), 0.0)), "z")
    with pytest.raises(NullOutcomeError):
        gate_fidelity(limit, math.pi / 2)


def test_postselect_probability_values():
    assert postselect_probability(aklt_factorized(), "z", 0) == 1.0
    p1 = postselect_probability(aklt_factorized(), "z", 1)
    assert abs(p1 - 1.0 / 9.0) < 1e-12


def test_postselect_probability_slope():
    # log p slope approaches 4 log|lambda_1| of the junk operator
    for params in [TOY_POINT, (2.0, 0.4)]:
        fact = toy_tensor(params)
        spect = junk_spectrum(fact.junk("z"), fact.virtual_junk_symmetries["z"])
        lam1 = abs(spect.eigenvalues[0])
        ms = np.arange(12, 18)
        logs = [math.log(postselect_probability(fact, "z", int(m))) for m in ms]
        slope = np.polyfit(ms, logs, 1)[0]
        assert abs(slope - 4.0 * math.log(lam1)) < 0.05 * abs(4.0 * math.log(lam1))


def test_attempt_probability_marginalizes_middle_site():
    fact = toy_tensor(TOY_POINT)
    p_att = attempt_success_probability(fact, "z", 3)
    p_win = postselect_probability(fact, "z", 3)
    assert p_att != pytest.approx(p_win, rel=1e-3)  # genuinely different objects
    assert attempt_success_probability(aklt_factorized(), "z", 2) == pytest.approx(
        postselect_probability(aklt_factorized(), "z", 2), rel=1e-12
    )


def test_overhead_estimate():
    assert overhead_estimate(2.0, 1.0, 0.1) == pytest.approx(2.0 * math.log(10.0))
    got = overhead_estimate(1.0, math.exp(-0.25), 0.1)
    assert got == pytest.approx(10.0 * math.log(10.0), rel=1e-12)
    assert overhead_estimate(1.0, 0.9, 0.01) > overhead_estimate(1.0, 0.9, 0.1)
    with pytest.raises(ValueError):
        overhead_estimate(1.0, 0.9, 1.5)
    with pytest.raises(ValueError):
        overhead_estimate(1.0, 1.2, 0.1)


def test_single_site_born_probabilities_sum_to_one():
    fact = toy_tensor((1.4, 2.2))
    canon, mats, _, _, _ = mqc._protocol_inputs(fact, "z", 0.3)
    rng = np.random.default_rng(4)
    for _ in range(5):
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        env = g @ g.conj().T
        env = env / np.trace(env).real
        probs = [float(np.trace(m.conj().T @ env @ m).real) for m in mats]
        assert abs(sum(probs) - 1.0) < 1e-10


def test_protocol_zero_buffer_always_succeeds():
    tr = simulate_protocol(aklt_factorized(), "z", 0, math.pi / 2, seed=1)
    assert tr.attempts == 1 and tr.succeeded
    assert tr.sites_consumed == 1


def test_protocol_trace_reproducible():
    a = simulate_protocol(aklt_factorized(), "z", 1, math.pi / 2, seed=11)
    b = simulate_protocol(aklt_factorized(), "z", 1, math.pi / 2, seed=11)
    c = simulate_protocol(aklt_factorized(), "z", 1, math.pi / 2, seed=12)
    assert a == b
    assert a != c
    assert a.sites_consumed == a.attempts * 3
    assert a.rng_seed == 11


def test_protocol_backends_produce_identical_traces():
    for state, m, seed in [
        (aklt_factorized(), 1, 42),
        (toy_tensor(TOY_POINT), 2, 9),
    ]:
        canon, mats, succ, bidx, _ = mqc._protocol_inputs(state, "z", 0.8)
        kernel = mqc._BACKEND.sample_runs(
            mats, succ, canon.lam, bidx, m, 300, 100000, seed, record=True
        )
        fallback = _protocol_py.sample_runs(
            mats, succ, canon.lam, bidx, m, 300, 100000, seed, record=True
        )
        for got, want in zip(kernel, fallback):
            assert np.array_equal(got, want)


def test_protocol_success_rate_matches_born_probability():
    stats = protocol_statistics(
        aklt_factorized(), "z", 1, math.pi / 2, seed=7, runs=100000
    )
    p = postselect_probability(aklt_factorized(), "z", 1)
    sigma = math.sqrt(p * (1.0 - p) / stats.total_attempts)
    assert abs(stats.success_rate - p) < 3.0 * sigma
    assert stats.all_succeeded


def test_protocol_mean_attempts_matches_attempt_probability():
    fact = toy_tensor(TOY_POINT)
    p = attempt_success_probability(fact, "z", 3)
    stats = protocol_statistics(fact, "z", 3, math.pi / 2, seed=11, runs=10000)
    assert abs(stats.mean_attempts * p - 1.0) < 0.05


def test_protocol_byproduct_algebra():
    # composing the recorded byproducts with the intended rotation (inserted
    # at the success position) reproduces the net protected operator of the
    # full outcome record; exact on the trivial-junk state
    theta = 0.9
    m = 1
    fact = aklt_factorized()
    paulis = {"x": SX, "y": SY, "z": SZ}
    protected_rot = [
        math.sqrt(3) * measurement_operator(fact, v)[:2, :2]
        for v in mqc._success_basis(theta, "z")
    ]
    for seed in range(6):
        tr = simulate_protocol(fact, "z", m, theta, seed=seed)
        assert tr.succeeded
        # net operator from the full chain-ordered outcome record
        net = np.eye(2, dtype=complex)
        for label in tr.outcome_labels:
            if label.startswith("rot"):
                net = net @ protected_rot[int(label[3:])]
            else:
                net = net @ paulis[label]
        # reconstruction from the byproduct record alone: the successful
        # computational site sits m sites before the end of the record
        pos = len(tr.byproducts) - m
        recon = np.eye(2, dtype=complex)
        for label in tr.byproducts[:pos]:
            recon = recon @ paulis[label]
        recon = recon @ protected_rot[tr.success_outcome]
        for label in tr.byproducts[pos:]:
            recon = recon @ paulis[label]
        assert np.max(np.abs(net - recon)) < 1e-8
        assert len(tr.byproducts) == len(tr.outcome_labels) - 1


def test_protocol_x_axis_buffering():
    stats = protocol_statistics(
        aklt_factorized(), "x", 1, math.pi / 2, seed=5, runs=20000
    )
    p = postselect_probability(aklt_factorized(), "x", 1)
    assert p == pytest.approx(1.0 / 9.0)
    sigma = math.sqrt(p * (1.0 - p) / stats.total_attempts)
    assert abs(stats.success_rate - p) < 3.0 * sigma


def test_protocol_statistics_fields():
    stats = protocol_statistics(aklt_factorized(), "z", 1, 0.5, seed=2, runs=500)
    assert stats.runs == 500
    assert stats.total_attempts >= 500
    assert stats.mean_attempts == stats.total_attempts / 500
