"""Measurement-based gate implementation: rotation outcomes, gate fidelity,
postselection statistics, and the stochastic buffering protocol.

The compiled sampling kernel is selected at import when available; the
pure-Python fallback produces identical traces (see benchmarks/).  All
functions here are pure except the protocol samplers, which own a private
counter-based generator per call, so concurrent calls with distinct seeds
are independent.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._linalg import PAULI_X, PAULI_Z, dag
from .exceptions import NullOutcomeError
from .mps_core import CanonicalData, MPSTensor, canonicalize
from .renorm import RenormResult
from .symmetry import FactorizedTensor

from . import _protocol_py

try:  # compiled kernel is optional; fallback is exact but slow
    from . import _protocol_kernel

    _BACKEND = _protocol_kernel
    USING_COMPILED_KERNEL = True
except ImportError:  # pragma: no cover - depends on build environment
    _BACKEND = _protocol_py
    USING_COMPILED_KERNEL = False

@dataclass(frozen=True)
class MeasurementOutcome:
    """Single-site outcome |psi> = sum_mu c_mu |mu> and its induced operator.

    ``operator`` is sum_mu conj(c_mu) A_mu for the tensor the outcome was
    bound to (None until bound).
    """

    coefficients: np.ndarray
    operator: object = None


def rotation_outcome(theta, axis, tensor=None):
    """Measurement outcome implementing a rotation by ``theta`` about ``axis``.

    For the z axis the coefficients are (cos(theta/2), -sin(theta/2), 0) in
    the (x, y, z) basis, producing sigma_x exp(-i theta/2 sigma_z) on the
    protected space; the x axis mirrors this with byproduct sigma_z.
    """
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    if axis == "z":
        coeff = np.array([c, -s, 0.0], dtype=complex)
    elif axis == "x":
        coeff = np.array([0.0, s, c], dtype=complex)
    else:
        raise ValueError(f"axis must be 'x' or 'z', got {axis!r}")
    op = None
    if tensor is not None:
        op = measurement_operator(tensor, coeff)
    return MeasurementOutcome(coefficients=coeff, operator=op)


def _site_matrices(state):
    if isinstance(state, FactorizedTensor):
        return [np.kron(s, a) for s, a in zip(state.protected_parts, state.junk_parts)]
    if isinstance(state, CanonicalData):
        return [np.array(m) for m in state.tensor.matrices]
    if isinstance(state, MPSTensor):
        return [np.array(m) for m in state.matrices]
    raise TypeError(f"unsupported state type {type(state)!r}")


def measurement_operator(state, coefficients):
    """A[psi] = sum_mu conj(c_mu) A_mu."""
    mats = _site_matrices(state)
    coeff = np.asarray(coefficients, dtype=complex)
    if len(coeff) != len(mats):
        raise ValueError("coefficient count does not match the physical dimension")
    return sum(c.conjugate() * m for c, m in zip(coeff, mats))


def byproduct_target(theta, axis):
    """Intended operation including its known Pauli byproduct."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    if axis == "z":
        return PAULI_X @ (c * np.eye(2) - 1.0j * s * PAULI_Z)
    return PAULI_Z @ (c * np.eye(2) - 1.0j * s * PAULI_X)


def default_probe(axis):
    """Protected-space input state probing rotations about ``axis``."""
    if axis == "z":
        v = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
    else:
        v = np.array([1.0, 0.0], dtype=complex)
    return np.outer(v, v.conj())


@dataclass(frozen=True)
class FidelityReport:
    """Gate fidelity of a measurement-induced rotation on a buffered tensor."""

    theta: float
    axis: str
    m: object
    fidelity: float
    rho_protected: np.ndarray
    rho_junk: np.ndarray
    effective_protected_op: np.ndarray


def _partial_trace_junk(mat, jdim):
    return np.einsum("ajbj->ab", mat.reshape(2, jdim, 2, jdim))


def gate_fidelity(result, theta, rho_p=None, rho_j=None):
    """Fidelity of the measurement-induced protected-space rotation.

    Builds A[psi] on ``result.tensor_m``, applies it to
    rho = rho_p (x) rho_j, traces out the junk space, and compares with the
    byproduct-included target rotation.  Defaults: rho_p is the axis probe
    state, rho_j maximally mixed on the junk support.
    """
    if not isinstance(result, RenormResult):
        raise TypeError("gate_fidelity expects a RenormResult")
    axis = result.axis
    tensor = result.tensor_m
    jdim = tensor.junk_dim
    if rho_p is None:
        rho_p = default_probe(axis)
    if rho_j is None:
        rho_j = np.eye(jdim, dtype=complex) / jdim
    rho_p = np.asarray(rho_p, dtype=complex)
    rho_j = np.asarray(rho_j, dtype=complex)

    outcome = rotation_outcome(theta, axis, tensor)
    a_op = outcome.operator
    rho = np.kron(rho_p, rho_j)
    out = a_op @ rho @ dag(a_op)
    norm = float(np.trace(out).real)
    if norm < 1e-14:
        raise NullOutcomeError(
            "rotation outcome has vanishing probability on this tensor"
        )
    reduced = _partial_trace_junk(out / norm, jdim)
    target_u = byproduct_target(theta, axis)
    target = target_u @ rho_p @ dag(target_u)
    fid = float(np.trace(reduced @ target).real)
    effective = sum(
        c.conjugate() * np.trace(j @ rho_j) * s
        for c, s, j in zip(
            outcome.coefficients, tensor.protected_parts, tensor.junk_parts
        )
    )
    return FidelityReport(
        theta=float(theta),
        axis=axis,
        m=result.m,
        fidelity=fid,
        rho_protected=rho_p,
        rho_junk=rho_j,
        effective_protected_op=effective,
    )


def postselect_probability(state, axis, m):
    """Born probability of the all-``axis`` outcome on 2m consecutive sites.

    Contracts with the canonical edge operators of the infinite chain; the
    log-probability slope versus m approaches 4 log|lambda_1| of the axis
    junk operator.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    canon = _canonicalized(state)
    if m == 0:
        return 1.0
    block = canon.tensor.matrix(axis)
    b = np.linalg.matrix_power(block, 2 * m)
    return float(np.trace(canon.lam @ b @ dag(b)).real)


def attempt_success_probability(state, axis, m):
    """Per-attempt postselection probability of the buffering protocol.

    Unlike ``postselect_probability`` (2m consecutive sites), the protocol's
    buffer surrounds the not-yet-measured computational site, whose marginal
    inserts one full channel step in the middle.  Both coincide whenever the
    axis outcome is uncorrelated between sites (e.g. the Pauli-matrix state).
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    canon = _canonicalized(state)
    if m == 0:
        return 1.0
    mats = [np.array(a) for a in canon.tensor.matrices]
    half = np.linalg.matrix_power(canon.tensor.matrix(axis), m)
    mid = sum(a @ (half @ dag(half)) @ dag(a) for a in mats)
    return float(np.trace(canon.lam @ half @ mid @ dag(half)).real)


def overhead_estimate(zeta, lambda1, epsilon):
    """Expected per-gate measurement overhead to reach fidelity 1 - epsilon.

    Order-of-magnitude witness with unit constant:
    zeta * (1/eps)^(4 zeta ln(1/|lambda1|)) * ln(1/eps).
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    mod = abs(lambda1)
    if not 0.0 < mod <= 1.0:
        raise ValueError("|lambda1| must lie in (0, 1]")
    if math.isinf(zeta):
        raise ValueError("zeta must be finite")
    exponent = 4.0 * zeta * math.log(1.0 / mod)
    return zeta * (1.0 / epsilon) ** exponent * math.log(1.0 / epsilon)


@dataclass(frozen=True)
class ProtocolTrace:
    """Record of one protocol execution.

    ``byproducts`` lists the protected-space Pauli labels of every
    Pauli-basis measurement in chain order; ``outcome_labels`` additionally
    includes the rotated-basis outcome at the successful computational site
    (as ``rot<k>``).  sites_consumed = attempts * (2m + 1).
    """

    attempts: int
    byproducts: tuple
    sites_consumed: int
    succeeded: bool
    rng_seed: int
    outcome_labels: tuple
    success_outcome: int


@dataclass(frozen=True)
class ProtocolStats:
    """Aggregate outcome statistics of many protocol executions."""

    runs: int
    total_attempts: int
    mean_attempts: float
    success_rate: float
    all_succeeded: bool
    rng_seed: int


def _canonicalized(state):
    if isinstance(state, CanonicalData):
        return state
    if isinstance(state, FactorizedTensor):
        return canonicalize(state.to_mps())
    return canonicalize(state)


def _success_basis(theta, axis):
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    if axis == "z":
        vecs = [(c, -s, 0.0), (s, c, 0.0), (0.0, 0.0, 1.0)]
    else:
        vecs = [(0.0, s, c), (0.0, c, -s), (1.0, 0.0, 0.0)]
    return [np.array(v, dtype=complex) for v in vecs]


def _protocol_inputs(state, axis, theta):
    canon = _canonicalized(state)
    mats = [np.array(m) for m in canon.tensor.matrices]
    labels = canon.tensor.basis_labels
    bidx = labels.index(axis)
    succ = [measurement_operator(canon.tensor, v) for v in _success_basis(theta, axis)]
    return canon, mats, succ, bidx, labels


def simulate_protocol(state, axis, m, theta, seed, max_attempts=100000):
    """Run the buffering protocol once and return its full trace.

    Buffer sites are sampled by the exact chain rule of Born conditionals;
    on failure the computational site is measured in the Pauli basis (its
    protected byproduct recorded) and the next chain region is used.
    Reproducible bit-for-bit from (seed, parameters).
    """
    canon, mats, succ, bidx, labels = _protocol_inputs(state, axis, theta)
    attempts, succeeded, succ_outcome, outcomes = _BACKEND.sample_runs(
        mats, succ, canon.lam, bidx, int(m), 1, int(max_attempts), seed,
        record=True,
    )
    d = len(mats)
    out_labels = []
    byproducts = []
    for code in outcomes:
        if code < d:
            out_labels.append(labels[code])
            byproducts.append(labels[code])
        else:
            out_labels.append(f"rot{code - d}")
    return ProtocolTrace(
        attempts=int(attempts[0]),
        byproducts=tuple(byproducts),
        sites_consumed=int(attempts[0]) * (2 * int(m) + 1),
        succeeded=bool(succeeded[0]),
        rng_seed=int(seed),
        outcome_labels=tuple(out_labels),
        success_outcome=int(succ_outcome[0]),
    )


def protocol_statistics(state, axis, m, theta, seed, runs, max_attempts=100000):
    """Aggregate statistics over many executions (no outcome recording)."""
    canon, mats, succ, bidx, _ = _protocol_inputs(state, axis, theta)
    attempts, succeeded, _, _ = _BACKEND.sample_runs(
        mats, succ, canon.lam, bidx, int(m), int(runs), int(max_attempts), seed,
        record=False,
    )
    total = int(attempts.sum())
    n_succ = int(succeeded.sum())
    return ProtocolStats(
        runs=int(runs),
        total_attempts=total,
        mean_attempts=total / runs,
        success_rate=n_succ / total if total else 0.0,
        all_succeeded=bool(n_succ == runs),
        rng_seed=int(seed),
    )
