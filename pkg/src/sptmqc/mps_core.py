"""Uniform matrix product states, transfer channels, and canonical form.

A translation-invariant MPS is stored as one complex D x D matrix per
physical basis vector.  Two boundary conventions appear throughout:

* ``amplitude`` contracts a finite string with a trace (periodic chain);
* every infinite-chain expectation value uses the canonical-form edge
  operators instead (left fixed point ``lam``, right fixed point identity).

Each operation's docstring states which convention it uses.

Length scales that diverge are reported as ``math.inf``; no large finite
float ever stands in for infinity.

All types are immutable after construction and all operations are pure, so
shared instances may be used from multiple threads without locking.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._linalg import (
    DEGENERACY_TOL,
    dag,
    eig_sorted,
    hermitize_positive,
)
from .exceptions import DegenerateSpectrumError, ResourceLimitError

INF = math.inf

_BRUTE_FORCE_MAX_SITES = 10
_BRUTE_FORCE_SUM_MAX_SITES = 6


def _freeze(arr):
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class MPSTensor:
    """Site tensor of a uniform MPS: one matrix per physical basis vector."""

    matrices: tuple
    basis_labels: tuple

    @property
    def physical_dim(self):
        return len(self.matrices)

    @property
    def bond_dim(self):
        return self.matrices[0].shape[0]

    def matrix(self, label):
        try:
            return self.matrices[self.basis_labels.index(label)]
        except ValueError:
            raise KeyError(f"unknown basis label {label!r}") from None

    def stack(self):
        return np.stack(self.matrices)


def build_mps(matrices, labels):
    """Assemble an MPSTensor, validating shapes.  No normalization is applied."""
    matrices = [np.asarray(m, dtype=complex) for m in matrices]
    if not matrices:
        raise ValueError("empty matrix list")
    if len(labels) != len(matrices):
        raise ValueError(
            f"{len(labels)} labels for {len(matrices)} matrices"
        )
    shape = matrices[0].shape
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ValueError(f"matrices must be square, got shape {shape}")
    for m in matrices[1:]:
        if m.shape != shape:
            raise ValueError(f"matrix shapes differ: {m.shape} vs {shape}")
    return MPSTensor(
        matrices=tuple(_freeze(m) for m in matrices),
        basis_labels=tuple(str(l) for l in labels),
    )


@dataclass(frozen=True)
class TransferChannel:
    """A transfer channel, optionally dressed with a single-site operator.

    ``matrix_form`` acts on row-major vectorized D x D operators and realizes

        X -> sum_{nu,eta} insert[nu, eta] A_nu X A_eta^dag

    (``insert`` absent means the identity, i.e. X -> sum_i A_i X A_i^dag).
    With this index placement the virtual operator of a symmetric state is a
    fixed point of the dressed channel; see ``symmetry.extract_virtual_symmetry``.
    """

    source: MPSTensor
    insert: object
    matrix_form: np.ndarray

    def apply(self, x):
        d = self.source.bond_dim
        return (self.matrix_form @ np.asarray(x, dtype=complex).reshape(-1)).reshape(d, d)


def channel_matrix(tensor, insert=None, physical=False):
    """Matrix form of the (dressed) transfer channel.

    ``physical=True`` transposes the insert contraction, giving the map whose
    iterates produce genuine expectation values  <psi| u x ... x u |psi>
    (the bra layer then carries the first index of ``insert``).
    """
    mats = tensor.matrices
    d = len(mats)
    if insert is None:
        return sum(np.kron(m, m.conj()) for m in mats)
    insert = np.asarray(insert, dtype=complex)
    if insert.shape != (d, d):
        raise ValueError(f"insert must be {d}x{d}, got {insert.shape}")
    if physical:
        insert = insert.T
    out = np.zeros((mats[0].size, mats[0].size), dtype=complex)
    for nu in range(d):
        for eta in range(d):
            if insert[nu, eta] != 0.0:
                out += insert[nu, eta] * np.kron(mats[nu], mats[eta].conj())
    return out


def transfer_channel(tensor, insert=None):
    """Build the TransferChannel of ``tensor`` with an optional inserted operator."""
    mat = channel_matrix(tensor, insert)
    frozen = None if insert is None else _freeze(insert)
    mat = np.asarray(mat)
    mat.setflags(write=False)
    return TransferChannel(source=tensor, insert=frozen, matrix_form=mat)


@dataclass(frozen=True)
class CanonicalData:
    """Gauge-fixed tensor with its channel fixed points and correlation length.

    ``right_fixed_point`` is the identity and ``lam`` (the left fixed point)
    is positive with unit trace; ``xi`` is ``-1/log|lambda_2|`` of the channel
    spectrum, or ``inf`` when the top of the spectrum is degenerate (the state
    is then long-range correlated and ``degenerate`` is set).
    """

    tensor: MPSTensor
    right_fixed_point: np.ndarray
    left_fixed_point: np.ndarray
    spectrum: np.ndarray
    xi: float
    degenerate: bool = False
    normalization: float = 1.0

    @property
    def lam(self):
        return self.left_fixed_point


def canonicalize(tensor, allow_degenerate=False):
    """Gauge-transform and rescale ``tensor`` into canonical form.

    The channel is rescaled to unit spectral radius; the gauge makes the
    right fixed point exactly the identity.  An already-canonical tensor
    comes back unchanged (gauge = identity) to machine precision.

    With a degenerate top eigenvalue the gauge is ill-defined: by default
    this raises DegenerateSpectrumError; with ``allow_degenerate=True`` the
    tensor is only rescaled, ``xi`` is ``inf`` and the fixed points are taken
    from (an arbitrary basis of) the top eigenspace.
    """
    mat = channel_matrix(tensor)
    vals, _ = eig_sorted(mat)
    radius = abs(vals[0])
    if radius <= 0.0:
        raise ValueError("transfer channel has zero spectral radius")
    scale = math.sqrt(radius)
    rescaled = [m / scale for m in tensor.matrices]
    vals = vals / radius
    degenerate = len(vals) > 1 and abs(vals[1]) >= 1.0 - DEGENERACY_TOL

    if degenerate and not allow_degenerate:
        raise DegenerateSpectrumError(
            "top transfer eigenvalue is degenerate (long-range correlations)",
            spectrum=vals,
        )

    d = tensor.bond_dim
    mat = mat / radius
    _, right_vec = eig_sorted(mat)
    _, left_vec = eig_sorted(mat.conj().T)

    if degenerate:
        # No unique gauge; report the rescaled tensor as-is with a basis
        # element of the top eigenspace for each fixed point.
        out = build_mps(rescaled, tensor.basis_labels)
        right = right_vec[:, 0].reshape(d, d)
        left = left_vec[:, 0].reshape(d, d)
        try:
            right = hermitize_positive(right)
            left = hermitize_positive(left)
            left = left / np.trace(left).real
        except DegenerateSpectrumError:
            pass
        return CanonicalData(
            tensor=out,
            right_fixed_point=_freeze(right),
            left_fixed_point=_freeze(left),
            spectrum=_freeze(vals),
            xi=INF,
            degenerate=True,
            normalization=scale,
        )

    right = hermitize_positive(right_vec[:, 0].reshape(d, d))
    wr, vr = np.linalg.eigh(right)
    if wr.min() < 1e-12 * wr.max():
        raise DegenerateSpectrumError(
            "right fixed point is rank-deficient", spectrum=vals
        )
    # symmetric square root: stable when the fixed point is (close to) a
    # multiple of the identity, where eigh's basis is arbitrary
    gauge = (vr * np.sqrt(wr)) @ vr.conj().T
    gauge_inv = (vr * (1.0 / np.sqrt(wr))) @ vr.conj().T
    gauged = [gauge_inv @ m @ gauge for m in rescaled]

    out = build_mps(gauged, tensor.basis_labels)
    left_mat = channel_matrix(out).conj().T
    _, lvecs = eig_sorted(left_mat)
    lam = hermitize_positive(lvecs[:, 0].reshape(d, d))
    lam = lam / np.trace(lam).real
    if len(vals) > 1 and abs(vals[1]) > 0.0:
        xi = -1.0 / math.log(abs(vals[1]))
    else:
        xi = 0.0
    return CanonicalData(
        tensor=out,
        right_fixed_point=_freeze(np.eye(d)),
        left_fixed_point=_freeze(lam),
        spectrum=_freeze(vals),
        xi=xi,
        degenerate=False,
        normalization=scale,
    )


def amplitude(tensor, outcome_string):
    """tr(A_{i1} ... A_{in}) for a finite string (periodic-chain convention)."""
    if not outcome_string:
        raise ValueError("empty outcome string")
    prod = np.eye(tensor.bond_dim, dtype=complex)
    for label in outcome_string:
        prod = prod @ tensor.matrix(label)
    return complex(np.trace(prod))


def _window_expectation_channel(canon, u, n):
    """<u x ... x u> over an n-site window via iterated channel application.

    Uses canonical edge operators (lam left, identity right).
    """
    mat = channel_matrix(canon.tensor, u, physical=True)
    x = np.eye(canon.tensor.bond_dim, dtype=complex).reshape(-1)
    for _ in range(n):
        x = mat @ x
    d = canon.tensor.bond_dim
    return complex(np.trace(canon.lam @ x.reshape(d, d)))


def _window_expectation_sum(canon, u, n):
    """Same quantity as an explicit sum over all d^n outcome strings.

    Decomposes ``u`` in its eigenbasis (it must be normal) and sums
    eigenvalue products weighted by outcome-string Born probabilities.
    """
    u = np.asarray(u, dtype=complex)
    if np.max(np.abs(u @ dag(u) - dag(u) @ u)) > 1e-10 * max(np.max(np.abs(u)) ** 2, 1e-300):
        raise ValueError("outcome-sum oracle needs a normal operator")
    nu, w = np.linalg.eig(u)
    mats = canon.tensor.matrices
    d = len(mats)
    kraus = [sum(w[mu, k].conj() * mats[mu] for mu in range(d)) for k in range(d)]
    lam = canon.lam
    total = 0.0 + 0.0j
    for string in itertools.product(range(d), repeat=n):
        prod = np.eye(canon.tensor.bond_dim, dtype=complex)
        weight = 1.0 + 0.0j
        for k in string:
            prod = prod @ kraus[k]
            weight *= nu[k]
        total += weight * np.trace(lam @ prod @ dag(prod))
    return complex(total)


def brute_force_string_expectation(tensor, u, n):
    """<psi| u^(x n) |psi> on an n-site window of the infinite canonical chain.

    Oracle-grade: computed by n-fold channel application and, for n <= 6,
    independently by the explicit d^n outcome-string sum; the two must agree
    to 1e-9.  Uses canonical edge operators, not the periodic trace.
    """
    if n < 1:
        raise ValueError("window length must be >= 1")
    if n > _BRUTE_FORCE_MAX_SITES:
        raise ResourceLimitError(
            f"window of {n} sites exceeds the brute-force limit "
            f"({_BRUTE_FORCE_MAX_SITES})"
        )
    canon = tensor if isinstance(tensor, CanonicalData) else canonicalize(tensor)
    value = _window_expectation_channel(canon, u, n)
    if n <= _BRUTE_FORCE_SUM_MAX_SITES:
        check = _window_expectation_sum(canon, u, n)
        if abs(value - check) > 1e-9:
            raise ArithmeticError(
                f"brute-force methods disagree: {value} vs {check}"
            )
    return value
