"""On-site octahedral symmetry: spin-1 rotations, virtual operators, and
the protected/junk factorization of the virtual space.

Conventions (pinned once, used everywhere):

* ``spin1_rotation(axis, angle)`` is the real orthogonal matrix rotating the
  Cartesian spin-1 basis (x, y, z); the z rotation by pi/2 maps
  |x> -> |y>, |y> -> -|x>, |z> -> |z>.
* A symmetric state satisfies  sum_nu u[nu, eta] A_nu = phase * U A_eta U^dag,
  which makes u -> U a (projective) homomorphism and makes U the modulus-1
  fixed point of the dressed transfer channel of ``transfer_channel``.  For
  the spin-1 antiferromagnet chain this yields the protected factor
  exp(-i pi/4 sigma_z) for the quarter-turn about z.
* Virtual operators are defined up to a phase; we fix it by making the first
  significant entry (row-major) real positive.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._linalg import (
    PAULIS,
    PAULI_Z,
    dag,
    eig_sorted,
    phase_fix_positive,
)
from .exceptions import (
    AmbiguousSymmetryError,
    FactorizationError,
    NotASymmetryError,
)
from .mps_core import CanonicalData, MPSTensor, build_mps, canonicalize, channel_matrix

_AXES = {"x": 0, "y": 1, "z": 2}


def spin1_rotation(axis, angle):
    """3x3 rotation of the Cartesian spin-1 basis (ordering x, y, z)."""
    if axis not in _AXES:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    c, s = math.cos(angle), math.sin(angle)
    if axis == "z":
        rot = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
    elif axis == "x":
        rot = [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
    else:
        rot = [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
    return np.array(rot, dtype=complex)


@dataclass(frozen=True)
class SymmetryAction:
    """Physical operator with its induced virtual operator.

    ``phase`` is the modulus-1 channel eigenvalue (a 1D-representation factor,
    usually exactly 1); ``residual`` is the max-norm defect of

        sum_nu u[nu, eta] A_nu - phase * U A_eta U^dag

    over all eta.  An accepted action has residual below 1e-8.
    """

    physical: np.ndarray
    virtual_op: np.ndarray
    phase: complex
    residual: float


def _as_canonical(state):
    return state if isinstance(state, CanonicalData) else canonicalize(state)


def extract_virtual_symmetry(state, u, mod_tol=1e-6):
    """Virtual operator of a physical symmetry on a short-range-correlated state.

    ``U`` is the unique modulus-1 eigenvector of the dressed transfer channel,
    reshaped to D x D, polar-corrected to exact unitarity, and phase-fixed.
    """
    canon = _as_canonical(state)
    tensor = canon.tensor
    u = np.asarray(u, dtype=complex)
    mat = channel_matrix(tensor, u)
    vals, vecs = eig_sorted(mat)
    mods = np.abs(vals)
    top = np.abs(mods - 1.0) <= mod_tol
    count = int(np.count_nonzero(top))
    if count == 0:
        raise NotASymmetryError(
            f"no modulus-1 transfer eigenvalue (largest modulus {mods[0]:.6g})"
        )
    if count > 1:
        raise AmbiguousSymmetryError(
            f"{count} modulus-1 eigenvalues; virtual operator is not unique"
        )
    d = tensor.bond_dim
    idx = int(np.nonzero(top)[0][0])
    raw = vecs[:, idx].reshape(d, d)
    # polar correction: nearest unitary
    w, _, vh = np.linalg.svd(raw)
    virt = phase_fix_positive(w @ vh)
    phase = vals[idx] / abs(vals[idx])
    residual = 0.0
    mats = tensor.matrices
    for eta in range(tensor.physical_dim):
        lhs = sum(u[nu, eta] * mats[nu] for nu in range(tensor.physical_dim))
        rhs = phase * virt @ mats[eta] @ dag(virt)
        residual = max(residual, float(np.max(np.abs(lhs - rhs))))
    virt = np.asarray(virt)
    virt.setflags(write=False)
    return SymmetryAction(physical=u, virtual_op=virt, phase=complex(phase), residual=residual)


@dataclass(frozen=True)
class PhaseLabel:
    """Symmetry-protected phase of a state under the pi-rotation group."""

    value: str  # "Trivial" or "D2_SPTO"
    commutator_sign: complex


def classify_d2_phase(state, tol=1e-6):
    """Phase label from the group commutator of the pi-rotation virtual operators.

    Reports tr(Ux Uz Ux^dag Uz^dag)/D, which is +1 in the trivial phase and
    -1 in the nontrivial one whenever the virtual space is an irreducible
    block; anything else raises.
    """
    canon = _as_canonical(state)
    ux = extract_virtual_symmetry(canon, spin1_rotation("x", math.pi)).virtual_op
    uz = extract_virtual_symmetry(canon, spin1_rotation("z", math.pi)).virtual_op
    d = canon.tensor.bond_dim
    sign = complex(np.trace(ux @ uz @ dag(ux) @ dag(uz)) / d)
    if abs(sign - 1.0) < tol:
        return PhaseLabel(value="Trivial", commutator_sign=sign)
    if abs(sign + 1.0) < tol:
        return PhaseLabel(value="D2_SPTO", commutator_sign=sign)
    raise FactorizationError(
        f"commutator scalar {sign:.6g} is not +-1: reducible virtual space"
    )


@dataclass(frozen=True)
class S4Report:
    """Invariance residuals under the two quarter-turn generators."""

    residual_x: float
    residual_z: float

    @property
    def max_residual(self):
        return max(self.residual_x, self.residual_z)

    @property
    def accepted(self):
        return self.max_residual < 1e-8


def verify_s4_invariance(state):
    """Check invariance under pi/2 rotations about x and z."""
    canon = _as_canonical(state)
    residuals = {}
    for axis in ("x", "z"):
        u = spin1_rotation(axis, math.pi / 2)
        try:
            residuals[axis] = extract_virtual_symmetry(canon, u).residual
        except (NotASymmetryError, AmbiguousSymmetryError):
            residuals[axis] = math.inf
    return S4Report(residual_x=residuals["x"], residual_z=residuals["z"])


@dataclass(frozen=True)
class FactorizedTensor:
    """MPS tensor split as A_mu = sigma_mu (x) a_mu.

    ``protected_parts`` are exactly the standard Pauli matrices in the order
    (x, y, z); ``junk_parts`` carry all state dependence.  The junk factors of
    the quarter-turn virtual operators are stored per generator axis; each
    squares to the identity.  ``basis`` is the unitary mapping the parent
    tensor's virtual space onto the factorizing (protected x junk) basis.
    """

    protected_parts: tuple
    junk_parts: tuple
    parent: MPSTensor
    virtual_junk_symmetries: dict
    basis: np.ndarray

    @property
    def junk_dim(self):
        return self.junk_parts[0].shape[0]

    @property
    def basis_labels(self):
        return self.parent.basis_labels

    def junk(self, label):
        return self.junk_parts[{"x": 0, "y": 1, "z": 2}[label]]

    def to_mps(self):
        """Kronecker-assembled MPSTensor in the factorizing basis."""
        mats = [np.kron(s, a) for s, a in zip(self.protected_parts, self.junk_parts)]
        return build_mps(mats, self.parent.basis_labels)


def make_factorized(junk_parts, junk_symmetries, labels=("x", "y", "z")):
    """FactorizedTensor from explicit junk operators (protected parts standard)."""
    junk = tuple(np.asarray(a, dtype=complex) for a in junk_parts)
    parent = build_mps([np.kron(s, a) for s, a in zip(PAULIS, junk)], labels)
    dim = junk[0].shape[0]
    return FactorizedTensor(
        protected_parts=tuple(p.copy() for p in PAULIS),
        junk_parts=junk,
        parent=parent,
        virtual_junk_symmetries=dict(junk_symmetries),
        basis=np.eye(2 * dim, dtype=complex),
    )


def _sign_fix(a, rel_tol=1e-8):
    """Sign s in {+1, -1} making Re tr(a) > 0, falling back to the first
    significant entry when the trace vanishes."""
    tr = np.trace(a)
    scale = max(np.max(np.abs(a)), 1e-300)
    if abs(tr) > rel_tol * scale:
        if tr.real < -rel_tol * scale or (abs(tr.real) <= rel_tol * scale and tr.imag < 0):
            return -1.0
        return 1.0
    for entry in a.reshape(-1):
        if abs(entry) > rel_tol * scale:
            if entry.real < -rel_tol * scale or (
                abs(entry.real) <= rel_tol * scale and entry.imag < 0
            ):
                return -1.0
            return 1.0
    return 1.0


def _normalize_involution(w, tol=1e-6):
    """Rescale a block proportional to an involution so it squares to I.

    The input may carry an arbitrary complex scale; the output W satisfies
    W^2 = I with the overall sign fixed by ``_sign_fix``.
    """
    sq = w @ w
    n = sq.shape[0]
    c = np.trace(sq) / n
    scale = max(np.max(np.abs(w)) ** 2, 1e-300)
    if abs(c) < tol * scale or np.max(np.abs(sq - c * np.eye(n))) > tol * abs(c):
        raise FactorizationError("junk symmetry factor does not square to a scalar")
    w = w / np.sqrt(c)
    return w * _sign_fix(w)


def _involution(u, tol=1e-6):
    """Phase-normalize a virtual pi-rotation so it squares to the identity."""
    sq = u @ u
    c = np.trace(sq) / sq.shape[0]
    if abs(abs(c) - 1.0) > tol or np.max(np.abs(sq - c * np.eye(sq.shape[0]))) > tol:
        raise FactorizationError("pi-rotation operator does not square to a phase")
    out = u / np.sqrt(c)
    if np.max(np.abs(out - dag(out))) > tol:
        raise FactorizationError("normalized pi-rotation is not Hermitian")
    return out


def factorize_protected_junk(state, tol=1e-10):
    """Find the basis in which all matrices are Kronecker products sigma_mu (x) a_mu.

    Requires a state in the nontrivial pi-rotation phase with even bond
    dimension.  The protected parts come out as exactly the standard Paulis.
    The junk parts are determined up to a junk-space gauge; the two discrete
    ambiguities are resolved by the quarter-turn block structure (which
    orients the protected qubit) and by making tr(a_x) point to the positive
    real half-plane.
    """
    canon = _as_canonical(state)
    tensor = canon.tensor
    dim = tensor.bond_dim
    if dim % 2 != 0:
        raise FactorizationError(f"bond dimension {dim} is odd")
    label = classify_d2_phase(canon)
    if label.value != "D2_SPTO":
        raise FactorizationError("state is in the trivial phase; no protected qubit")

    uz = _involution(extract_virtual_symmetry(canon, spin1_rotation("z", math.pi)).virtual_op)
    ux = _involution(extract_virtual_symmetry(canon, spin1_rotation("x", math.pi)).virtual_op)

    half = dim // 2
    w = np.linalg.eigvalsh(uz)
    if np.count_nonzero(w > 0) != half:
        raise FactorizationError("pi-rotation eigenspaces are not half-dimensional")
    urz = extract_virtual_symmetry(canon, spin1_rotation("z", math.pi / 2)).virtual_op

    def eigenbasis(sign):
        # Orthonormal basis of the +-1 eigenspace by Gram-Schmidt over the
        # spectral projector's columns in index order; an input already in
        # Kronecker form then keeps its own junk frame (and so returns its
        # own junk operators).
        proj = 0.5 * (np.eye(dim) + sign * uz)
        cols = []
        for j in range(dim):
            v = proj[:, j].copy()
            for c in cols:
                v -= (c.conj() @ v) * c
            norm = np.linalg.norm(v)
            if norm > 1e-6:
                cols.append(v / norm)
            if len(cols) == half:
                break
        if len(cols) != half:
            raise FactorizationError("could not span the pi-rotation eigenspace")
        return np.column_stack(cols)

    def assemble(qp):
        qm = ux @ qp
        basis = np.hstack([qp, qm])
        return basis, dag(basis) @ urz @ basis

    v_basis, t = assemble(eigenbasis(+1.0))
    off = max(np.max(np.abs(t[:half, half:])), np.max(np.abs(t[half:, :half])))
    if off > 1e-6:
        raise FactorizationError("quarter-turn operator is not block diagonal")
    # The two diagonal blocks are exp(-i pi/4) W and exp(+i pi/4) W; their
    # relative phase orients the protected qubit independently of the overall
    # extraction phase: tr(T1 T0^dag) points along +i when |0> comes first.
    s = np.trace(t[half:, half:] @ dag(t[:half, :half]))
    if abs(s) < 1e-9:
        raise FactorizationError("cannot orient protected blocks")
    if s.imag < 0:
        v_basis, t = assemble(eigenbasis(-1.0))

    bx, by, bz = (dag(v_basis) @ tensor.matrix(l) @ v_basis for l in ("x", "y", "z"))
    a_z = bz[:half, :half]
    a_x = bx[:half, half:]
    a_y = 1.0j * by[:half, half:]
    # remaining freedom: the sign of the U_x eigenbasis pairing flips (a_x, a_y)
    sx = _sign_fix(a_x)
    if sx < 0:
        a_x, a_y = -a_x, -a_y
        v_basis = v_basis @ np.kron(PAULI_Z, np.eye(half))
        t = dag(v_basis) @ urz @ v_basis

    junk = (a_x, a_y, a_z)
    err = max(
        np.max(np.abs(np.kron(s_, a_) - dag(v_basis) @ tensor.matrix(l) @ v_basis))
        for s_, a_, l in zip(PAULIS, junk, ("x", "y", "z"))
    )
    if err > tol:
        raise FactorizationError(f"factorization residual {err:.3g} exceeds {tol}")

    wz = _normalize_involution(t[:half, :half])
    urx = extract_virtual_symmetry(canon, spin1_rotation("x", math.pi / 2)).virtual_op
    tx = dag(v_basis) @ urx @ v_basis
    wx = _normalize_involution(tx[:half, :half])

    return FactorizedTensor(
        protected_parts=tuple(p.copy() for p in PAULIS),
        junk_parts=junk,
        parent=tensor,
        virtual_junk_symmetries={"z": wz, "x": wx},
        basis=v_basis,
    )
