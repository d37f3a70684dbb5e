"""Buffering renormalization of factorized tensors.

Postselecting the axis outcome on m sites to each side of a computational
site conjugates its junk operators by the m-th power of the axis junk
operator.  The flow's length scale zeta is set by the ratio of the two
largest junk eigenvalue moduli (infinite when they tie, in which case the
flow stalls).  The m -> infinity limit projects the junk space onto the top
spectral block; when the projected non-axis operators vanish identically the
fixed point is degenerate (flagged, not an error) and the renormalized
correlation length diverges.

Axis conventions: z-buffering pairs (a_x, a_y) through the junk symmetry
factor of the quarter turn about z; x-buffering pairs (a_z, a_y) through the
one about x.  ``a_plus``/``a_minus`` are half the sum/difference of the pair
in that order.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._linalg import (
    DEGENERACY_TOL,
    dag,
    eig_sorted,
    hermitize_positive,
    is_normal,
    matrix_power_stable,
)
from .exceptions import SptmqcError, StalledFlowError
from .mps_core import INF
from .symmetry import FactorizedTensor, make_factorized

#: buffering axis -> (base label, plus-pair labels)
_AXIS_PAIRS = {"z": ("z", ("x", "y")), "x": ("x", ("z", "y"))}
_LABEL_INDEX = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class JordanSpectrum:
    """Block spectrum of a junk operator together with its symmetry labels.

    ``eigenvalues`` lists one representative eigenvalue per block, sorted by
    modulus (descending); ``chi_labels`` are the +-1 eigenvalues of the junk
    symmetry factor on each block's invariant subspace.  ``zeta`` is
    1/log(|lambda_1/lambda_2|) across distinct blocks, 0 for a single block,
    and infinite when the two largest moduli tie.
    """

    eigenvalues: tuple
    block_dims: tuple
    chi_labels: tuple
    zeta: float
    normal: bool


def _cluster(vals, rel_tol=DEGENERACY_TOL):
    """Group sorted eigenvalues into clusters of (numerically) equal values."""
    scale = max(np.max(np.abs(vals)), 1e-300)
    clusters = []
    for i, v in enumerate(vals):
        if clusters and abs(v - vals[clusters[-1][0]]) <= rel_tol * scale:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def junk_spectrum(a, u_junk, tol=1e-8):
    """JordanSpectrum of junk operator ``a`` under symmetry factor ``u_junk``.

    ``u_junk`` must square to the identity and commute with ``a``.  Normal
    operators are eigendecomposed (all blocks one-dimensional); otherwise a
    Schur form is used and eigenvalues are clustered with relative gap 1e-8,
    so block dimensions are cluster sizes rather than literal Jordan sizes.
    """
    a = np.asarray(a, dtype=complex)
    u_junk = np.asarray(u_junk, dtype=complex)
    scale = max(np.max(np.abs(a)), 1e-300)
    if np.max(np.abs(u_junk @ u_junk - np.eye(a.shape[0]))) > tol:
        raise SptmqcError("junk symmetry factor does not square to the identity")
    if np.max(np.abs(u_junk @ a - a @ u_junk)) > tol * scale:
        raise SptmqcError("junk symmetry factor does not commute with the operator")

    normal = is_normal(a)
    if normal:
        vals, vecs = eig_sorted(a)
        chis = []
        for k in range(len(vals)):
            v = vecs[:, k]
            chis.append(1.0 if (v.conj() @ u_junk @ v).real >= 0.0 else -1.0)
        eigenvalues = tuple(complex(v) for v in vals)
        block_dims = tuple(1 for _ in vals)
        chi_labels = tuple(chis)
    else:
        tmat, q = scipy.linalg.schur(a, output="complex")
        diag = np.diag(tmat)
        order = np.lexsort((-diag.imag, -diag.real, -np.abs(diag)))
        sorted_vals = diag[order]
        clusters = _cluster(sorted_vals)
        eigenvalues, block_dims, chi_labels = [], [], []
        for cluster in clusters:
            target = sorted_vals[cluster[0]]
            csize = len(cluster)
            # reorder the Schur form so this cluster's invariant subspace
            # occupies the leading columns
            tsel, qsel, _ = scipy.linalg.schur(
                a,
                output="complex",
                sort=lambda lam: abs(lam - target) <= DEGENERACY_TOL * max(abs(target), 1e-300),
            )
            qs = qsel[:, :csize]
            ray = np.trace(dag(qs) @ u_junk @ qs).real / csize
            eigenvalues.append(complex(target))
            block_dims.append(csize)
            chi_labels.append(1.0 if ray >= 0.0 else -1.0)
        eigenvalues = tuple(eigenvalues)
        block_dims = tuple(block_dims)
        chi_labels = tuple(chi_labels)

    mods = [abs(v) for v in eigenvalues]
    if len(mods) == 1:
        zeta = 0.0
    elif mods[1] >= (1.0 - DEGENERACY_TOL) * mods[0]:
        zeta = INF
    elif mods[1] <= 1e-14 * mods[0]:
        zeta = 0.0
    else:
        zeta = 1.0 / math.log(mods[0] / mods[1])
    return JordanSpectrum(
        eigenvalues=eigenvalues,
        block_dims=block_dims,
        chi_labels=chi_labels,
        zeta=zeta,
        normal=normal,
    )


@dataclass(frozen=True)
class RenormResult:
    """Buffered (or limit) tensor with its flow data.

    ``tensor_m`` keeps the junk operators in the original junk frame for
    finite m, restricted to the fixed-point support for the limit; a common
    rescale makes the transfer channel's spectral radius 1.  ``pi_projector``
    / ``lambda_tilde`` / ``u_tilde`` are reported in the original junk frame
    (full size), while ``a_plus``/``a_minus`` match ``tensor_m``'s frame.
    ``m`` is None for the analytic limit.
    """

    m: object
    axis: str
    tensor_m: FactorizedTensor
    a_plus: np.ndarray
    a_minus: np.ndarray
    pi_projector: np.ndarray
    lambda_tilde: np.ndarray
    xi_tilde: float
    u_tilde: np.ndarray
    degenerate: bool
    channel_spectrum: np.ndarray
    support_basis: np.ndarray


#: Pauli-sector signs: sigma_mu sigma_w sigma_mu^dag = s[w][mu] sigma_w.
_SECTOR_SIGNS = {
    "I": (1.0, 1.0, 1.0),
    "x": (1.0, -1.0, -1.0),
    "y": (-1.0, 1.0, -1.0),
    "z": (-1.0, -1.0, 1.0),
}


def sector_channel_matrices(junk_parts):
    """The four junk-sector blocks of a factorized tensor's transfer channel.

    Because the protected parts are exactly Paulis, operators of the form
    sigma_w (x) Y close under the channel; the full spectrum is the union of
    these four J^2 x J^2 blocks.
    """
    out = {}
    for w, signs in _SECTOR_SIGNS.items():
        out[w] = sum(
            s * np.kron(a, a.conj()) for s, a in zip(signs, junk_parts)
        )
    return out


def _channel_spectrum(factorized):
    vals = np.concatenate(
        [np.linalg.eigvals(m) for m in sector_channel_matrices(factorized.junk_parts).values()]
    )
    order = np.lexsort((-vals.imag, -vals.real, -np.abs(vals)))
    return vals[order]


def _junk_channel_matrix(junk_parts):
    return sum(np.kron(a, a.conj()) for a in junk_parts)


def _left_edge_mode(junk_parts):
    """Trace-1 positive left fixed point of the junk-sector channel."""
    mat = _junk_channel_matrix(junk_parts).conj().T
    _, vecs = eig_sorted(mat)
    j = junk_parts[0].shape[0]
    lam = hermitize_positive(vecs[:, 0].reshape(j, j))
    return lam / np.trace(lam).real


def _xi_from_spectrum(vals):
    mods = np.abs(vals) / abs(vals[0])
    if len(mods) > 1 and mods[1] >= 1.0 - DEGENERACY_TOL:
        return INF, True
    if len(mods) > 1 and mods[1] > 0.0:
        return -1.0 / math.log(mods[1]), False
    return 0.0, False


def _pair_ops(factorized, axis):
    base_label, (p1, p2) = _AXIS_PAIRS[axis]
    return (
        factorized.junk(base_label),
        factorized.junk(p1),
        factorized.junk(p2),
        factorized.virtual_junk_symmetries[axis],
    )


def buffer(factorized, axis, m):
    """Buffered tensor at depth ``m``: junk parts a_axis^m a_mu a_axis^m.

    The protected parts are untouched (the axis operator acts as a Pauli on
    the protected space and the two buffer halves square it away); the result
    is rescaled so the transfer channel has unit spectral radius.
    """
    if axis not in _AXIS_PAIRS:
        raise ValueError(f"axis must be 'x' or 'z', got {axis!r}")
    if not isinstance(m, (int, np.integer)) or m < 0:
        raise ValueError(f"buffering depth must be a nonnegative integer, got {m!r}")
    base, _, _, w_sym = _pair_ops(factorized, axis)

    if m == 0:
        power = np.eye(factorized.junk_dim, dtype=complex)
        prescale = 1.0
    else:
        vals = np.linalg.eigvals(base)
        prescale = float(np.max(np.abs(vals)))
        if prescale <= 0.0:
            raise SptmqcError("axis junk operator is nilpotent; cannot buffer")
        power = matrix_power_stable(base / prescale, m)

    buffered = tuple(power @ a @ power for a in factorized.junk_parts)
    trial = make_factorized(buffered, factorized.virtual_junk_symmetries,
                            labels=factorized.basis_labels)
    spectrum = _channel_spectrum(trial)
    radius = abs(spectrum[0])
    scaled = tuple(a / math.sqrt(radius) for a in buffered)
    tensor_m = make_factorized(scaled, factorized.virtual_junk_symmetries,
                               labels=factorized.basis_labels)
    spectrum = spectrum / radius
    xi, degenerate = _xi_from_spectrum(spectrum)

    _, p1, p2, _ = _pair_ops(tensor_m, axis)
    a_plus = 0.5 * (p1 + p2)
    a_minus = 0.5 * (p1 - p2)
    j = factorized.junk_dim
    try:
        lam = _left_edge_mode(tensor_m.junk_parts)
    except SptmqcError:
        lam = np.eye(j, dtype=complex) / j
    return RenormResult(
        m=int(m),
        axis=axis,
        tensor_m=tensor_m,
        a_plus=a_plus,
        a_minus=a_minus,
        pi_projector=np.eye(j, dtype=complex),
        lambda_tilde=lam,
        xi_tilde=xi,
        u_tilde=np.asarray(w_sym, dtype=complex),
        degenerate=degenerate,
        channel_spectrum=spectrum,
        support_basis=np.eye(j, dtype=complex),
    )


def fixed_point(factorized, axis):
    """Analytic m -> infinity limit of ``buffer``.

    Projects the junk space onto the top spectral block of the axis operator.
    Raises StalledFlowError when the flow has no limit (tied top moduli).  A
    vanishing projected pair with surviving axis operator is the degenerate
    fixed point: flagged, with infinite renormalized correlation length.
    """
    base, p1, p2, w_sym = _pair_ops(factorized, axis)
    spect = junk_spectrum(base, w_sym)
    if math.isinf(spect.zeta):
        raise StalledFlowError(
            "flow stalls: the two largest junk eigenvalue moduli coincide"
        )

    vals, vecs = eig_sorted(base)
    scale = max(np.max(np.abs(vals)), 1e-300)
    top = np.abs(vals - vals[0]) <= DEGENERACY_TOL * scale
    k = int(np.count_nonzero(top))
    if spect.normal:
        q, _ = np.linalg.qr(vecs[:, top])
        spectral = q @ dag(q)
    else:
        # oblique spectral projector of the leading cluster from the right
        # and left invariant subspaces; a^m / lambda_1^m converges to it
        target = vals[0]
        _, qr_, _ = scipy.linalg.schur(
            base,
            output="complex",
            sort=lambda lam: abs(lam - target) <= DEGENERACY_TOL * scale,
        )
        _, ql_, _ = scipy.linalg.schur(
            dag(base),
            output="complex",
            sort=lambda lam: abs(lam - np.conj(target)) <= DEGENERACY_TOL * scale,
        )
        q, ql = qr_[:, :k], ql_[:, :k]
        overlap = dag(ql) @ q
        if np.linalg.cond(overlap) > 1e8:
            raise SptmqcError(
                "leading junk eigenvalue is defective; the flow converges "
                "only polynomially and has no projector limit"
            )
        spectral = q @ np.linalg.inv(overlap) @ dag(ql)
    j = factorized.junk_dim
    pi = q @ dag(q)

    restricted = tuple(
        dag(q) @ spectral @ a @ spectral @ q for a in factorized.junk_parts
    )
    base_label, (l1, l2) = _AXIS_PAIRS[axis]
    r = {lbl: restricted[_LABEL_INDEX[lbl]] for lbl in ("x", "y", "z")}
    norm_base = np.max(np.abs(r[base_label]))
    norm_pair = max(np.max(np.abs(r[l1])), np.max(np.abs(r[l2])))
    degenerate = norm_pair <= 1e-12 * max(norm_base, 1e-300) and norm_base > 0.0

    junk_syms = {ax: dag(q) @ ws @ q for ax, ws in factorized.virtual_junk_symmetries.items()}
    trial = make_factorized(restricted, junk_syms, labels=factorized.basis_labels)
    spectrum = _channel_spectrum(trial)
    radius = abs(spectrum[0])
    scaled = tuple(a / math.sqrt(radius) for a in restricted)
    tensor_m = make_factorized(scaled, junk_syms, labels=factorized.basis_labels)
    spectrum = spectrum / radius

    if degenerate:
        xi = INF
        lam_restricted = np.eye(k, dtype=complex) / k
    else:
        xi, chan_degenerate = _xi_from_spectrum(spectrum)
        degenerate = degenerate or chan_degenerate
        if degenerate:
            xi = INF
        try:
            lam_restricted = _left_edge_mode(tensor_m.junk_parts)
        except SptmqcError:
            lam_restricted = np.eye(k, dtype=complex) / k

    _, rp1, rp2, _ = _pair_ops(tensor_m, axis)
    return RenormResult(
        m=None,
        axis=axis,
        tensor_m=tensor_m,
        a_plus=0.5 * (rp1 + rp2),
        a_minus=0.5 * (rp1 - rp2),
        pi_projector=pi,
        lambda_tilde=q @ lam_restricted @ dag(q),
        xi_tilde=xi,
        u_tilde=pi @ w_sym @ pi,
        degenerate=degenerate,
        channel_spectrum=spectrum,
        support_basis=q,
    )


def xi_tilde(result):
    """Renormalized correlation length of a buffered or limit tensor."""
    return result.xi_tilde
