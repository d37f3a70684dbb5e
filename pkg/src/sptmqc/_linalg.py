"""Small dense linear-algebra helpers shared across the package.

Everything here operates on small complex matrices (bond dimensions of a
few), so plain dense eigensolves are always the right tool.
"""

import numpy as np

from .exceptions import DegenerateSpectrumError

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

#: Relative gap below which two eigenvalue moduli are treated as tied.
DEGENERACY_TOL = 1e-8


def dag(a):
    return a.conj().T


def eig_sorted(mat):
    """Eigen-decomposition with a deterministic ordering.

    Eigenvalues are sorted by (modulus desc, real part desc, imag part desc);
    the eigenvector columns are permuted accordingly.
    """
    vals, vecs = np.linalg.eig(mat)
    order = np.lexsort((-vals.imag, -vals.real, -np.abs(vals)))
    return vals[order], vecs[:, order]


def phase_fix_positive(mat, rel_tol=1e-9):
    """Rescale by a phase so the first significant entry (row-major) is real positive."""
    flat = mat.reshape(-1)
    scale = np.max(np.abs(flat))
    if scale == 0.0:
        return mat
    for entry in flat:
        if abs(entry) > rel_tol * scale:
            return mat * (abs(entry) / entry)
    return mat


def hermitize_positive(mat, tol=1e-10):
    """Turn a channel fixed-point eigenvector into a PSD matrix.

    Rotates the global phase so the trace is real positive, symmetrizes, and
    verifies positive semidefiniteness within ``tol`` (relative).
    """
    tr = np.trace(mat)
    if abs(tr) > tol * max(np.max(np.abs(mat)), 1e-300):
        mat = mat * (abs(tr) / tr)
    else:  # traceless candidate cannot be a positive fixed point
        raise DegenerateSpectrumError("channel fixed point is not positive")
    herm = 0.5 * (mat + dag(mat))
    w = np.linalg.eigvalsh(herm)
    if w.min() < -tol * max(w.max(), 1e-300):
        raise DegenerateSpectrumError(
            "channel fixed point has negative eigenvalues", spectrum=w
        )
    return herm


def matrix_power_stable(mat, n):
    """mat**n through the eigenbasis when diagonalizable, else repeated squaring."""
    if n == 0:
        return np.eye(mat.shape[0], dtype=complex)
    vals, vecs = np.linalg.eig(mat)
    if np.linalg.cond(vecs) < 1e8:
        return vecs @ np.diag(vals**n) @ np.linalg.inv(vecs)
    return np.linalg.matrix_power(mat, n)


def is_normal(mat, tol=1e-10):
    comm = mat @ dag(mat) - dag(mat) @ mat
    return np.max(np.abs(comm)) < tol * max(np.max(np.abs(mat)) ** 2, 1e-300)
