"""Arbitrary-precision probe of the renormalized correlation length.

Near the degenerate fixed point the gap between the leading transfer
eigenvalues closes like a high power of the flow ratio, far below what a
double-precision eigensolve can resolve after a few buffering steps.  This
module rebuilds the two-parameter family in mpmath and evaluates the
buffered channel's sector spectra exactly enough to follow the growth of
the renormalized correlation length.
"""

import mpmath as mp

_SECTOR_SIGNS = (
    (1, 1, 1),
    (1, -1, -1),
    (-1, 1, -1),
    (-1, -1, 1),
)
_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


def _triad():
    r = mp.sqrt(3) / 2
    n_x = mp.matrix([[0, mp.mpc(-0.5, 0) - mp.mpc(0, 1) * r],
                     [mp.mpc(-0.5, 0) + mp.mpc(0, 1) * r, 0]])
    n_y = mp.matrix([[0, mp.mpc(-0.5, 0) + mp.mpc(0, 1) * r],
                     [mp.mpc(-0.5, 0) - mp.mpc(0, 1) * r, 0]])
    n_z = mp.matrix([[0, 1], [1, 0]])
    return n_x, n_y, n_z


def _junk_ops(theta, phi):
    c = mp.cos(theta / 2)
    s = mp.exp(mp.mpc(0, 1) * phi) * mp.sin(theta / 2)
    root3 = mp.sqrt(3)
    eye = mp.eye(2)
    return tuple((c * eye + s * n) / root3 for n in _triad())


def _kron2(a, b):
    out = mp.zeros(4, 4)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    out[2 * i + k, 2 * j + l] = a[i, j] * b[k, l]
    return out


def _conj(a):
    out = mp.zeros(a.rows, a.cols)
    for i in range(a.rows):
        for j in range(a.cols):
            out[i, j] = mp.conj(a[i, j])
    return out


def _mat_pow(a, n):
    out = mp.eye(a.rows)
    for _ in range(n):
        out = out * a
    return out


def xi_tilde_profile(theta, phi, m_list, axis="z", dps=60):
    """Renormalized correlation length of buffered family members, exactly.

    ``theta`` and ``phi`` may be mpmath expressions (e.g. 2*mp.atan(2)) or
    floats; returns one float per entry of ``m_list``.
    """
    m_list = [int(m) for m in m_list]
    with mp.workdps(dps):
        theta = mp.mpmathify(theta)
        phi = mp.mpmathify(phi)
        junk = _junk_ops(theta, phi)
        base = junk[_AXIS_INDEX[axis]]
        out = []
        for m in m_list:
            p = _mat_pow(base, m)
            buffered = [p * a * p for a in junk]
            mods = []
            for signs in _SECTOR_SIGNS:
                mat = mp.zeros(4, 4)
                for s, a in zip(signs, buffered):
                    mat += s * _kron2(a, _conj(a))
                for val in mp.eig(mat, left=False, right=False):
                    mods.append(abs(val))
            mods.sort(reverse=True)
            ratio = mods[1] / mods[0]
            if ratio >= 1:
                out.append(float("inf"))
            else:
                out.append(float(-1 / mp.log(ratio)))
    return out
