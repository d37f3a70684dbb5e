"""Exactly parameterized resource states: the spin-1 antiferromagnet point
(Pauli-matrix MPS) and the two-parameter octahedrally symmetric family with
a two-dimensional junk space.

The family covers a sphere: theta in [0, pi) and phi in [0, 2 pi), with
theta = pi the (South pole) limit point.  Out-of-range parameters are wrapped
back into range with a warning rather than rejected, so sweeps can sample
closed intervals.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._linalg import PAULI_X, PAULI_Y, PAULIS
from .mps_core import build_mps
from .symmetry import make_factorized

#: Bloch vectors n_mu of the junk-space triad, for mu = x, y, z.
TRIAD = (
    (-0.5) * PAULI_X + (math.sqrt(3.0) / 2.0) * PAULI_Y,
    (-0.5) * PAULI_X - (math.sqrt(3.0) / 2.0) * PAULI_Y,
    PAULI_X.copy(),
)


@dataclass(frozen=True)
class ToyModelParams:
    """Point on the two-parameter family sphere."""

    theta: float
    phi: float

    def __post_init__(self):
        theta, phi = self.theta, self.phi
        wrapped = False
        if not 0.0 <= phi < 2.0 * math.pi:
            phi = phi % (2.0 * math.pi)
            wrapped = True
        # theta = pi is the South-pole limit point; tolerate it exactly.
        if not 0.0 <= theta <= math.pi:
            theta = theta % (2.0 * math.pi)
            if theta > math.pi:
                theta = 2.0 * math.pi - theta
                phi = (phi + math.pi) % (2.0 * math.pi)
            wrapped = True
        if wrapped:
            warnings.warn(
                f"parameters wrapped into range: theta={theta:.6g}, phi={phi:.6g}",
                stacklevel=3,
            )
            object.__setattr__(self, "theta", theta)
            object.__setattr__(self, "phi", phi)


def toy_junk_ops(params):
    """The three junk operators a_mu(theta, phi) in label order (x, y, z)."""
    c = math.cos(params.theta / 2.0)
    s = math.sin(params.theta / 2.0) * np.exp(1.0j * params.phi)
    eye = np.eye(2, dtype=complex)
    return tuple((c * eye + s * n) / math.sqrt(3.0) for n in TRIAD)


def toy_tensor(params):
    """FactorizedTensor of the family member at ``params``.

    The construction is already in canonical form (both channel fixed points
    are maximally mixed), and the junk factors of the quarter-turn virtual
    operators are the triad operators themselves.
    """
    if not isinstance(params, ToyModelParams):
        params = ToyModelParams(*params)
    junk = toy_junk_ops(params)
    return make_factorized(
        junk_parts=junk,
        junk_symmetries={"z": TRIAD[2].copy(), "x": TRIAD[0].copy()},
    )


def aklt():
    """The unnormalized Pauli-matrix MPS (canonicalize rescales by 1/sqrt 3)."""
    return build_mps([p.copy() for p in PAULIS], ("x", "y", "z"))


def aklt_factorized():
    """The Pauli-matrix point as a FactorizedTensor with trivial junk space."""
    scale = np.array([[1.0 / math.sqrt(3.0)]], dtype=complex)
    one = np.array([[1.0]], dtype=complex)
    return make_factorized(
        junk_parts=(scale, scale, scale),
        junk_symmetries={"z": one, "x": one},
    )


def critical_theta():
    """Polar angle at which buffering annihilates the equal-rotation channel."""
    return 2.0 * math.atan(2.0)
