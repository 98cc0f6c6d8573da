"""Index-1 semi-Euclidean algebra on R^3: inner product, causal
classification, Lorentzian cross product and pseudo-norm.

Vectors are plain containers indexed 0..2 with the first slot timelike:
numpy arrays of shape (3,) or (3, ...) for numeric work, or length-3
sequences of jets for derivative propagation.  All functions here are pure
arithmetic over ``+``/``*`` so both payloads work unchanged.

The cross product convention is pinned by the orthonormal-frame identities
it must satisfy (see `tests/test_minkowski.py`): with e0 = (1,0,0) timelike,
e1 x e2 = +e0, and for any positively oriented orthonormal frame (a, b, c)
with metric signs (ea, eb, ec):

    a x b = -ec c,    b x c = -ea a,    c x a = -eb b.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .jets import jet_abs, jet_sqrt

__all__ = [
    "TAU_CAUSAL",
    "CausalCharacter",
    "CaseSignature",
    "mvec",
    "inner",
    "lorentz_cross",
    "pseudo_norm",
    "causal_character",
]

# Classification band on <v,v> for unit-magnitude inputs; inside it a
# near-null vector cannot be reliably told apart from a null one.
TAU_CAUSAL = 1e-10


class CausalCharacter(enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    NULL = "null"


@dataclass(frozen=True)
class CaseSignature:
    """Metric signs (eps1, eps2, eps3) = (<T,T>, <Q,Q>, <n,n>) of a Darboux
    frame; exactly one entry is -1 in an orthonormal frame of index 1."""

    eps1: int
    eps2: int
    eps3: int

    def __post_init__(self):
        signs = (self.eps1, self.eps2, self.eps3)
        if any(s not in (-1, 1) for s in signs):
            raise ValueError(f"signature entries must be +-1, got {signs}")
        if sum(s == -1 for s in signs) != 1:
            raise ValueError(f"exactly one signature entry must be -1, got {signs}")

    def astuple(self):
        return (self.eps1, self.eps2, self.eps3)


def mvec(x0, x1, x2) -> np.ndarray:
    """Validated 3-vector; coordinates must be finite."""
    v = np.array([x0, x1, x2], dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector coordinates: {v}")
    return v


def inner(u, w):
    """<u,w> = -u0*w0 + u1*w1 + u2*w2."""
    return -(u[0] * w[0]) + u[1] * w[1] + u[2] * w[2]


def lorentz_cross(u, w):
    """Bilinear antisymmetric product with <u x w, u> = <u x w, w> = 0.

    Components satisfy <u x w, z> = det[w; u; z]; equivalently the Euclidean
    cross product with the timelike component negated.  e1 x e2 = +e0.
    """
    c0 = u[1] * w[2] - u[2] * w[1]
    c1 = u[0] * w[2] - u[2] * w[0]
    c2 = u[1] * w[0] - u[0] * w[1]
    if isinstance(u, np.ndarray) and isinstance(w, np.ndarray):
        return np.stack([np.asarray(c0), np.asarray(c1), np.asarray(c2)])
    return (c0, c1, c2)


def pseudo_norm(v):
    """sqrt(|<v,v>|); vanishes exactly on null and zero vectors."""
    return jet_sqrt(jet_abs(inner(v, v)))


def causal_character(v, tol: float = TAU_CAUSAL) -> CausalCharacter:
    """Trichotomy on <v,v>: spacelike (> 0 or v = 0), null (= 0, v != 0),
    timelike (< 0).  Zero tests use `tol` in place of exact comparison."""
    v = np.asarray(v, dtype=float)
    if np.all(np.abs(v) <= tol):
        return CausalCharacter.SPACELIKE
    q = inner(v, v)
    if abs(q) <= tol:
        return CausalCharacter.NULL
    return CausalCharacter.TIMELIKE if q < 0 else CausalCharacter.SPACELIKE
