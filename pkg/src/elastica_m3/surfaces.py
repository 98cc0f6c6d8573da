"""Parsed surface patches x(u, v) with jet access and causal typing.

A patch is regular where x_u x x_v is neither null nor zero; there the unit
normal n = (x_u x x_v) / ||x_u x x_v|| exists and <n,n> = +-1 decides the
causal type: timelike normal means a spacelike surface, spacelike normal a
timelike surface.  Patches crossing that boundary are rejected.

Partial derivatives along a curve are obtained by augmenting the curve jet
with a one-step formal displacement in u (or v) and reading the displacement
column of the evaluated jet; nothing is ever differenced.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import expr as ex
from .errors import DegenerateNormalError, MixedCausalTypeError, OutOfDomainError
from .jets import Jet2, as_jet
from .minkowski import TAU_CAUSAL, inner, lorentz_cross

__all__ = [
    "SurfacePatch",
    "SurfaceType",
    "patch_from_strings",
    "position_jet",
    "patch_jets",
    "unit_normal",
    "surface_causal_type",
    "catalog",
]


class SurfaceType(enum.Enum):
    SPACELIKE_SURFACE = "spacelike"
    TIMELIKE_SURFACE = "timelike"


@dataclass(frozen=True)
class SurfacePatch:
    """Immutable patch: three coordinate expressions over {u, v} plus the
    parameter rectangle [u_min, u_max] x [v_min, v_max]."""

    name: str
    x0: ex.Expr
    x1: ex.Expr
    x2: ex.Expr
    domain: tuple

    @property
    def components(self):
        return (self.x0, self.x1, self.x2)

    def causal_type(self, grid=(32, 32)) -> SurfaceType:
        return surface_causal_type(self, grid)


def patch_from_strings(name, x0, x1, x2, domain) -> SurfacePatch:
    variables = ("u", "v")
    return SurfacePatch(
        name,
        ex.parse(x0, variables),
        ex.parse(x1, variables),
        ex.parse(x2, variables),
        tuple(float(b) for b in domain),
    )


def _check_domain(patch, u_value, v_value):
    u_min, u_max, v_min, v_max = patch.domain
    u_value = np.asarray(u_value)
    v_value = np.asarray(v_value)
    bad_u = (u_value < u_min) | (u_value > u_max)
    bad_v = (v_value < v_min) | (v_value > v_max)
    if np.any(bad_u | bad_v):
        where = np.argwhere(np.atleast_1d(bad_u | bad_v))
        point = (float(np.atleast_1d(u_value)[tuple(where[0])]),
                 float(np.atleast_1d(v_value)[tuple(where[0])]))
        raise OutOfDomainError(
            f"patch '{patch.name}'", "(u, v) outside declared domain",
            at=point, detail=f"domain {patch.domain}")


def position_jet(patch: SurfacePatch, u_seed: Jet2, v_seed: Jet2):
    """Componentwise jet of x(u(.), v(.)) for the supplied seeds."""
    _check_domain(patch, u_seed.value, v_seed.value)
    env = {"u": u_seed, "v": v_seed}
    return tuple(as_jet(ex.evaluate(c, env), u_seed) for c in patch.components)


def _augment(jet: Jet2, delta: bool) -> Jet2:
    """Lift a univariate jet to orders (m, 1), optionally adding the unit
    formal displacement in the second slot."""
    m = jet.orders[0]
    c = np.zeros(jet.batch_shape + (m + 1, 2))
    c[..., :, 0] = jet.c[..., :, 0]
    if delta:
        c[..., 0, 1] = 1.0
    return Jet2(c)


def patch_jets(patch: SurfacePatch, u_jet: Jet2, v_jet: Jet2):
    """Jets of x, x_u and x_v along a univariate parameter path.

    Returns (x, xu, xv), each a 3-tuple of univariate jets with the same
    order as the seeds.
    """
    if u_jet.orders[1] != 0 or v_jet.orders[1] != 0:
        raise ValueError("patch_jets expects univariate seeds")
    _check_domain(patch, u_jet.value, v_jet.value)
    env_u = {"u": _augment(u_jet, True), "v": _augment(v_jet, False)}
    env_v = {"u": _augment(u_jet, False), "v": _augment(v_jet, True)}
    ref = env_u["u"]
    cols_u = [as_jet(ex.evaluate(c, env_u), ref) for c in patch.components]
    cols_v = [as_jet(ex.evaluate(c, env_v), ref) for c in patch.components]
    x = tuple(Jet2(j.c[..., :, :1].copy()) for j in cols_u)
    xu = tuple(Jet2(j.c[..., :, 1:].copy()) for j in cols_u)
    xv = tuple(Jet2(j.c[..., :, 1:].copy()) for j in cols_v)
    return x, xu, xv


def _normal_raw(patch, u_values, v_values):
    u_jet = Jet2.constant(u_values, (0, 0))
    v_jet = Jet2.constant(v_values, (0, 0))
    _, xu, xv = patch_jets(patch, u_jet, v_jet)
    xu_val = np.stack([j.value for j in xu])
    xv_val = np.stack([j.value for j in xv])
    raw = lorentz_cross(xu_val, xv_val)
    return raw, np.sqrt(np.abs(inner(raw, raw)))


def unit_normal(patch: SurfacePatch, u: float, v: float, tol: float = TAU_CAUSAL):
    """Unit normal in the x_u x x_v orientation and the sign eps3 = <n,n>."""
    raw, norm = _normal_raw(patch, float(u), float(v))
    if norm < tol:
        raise DegenerateNormalError(
            f"patch '{patch.name}' unit_normal", "||x_u x x_v||", at=(u, v),
            detail="null or vanishing normal")
    n = raw / norm
    eps3 = int(np.sign(inner(n, n)))
    return n, eps3


@lru_cache(maxsize=None)
def surface_causal_type(patch: SurfacePatch, grid=(32, 32)) -> SurfaceType:
    """Constant causal type over a sample grid, else MixedCausalTypeError."""
    nu, nv = grid
    u_min, u_max, v_min, v_max = patch.domain
    uu, vv = np.meshgrid(np.linspace(u_min, u_max, nu), np.linspace(v_min, v_max, nv))
    raw, norm = _normal_raw(patch, uu.ravel(), vv.ravel())
    if np.any(norm < TAU_CAUSAL):
        k = int(np.argmin(norm))
        raise DegenerateNormalError(
            f"patch '{patch.name}' causal typing", "||x_u x x_v||",
            at=(float(uu.ravel()[k]), float(vv.ravel()[k])))
    eps3 = np.sign(inner(raw, raw))
    if np.all(eps3 < 0):
        return SurfaceType.SPACELIKE_SURFACE
    if np.all(eps3 > 0):
        return SurfaceType.TIMELIKE_SURFACE
    raise MixedCausalTypeError(
        f"patch '{patch.name}'", "normal causal character",
        detail="patch crosses a causal-type boundary")


def catalog() -> dict:
    """Built-in patches covering all three causal cases."""
    specs = {
        "spacelike_plane": ("0", "u", "v", (-4.0, 4.0, -4.0, 4.0)),
        "timelike_plane": ("u", "v", "0", (-4.0, 4.0, -4.0, 4.0)),
        "lorentz_cylinder": ("u", "cos(v)", "sin(v)", (-3.0, 3.0, -3.5, 3.5)),
        "de_sitter": (
            "sinh(u)", "cosh(u)*cos(v)", "cosh(u)*sin(v)", (-2.0, 2.0, -3.5, 3.5)),
        "hyperbolic_sheet": (
            "cosh(u)", "sinh(u)*cos(v)", "sinh(u)*sin(v)", (0.05, 3.0, -8.0, 8.0)),
    }
    return {name: patch_from_strings(name, *args) for name, args in specs.items()}
