"""Euler-Lagrange residual, boundary conditions and verdict for relaxed
elastic lines of second kind.

A length-l arc with a free far end is extremal for the squared-torsion
energy iff the mu-coefficient of the fully integrated-by-parts first
variation vanishes along the arc (the differential equation) and the four
endpoint coefficients vanish (the boundary conditions).  The coefficient
blocks come from `variation.variation_blocks`; their outer s-derivatives
are read off the block jets, never differenced.

Straight segments (all frame invariants zero) are classified extremal
directly: the energy is zero, hence minimal, while the torsion expression
itself is 0/0 there.  Arcs meeting the genuine denominator singularity
eps2 kg^2 + eps3 kn^2 = 0 anywhere on the grid are Inconclusive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import DENOMINATOR_TOL, frame_bundle
from .errors import NumericalDomainError
from .variation import variation_blocks

__all__ = ["ELReport", "el_residual", "boundary_conditions", "classify"]

STRAIGHT_TOL = 1e-12


@dataclass
class ELReport:
    curve_name: str
    case: tuple                 # (eps1, eps2, eps3)
    eps: int                    # orientation sign in n x T = eps |..| Q
    verdict: str                # Extremal | NotExtremal | Inconclusive
    residual_norm: float        # sup over grid, scale-normalized
    bc: tuple                   # (bc1, bc2, f(l), f(0))
    tol_residual: float
    tol_bc: float
    samples: list               # rows (s, residual, f, kappa_g, kappa_n, tau_g)
    note: str = ""


def _grid_state(curve, s_grid):
    blocks = variation_blocks(curve, s_grid)
    b = blocks.bundle
    return blocks, b.kg.value, b.kn.value, b.tg.value


def el_residual(curve, s_grid):
    """Residual of the differential equation at each grid point.

    Returns (residual, f, kappa_g, kappa_n, tau_g) arrays.  The residual is
    eps1 kg f(l)^2 + P0 - P1' + P2'' - P3''' with the blocks' derivatives
    taken from their jets.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    end = variation_blocks(curve, float(curve.length))
    f_l_sq = float(end.f.value) ** 2
    blocks, kg, kn, tg = _grid_state(curve, s_grid)
    p0, p1, p2, p3 = blocks.p
    e1 = blocks.bundle.sig.eps1
    residual = (e1 * kg * f_l_sq
                + p0.value - p1.deriv(1) + p2.deriv(2) - p3.deriv(3))
    return residual, blocks.f.value, kg, kn, tg


def boundary_conditions(curve):
    """Endpoint coefficients (bc1, bc2, f(l), f(0)).

    bc1 multiplies mu(l), bc2 multiplies mu'(l); the mu''(l) and mu''(0)
    coefficients are proportional to f(l) and f(0), which are reported
    directly as the third and fourth conditions.
    """
    end = variation_blocks(curve, float(curve.length))
    start = variation_blocks(curve, 0.0)
    p1, p2, p3 = end.p[1], end.p[2], end.p[3]
    bc1 = float(p1.value - p2.deriv(1) + p3.deriv(2))
    bc2 = float(p2.value - p3.deriv(1))
    return bc1, bc2, float(end.f.value), float(start.f.value)


def classify(curve, tol_residual: float = 1e-6, tol_bc: float = 1e-8,
             grid_n: int = 257) -> ELReport:
    """Assemble the verdict over a uniform grid of `grid_n` points."""
    s_grid = np.linspace(0.0, curve.length, grid_n)
    bundle = frame_bundle(curve, s_grid, inv_order=1)
    kg = bundle.kg.value
    kn = bundle.kn.value
    tg = bundle.tg.value
    case = bundle.sig.astuple()

    sup_inv = max(float(np.max(np.abs(kg))), float(np.max(np.abs(kn))))
    if sup_inv < STRAIGHT_TOL:
        # straight segment: zero energy, trivially minimal
        samples = [(float(s), 0.0, 0.0, 0.0, 0.0, 0.0) for s in s_grid]
        return ELReport(
            curve_name=getattr(curve, "name", ""), case=case, eps=bundle.eps,
            verdict="Extremal", residual_norm=0.0, bc=(0.0, 0.0, 0.0, 0.0),
            tol_residual=tol_residual, tol_bc=tol_bc, samples=samples,
            note="straight segment: frame invariants vanish identically")

    gap = case[1] * kg**2 + case[2] * kn**2
    if np.any(np.abs(gap) < DENOMINATOR_TOL):
        k = int(np.argmin(np.abs(gap)))
        samples = [(float(s_grid[i]), float("nan"), float("nan"),
                    float(kg[i]), float(kn[i]), float(tg[i]))
                   for i in range(grid_n)]
        return ELReport(
            curve_name=getattr(curve, "name", ""), case=case, eps=bundle.eps,
            verdict="Inconclusive", residual_norm=float("nan"),
            bc=(float("nan"),) * 4,
            tol_residual=tol_residual, tol_bc=tol_bc, samples=samples,
            note=f"denominator eps2 kg^2 + eps3 kn^2 vanishes near s = {s_grid[k]:.6g}")

    try:
        residual, f_vals, kg, kn, tg = el_residual(curve, s_grid)
        bc = boundary_conditions(curve)
    except NumericalDomainError as err:
        samples = [(float(s_grid[i]), float("nan"), float("nan"),
                    float(kg[i]), float(kn[i]), float(tg[i]))
                   for i in range(grid_n)]
        return ELReport(
            curve_name=getattr(curve, "name", ""), case=case, eps=bundle.eps,
            verdict="Inconclusive", residual_norm=float("nan"),
            bc=(float("nan"),) * 4,
            tol_residual=tol_residual, tol_bc=tol_bc, samples=samples,
            note=str(err))

    scale = (1.0 + float(np.max(np.abs(f_vals))) ** 3
             + float(np.max(np.abs(kg))) ** 3
             + float(np.max(np.abs(kn))) ** 3
             + float(np.max(np.abs(tg))) ** 3)
    residual_norm = float(np.max(np.abs(residual))) / scale
    extremal = residual_norm < tol_residual and all(abs(b) < tol_bc for b in bc)
    samples = [(float(s_grid[i]), float(residual[i]), float(f_vals[i]),
                float(kg[i]), float(kn[i]), float(tg[i]))
               for i in range(grid_n)]
    return ELReport(
        curve_name=getattr(curve, "name", ""), case=case, eps=bundle.eps,
        verdict="Extremal" if extremal else "NotExtremal",
        residual_norm=residual_norm, bc=tuple(float(b) for b in bc),
        tol_residual=tol_residual, tol_bc=tol_bc, samples=samples)
