"""Curves on patches: arc-length certification, Darboux frames, and the
frame invariants kappa_g (geodesic curvature), kappa_n (normal curvature),
tau_g (geodesic torsion), together with curvature/torsion of the ambient
curve and the torsion expression built from the Darboux invariants.

Frame conventions
-----------------
T = alpha'(s) (curves are used arc-length parameterized, so T is unit up to
certification error), n is the patch normal in x_u x x_v orientation, and
Q = eps * (n x T) / ||n x T|| with eps = +-1 chosen once per curve (held
fixed along it, frames vary continuously) so that the orthonormal frame is
positively oriented; then

    T x Q = -eps3 n,   Q x n = -eps1 T,   n x T = -eps2 Q,

with (eps1, eps2, eps3) = (<T,T>, <Q,Q>, <n,n>).  Under this convention the
frame derivative matrix reads

    T' =            eps2 kappa_g Q  + eps3 kappa_n n
    Q' = -eps1 kappa_g T            + eps3 tau_g   n
    n' = -eps1 kappa_n T - eps2 tau_g Q

so kappa_g = <T',Q>, kappa_n = <T',n>, tau_g = <Q',n> regardless of signs.
All invariant derivatives come from jets of these inner products, never from
differencing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .errors import (
    DegenerateOsculatingError,
    IndefiniteDenominatorError,
    NullTangentError,
)
from .jets import Jet2, as_jet
from .minkowski import TAU_CAUSAL, CaseSignature, inner, lorentz_cross
from .surfaces import SurfacePatch, patch_jets, position_jet

__all__ = [
    "SurfaceCurve",
    "FrameBundle",
    "DarbouxData",
    "curve_from_strings",
    "certify_arc_length",
    "frame_bundle",
    "darboux_frame",
    "curvature_torsion",
    "torsion_from_darboux",
    "torsion_from_invariants",
]

# Below this the osculating data (alpha' x alpha'') is treated as degenerate.
OSCULATING_TOL = 1e-10
# Below this |eps2 kg^2 + eps3 kn^2| the Darboux torsion expression blows up.
DENOMINATOR_TOL = 1e-10


@dataclass(frozen=True)
class SurfaceCurve:
    """Analytic path s -> (u(s), v(s)) on a patch, 0 <= s <= length."""

    patch: SurfacePatch
    u_of_s: ex.Expr
    v_of_s: ex.Expr
    length: float
    name: str = ""

    def uv_jets(self, s, order: int):
        values = np.asarray(s, dtype=float)
        if order == 0:
            seed = Jet2.constant(values, (0, 0))
        else:
            seed = Jet2.variable(values, (order, 0))
        env = {"s": seed}
        u = as_jet(ex.evaluate(self.u_of_s, env), seed)
        v = as_jet(ex.evaluate(self.v_of_s, env), seed)
        return u, v

    @property
    def max_jet_order(self):
        return None  # analytic: any order


def curve_from_strings(patch: SurfacePatch, u, v, length, name="") -> SurfaceCurve:
    return SurfaceCurve(patch, ex.parse(u, ("s",)), ex.parse(v, ("s",)),
                        float(length), name)


def certify_arc_length(curve, samples: int = 512, tol: float = 1e-8):
    """Max deviation of | |<a',a'>| - 1 | on a uniform grid; certified iff
    it stays below `tol`.  Raises NullTangentError on (near-)null tangents."""
    if samples < 2:
        raise ValueError("need at least 2 samples")
    s = np.linspace(0.0, curve.length, samples)
    u, v = curve.uv_jets(s, 1)
    x = position_jet(curve.patch, u, v)
    a1 = np.stack([j.deriv(1) for j in x])
    speed_sq = inner(a1, a1)
    if np.any(np.abs(speed_sq) < TAU_CAUSAL):
        k = int(np.argmin(np.abs(speed_sq)))
        raise NullTangentError("certify_arc_length", "|<a',a'>|", at=float(s[k]))
    deviation = float(np.max(np.abs(np.abs(speed_sq) - 1.0)))
    return deviation < tol, deviation


def _vec_jets(jets):
    return np.stack([j.value for j in jets])


def _uniform_sign(values, what, s):
    signs = np.sign(np.asarray(values))
    flat = signs.ravel()
    if flat.size == 0 or np.any(flat == 0) or not np.all(flat == flat[0]):
        raise NullTangentError("frame_bundle", what,
                               at=float(np.asarray(s).ravel()[0]),
                               detail="sign not constant over the samples")
    return int(flat[0])


@dataclass
class FrameBundle:
    """Frame and invariant jets along a batch of parameter values."""

    s: np.ndarray
    sig: CaseSignature
    eps: int  # sign in n x T = eps * |..| Q, fixed per curve
    x: tuple
    xu: tuple
    xv: tuple
    T: tuple
    Q: tuple
    n: tuple
    kg: Jet2
    kn: Jet2
    tg: Jet2


def frame_bundle(curve, s, inv_order: int = 5) -> FrameBundle:
    """Darboux frame data as jets of order `inv_order` in s (batched).

    The position jets run two orders higher so the invariant jets close at
    the requested order.
    """
    s = np.asarray(s, dtype=float)
    m = inv_order + 2
    u, v = curve.uv_jets(s, m)
    x, xu, xv = patch_jets(curve.patch, u, v)

    T = tuple(j.d_dx() for j in x)
    tt = inner(T, T)
    if np.any(np.abs(tt.value) < TAU_CAUSAL):
        k = int(np.argmin(np.abs(np.atleast_1d(tt.value))))
        raise NullTangentError("frame_bundle", "|<T,T>|",
                               at=float(np.atleast_1d(s)[k]))
    eps1 = _uniform_sign(tt.value, "<T,T>", s)

    n_raw = lorentz_cross(xu, xv)
    nn_raw = inner(n_raw, n_raw)
    norm_n = nn_raw.abs().sqrt()
    n = tuple(c / norm_n for c in n_raw)
    eps3 = _uniform_sign(inner(n, n).value, "<n,n>", s)

    q_raw = lorentz_cross(n, T)
    qq_raw = inner(q_raw, q_raw)
    eps2 = _uniform_sign(qq_raw.value, "<Q,Q>", s)
    # eps makes (T, Q, n) positively oriented, which is exactly the branch
    # of the frame cross-product identities stated in the module docstring.
    eps = -eps2
    norm_q = qq_raw.abs().sqrt()
    Q = tuple(float(eps) * c / norm_q for c in q_raw)

    sig = CaseSignature(eps1, eps2, eps3)

    Tp = tuple(j.d_dx() for j in T)
    Qp = tuple(j.d_dx() for j in Q)
    kg = inner(Tp, Q)
    kn = inner(Tp, n)
    tg = inner(Qp, n)
    return FrameBundle(s=s, sig=sig, eps=eps, x=x, xu=xu, xv=xv,
                       T=T, Q=Q, n=n, kg=kg, kn=kn, tg=tg)


@dataclass
class DarbouxData:
    """Frame, signature and invariant jets at a single parameter value."""

    s: float
    T: np.ndarray
    Q: np.ndarray
    n: np.ndarray
    sig: CaseSignature
    eps: int
    kg_jet: Jet2
    kn_jet: Jet2
    tg_jet: Jet2

    @property
    def kappa_g(self):
        return float(self.kg_jet.value)

    @property
    def kappa_n(self):
        return float(self.kn_jet.value)

    @property
    def tau_g(self):
        return float(self.tg_jet.value)

    def kappa_g_d(self, k):
        return float(self.kg_jet.deriv(k))

    def kappa_n_d(self, k):
        return float(self.kn_jet.deriv(k))

    def tau_g_d(self, k):
        return float(self.tg_jet.deriv(k))


def darboux_frame(curve, s: float, inv_order: int = 5) -> DarbouxData:
    b = frame_bundle(curve, float(s), inv_order)
    return DarbouxData(
        s=float(s),
        T=_vec_jets(b.T), Q=_vec_jets(b.Q), n=_vec_jets(b.n),
        sig=b.sig, eps=b.eps,
        kg_jet=b.kg, kn_jet=b.kn, tg_jet=b.tg,
    )


def curvature_torsion(curve, s):
    """Curvature and torsion of the ambient curve from derivative jets.

    kappa = ||a' x a''|| / ||a'||^3 and
    tau = <a' x a'', a'''> / (<a',a'><a'',a''> - <a',a''>^2); the signed
    denominator equals the Frenet-sign-weighted squared norm of a' x a'',
    so this ratio carries the metric signs without explicit case splits.
    Both are parameterization-invariant.
    """
    s = np.asarray(s, dtype=float)
    u, v = curve.uv_jets(s, 3)
    x = position_jet(curve.patch, u, v)
    a1 = np.stack([j.deriv(1) for j in x])
    a2 = np.stack([j.deriv(2) for j in x])
    a3 = np.stack([j.deriv(3) for j in x])
    w = lorentz_cross(a1, a2)
    ww = inner(w, w)
    norm_w = np.sqrt(np.abs(ww))
    if np.any(norm_w < OSCULATING_TOL):
        k = int(np.argmin(np.atleast_1d(norm_w)))
        raise DegenerateOsculatingError(
            "curvature_torsion", "||a' x a''||", at=float(np.atleast_1d(s)[k]))
    speed = np.sqrt(np.abs(inner(a1, a1)))
    kappa = norm_w / speed**3
    denom = inner(a1, a1) * inner(a2, a2) - inner(a1, a2) ** 2
    tau = inner(w, a3) / denom
    return kappa, tau


def torsion_from_invariants(sig: CaseSignature, kg, kn, tg, kg_d1, kn_d1):
    """Torsion of the curve expressed through Darboux invariants (payload
    generic: floats, arrays or jets)."""
    e1, e2, e3 = sig.astuple()
    num = -e2 * kg * (e3 * kn_d1 + e2 * e3 * kg * tg) \
        + e3 * kn * (e2 * kg_d1 - e2 * e3 * kn * tg)
    return num / (e1 * (e2 * kg * kg + e3 * kn * kn))


def denominator_gap(sig: CaseSignature, kg, kn):
    return sig.eps2 * kg * kg + sig.eps3 * kn * kn


def torsion_from_darboux(d: DarbouxData) -> float:
    """Evaluate the invariant torsion expression at d.s, guarding the
    genuine singularity of its denominator."""
    gap = denominator_gap(d.sig, d.kappa_g, d.kappa_n)
    if abs(gap) < DENOMINATOR_TOL:
        raise IndefiniteDenominatorError(
            "torsion_from_darboux", "eps2 kg^2 + eps3 kn^2", at=d.s)
    return float(torsion_from_invariants(
        d.sig, d.kappa_g, d.kappa_n, d.tau_g, d.kappa_g_d(1), d.kappa_n_d(1)))
