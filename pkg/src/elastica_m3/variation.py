"""Variation machinery for the squared-torsion functional.

A curve alpha on a patch is displaced along its tangential normal Q by a
bump function mu(s) with mu(0) = mu'(0) = 0, giving the two-parameter family

    beta(sigma; t) = x(u(sigma) + t eta(sigma), v(sigma) + t zeta(sigma)),

where eta x_u + zeta x_v = mu Q along the extended curve.  This module
provides:

* bump construction and validation,
* the mixed (sigma, t) jet of beta by direct jet evaluation (the oracle),
* the same mixed derivatives in closed form from the Darboux invariants,
* the length-preserving cut lambda(t) and its derivative,
* the squared-torsion functional H(t) in two flavours ("paper" integrates
  the squared torsion ratio in the family parameter sigma; "arclength"
  carries the speed factor so the arc-length measure is exact for t != 0),
* the first variation dH/dt|_0, by central differences and in closed form,
  the latter decomposed into the length term plus integrals against
  mu, mu', mu'', mu''' and, after integration by parts, into an
  Euler-Lagrange density plus endpoint terms.

The closed forms are validated against the jet oracle componentwise (see
tests), which pins every sign convention in one place.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .curves import frame_bundle, torsion_from_invariants
from .errors import (
    ConstraintViolationError,
    DegenerateOsculatingError,
    IndefiniteDenominatorError,
    NullSpeedError,
    SingularTangentBasisError,
    WindowExceededError,
)
from .jets import Jet2, as_jet
from .minkowski import TAU_CAUSAL, inner, lorentz_cross
from .quadrature import gauss_legendre, integrate
from .surfaces import position_jet

__all__ = [
    "VariationSpec",
    "FrameSeries",
    "VariationReport",
    "make_bump",
    "beta_jet",
    "frame_series",
    "displaced_uv_jets",
    "lambda_of_t",
    "dlambda_dt_closed",
    "dlambda_dt_fd",
    "functional_H",
    "dH_dt_fd",
    "dH_dt_closed",
    "variation_blocks",
    "vary",
]

BUMP_ENDPOINT_TOL = 1e-12
DENOMINATOR_TOL = 1e-10
OSCULATING_TOL = 1e-14


@dataclass(frozen=True)
class VariationSpec:
    """Bump function mu over s plus the extension margin defining the
    working interval [0, l*], l* = l (1 + margin)."""

    mu: ex.Expr
    margin: float = 0.1
    name: str = ""

    def mu_jet(self, s, order: int) -> Jet2:
        values = np.asarray(s, dtype=float)
        if order == 0:
            seed = Jet2.constant(values, (0, 0))
        else:
            seed = Jet2.variable(values, (order, 0))
        return as_jet(ex.evaluate(self.mu, {"s": seed}), seed)

    def mu_derivs(self, s, upto: int = 3):
        jet = self.mu_jet(s, upto)
        return tuple(jet.deriv(k) for k in range(upto + 1))


def make_bump(kind: str, length: float, k: int = 1, source: str = None,
              margin: float = 0.1, name: str = "") -> VariationSpec:
    """Build a clamped-start bump: mu(0) = mu'(0) = 0, not identically zero.

    Kinds: "polynomial" gives s^2 (l - s)^k, "sine_squared" gives
    sin(pi s / (2 l))^2, both rescaled to unit sup-norm on [0, l];
    "custom" parses `source` verbatim.
    """
    if kind == "polynomial":
        root = ex.parse(f"s^2*({length!r} - s)^{int(k)}", ("s",))
    elif kind == "sine_squared":
        root = ex.parse(f"sin({np.pi / (2 * length)!r}*s)^2", ("s",))
    elif kind == "custom":
        if not source:
            raise ValueError("custom bump needs a source expression")
        root = ex.parse(source, ("s",))
    else:
        raise ValueError(f"unknown bump kind {kind!r}")

    grid = np.linspace(0.0, length, 512)
    spec = VariationSpec(root, margin, name or kind)
    mu0, mu0p, *_ = spec.mu_derivs(0.0, 1)
    if abs(mu0) > BUMP_ENDPOINT_TOL or abs(mu0p) > BUMP_ENDPOINT_TOL:
        raise ConstraintViolationError(
            "make_bump", "clamped start (mu(0), mu'(0))", at=0.0,
            detail=f"got ({float(mu0):.3e}, {float(mu0p):.3e})")
    sup = float(np.max(np.abs(spec.mu_jet(grid, 0).value)))
    if sup <= BUMP_ENDPOINT_TOL:
        raise ConstraintViolationError(
            "make_bump", "mu identically zero on [0, l]")
    if kind != "custom" and abs(sup - 1.0) > 1e-14:
        root = ex.Mul(ex.Num(1.0 / sup), root)
        spec = VariationSpec(root, margin, name or kind)
    return spec


# -- tangential components and the displaced family -------------------------


def _tangential_components(bundle):
    """Jets of p, q with p x_u + q x_v = Q along the curve (2x2 metric solve)."""
    ee = inner(bundle.xu, bundle.xu)
    ff = inner(bundle.xu, bundle.xv)
    gg = inner(bundle.xv, bundle.xv)
    bu = inner(bundle.Q, bundle.xu)
    bv = inner(bundle.Q, bundle.xv)
    det = ee * gg - ff * ff
    if np.any(np.abs(det.value) < TAU_CAUSAL**2):
        k = int(np.argmin(np.abs(np.atleast_1d(det.value))))
        raise SingularTangentBasisError(
            "tangential components", "det of first fundamental form",
            at=float(np.atleast_1d(bundle.s)[k]))
    p = (bu * gg - bv * ff) / det
    q = (ee * bv - ff * bu) / det
    return p, q


def displaced_uv_jets(curve, var: VariationSpec, sigma, order: int, t: float):
    """Univariate sigma-jets of the displaced parameters
    (u + t eta, v + t zeta) at fixed t."""
    bundle = frame_bundle(curve, sigma, inv_order=max(order - 1, 1))
    p, q = _tangential_components(bundle)
    mu = var.mu_jet(sigma, order)
    u, v = curve.uv_jets(sigma, order)
    eta = mu * p
    zeta = mu * q
    return u + float(t) * eta, v + float(t) * zeta


def beta_jet(curve, var: VariationSpec, sigma: float):
    """Mixed jet of beta(sigma; t) at (sigma, t=0), orders (4, 1).

    Coefficient (i, j) is the mixed partial d^{i+j} beta / dsigma^i dt^j
    divided by i! j!.
    """
    sigma = np.asarray(sigma, dtype=float)
    bundle = frame_bundle(curve, sigma, inv_order=3)
    p, q = _tangential_components(bundle)
    mu = var.mu_jet(sigma, 4)
    eta = (mu * p).truncate(4)
    zeta = (mu * q).truncate(4)
    u, v = curve.uv_jets(sigma, 4)

    def seed(base, slope):
        c = np.zeros(np.broadcast_shapes(base.batch_shape, slope.batch_shape) + (5, 2))
        c[..., :, 0] = base.c[..., :, 0]
        c[..., :, 1] = slope.c[..., :5, 0]
        return Jet2(c)

    return position_jet(curve.patch, seed(u, eta), seed(v, zeta))


# -- closed-form mixed derivatives from the frame invariants -----------------


@dataclass
class FrameSeries:
    """Ambient-space mixed derivatives of the displaced family at t = 0,
    assembled from Darboux data (payload generic: arrays or jets)."""

    d2_sigma2: tuple      # T'
    d2_t_sigma: tuple     # d^2 beta / dt dsigma
    d3_sigma3: tuple      # T''
    d3_t_sigma2: tuple    # d^3 beta / dt dsigma^2
    d4_t_sigma3: tuple    # d^4 beta / dt dsigma^3


def _combo(a, b, c, T, Q, n):
    return tuple(a * T[i] + b * Q[i] + c * n[i] for i in range(3))


def frame_series(sig, T, Q, n, kg, kn, tg, kg1, kn1, tg1, kg2, tg2,
                 mu, mu1, mu2, mu3) -> FrameSeries:
    """Closed-form sigma/t derivatives of the family at t = 0.

    Everything follows from differentiating T' = e2 kg Q + e3 kn n and
    (d beta/dt)|_0 = mu Q through the frame derivative matrix; the jet
    oracle pins each coefficient (tests exercise every causal case).
    """
    e1, e2, e3 = sig.astuple()

    t1 = _combo(0.0 * kg, e2 * kg, e3 * kn, T, Q, n)
    v1 = _combo(-e1 * mu * kg, mu1, e3 * mu * tg, T, Q, n)
    t2 = _combo(
        -(e1 * e2 * kg * kg + e1 * e3 * kn * kn),
        e2 * kg1 - e2 * e3 * kn * tg,
        e3 * kn1 + e2 * e3 * kg * tg,
        T, Q, n)
    v2 = _combo(
        -2 * e1 * mu1 * kg - e1 * mu * kg1 - e1 * e3 * mu * kn * tg,
        mu2 - e1 * e2 * mu * kg * kg - e2 * e3 * mu * tg * tg,
        2 * e3 * mu1 * tg + e3 * mu * tg1 - e1 * e3 * mu * kg * kn,
        T, Q, n)
    v3 = _combo(
        (-3 * e1 * mu2 * kg - 3 * e1 * mu1 * kg1 - e1 * mu * kg2
         - e1 * e3 * mu * kn1 * tg - 2 * e1 * e3 * mu * kn * tg1
         - 3 * e1 * e3 * mu1 * kn * tg + e3 * mu * kg * kn * kn
         + e2 * mu * kg ** 3 + e1 * e2 * e3 * mu * kg * tg * tg),
        (mu3 - 3 * e1 * e2 * mu1 * kg * kg - 3 * e2 * e3 * mu1 * tg * tg
         - 3 * e1 * e2 * mu * kg * kg1 - 3 * e2 * e3 * mu * tg * tg1),
        (-3 * e1 * e3 * mu1 * kg * kn - 2 * e1 * e3 * mu * kg1 * kn
         - e1 * e2 * e3 * mu * kg * kg * tg + 3 * e3 * mu2 * tg
         + 3 * e3 * mu1 * tg1 + e3 * mu * tg2 - e1 * e3 * mu * kg * kn1
         - e2 * mu * tg ** 3 - e1 * mu * kn * kn * tg),
        T, Q, n)
    return FrameSeries(t1, v1, t2, v2, v3)


def _series_from_bundle(bundle, mu, mu1, mu2, mu3) -> FrameSeries:
    return frame_series(
        bundle.sig, bundle.T, bundle.Q, bundle.n,
        bundle.kg, bundle.kn, bundle.tg,
        bundle.kg.d_dx(), bundle.kn.d_dx(), bundle.tg.d_dx(),
        bundle.kg.d_dx().d_dx(), bundle.tg.d_dx().d_dx(),
        mu, mu1, mu2, mu3)


def _vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _first_variation_density(bundle, f, mu, mu1, mu2, mu3):
    """t-derivative of the squared torsion ratio at t = 0, as a function of
    the bump values; linear in (mu, mu', mu'', mu''')."""
    series = _series_from_bundle(bundle, mu, mu1, mu2, mu3)
    T, t1, t2 = bundle.T, series.d2_sigma2, series.d3_sigma3
    v1, v2, v3 = series.d2_t_sigma, series.d3_t_sigma2, series.d4_t_sigma3

    w0 = lorentz_cross(T, t1)
    wdot = _vadd(lorentz_cross(v1, t1), lorentz_cross(T, v2))
    ndot = inner(wdot, t2) + inner(w0, v3)
    tt = inner(T, T)
    t1t1 = inner(t1, t1)
    t1t = inner(t1, T)
    d0 = tt * t1t1 - t1t * t1t
    ddot = (2 * inner(v1, T) * t1t1 + 2 * tt * inner(v2, t1)
            - 2 * t1t * (inner(v2, T) + inner(t1, v1)))
    return (2.0 * f / d0) * (ndot - f * ddot)


@dataclass
class VariationBlocks:
    """Coefficient jets P0..P3 of the first-variation integrand
    P0 mu + P1 mu' + P2 mu'' + P3 mu''', plus the torsion jet, at a batch
    of parameter values."""

    s: np.ndarray
    bundle: object
    f: Jet2
    p: tuple  # (P0, P1, P2, P3) jets of order 3


def variation_blocks(curve, s, guard: bool = True) -> VariationBlocks:
    """Evaluate the integrand coefficient jets at `s` (batched).

    The integrand is linear in (mu, mu', mu'', mu'''), so each coefficient
    is read off by seeding the corresponding slot with the constant
    function 1; outer s-derivatives of the blocks then come from the jets.
    """
    s = np.asarray(s, dtype=float)
    bundle = frame_bundle(curve, s, inv_order=5)
    gap = bundle.sig.eps2 * bundle.kg * bundle.kg + bundle.sig.eps3 * bundle.kn * bundle.kn
    if guard and np.any(np.abs(gap.value) < DENOMINATOR_TOL):
        k = int(np.argmin(np.abs(np.atleast_1d(gap.value))))
        raise IndefiniteDenominatorError(
            "variation_blocks", "eps2 kg^2 + eps3 kn^2",
            at=float(np.atleast_1d(s)[k]))
    f = torsion_from_invariants(
        bundle.sig, bundle.kg, bundle.kn, bundle.tg,
        bundle.kg.d_dx(), bundle.kn.d_dx())
    seeds = [(1.0, 0.0, 0.0, 0.0), (0.0, 1.0, 0.0, 0.0),
             (0.0, 0.0, 1.0, 0.0), (0.0, 0.0, 0.0, 1.0)]
    p = tuple(_first_variation_density(bundle, f, *seed) for seed in seeds)
    return VariationBlocks(s=s, bundle=bundle, f=f, p=p)


# -- length restriction ------------------------------------------------------


def _speed_of_sigma(curve, var, t):
    """Vectorized sigma -> sqrt|<beta_sigma, beta_sigma>| at fixed t."""

    def speed(sig_pts):
        if t == 0.0:
            u, v = curve.uv_jets(sig_pts, 1)
        else:
            u, v = displaced_uv_jets(curve, var, sig_pts, 1, t)
        x = position_jet(curve.patch, u, v)
        a1 = np.stack([j.deriv(1) for j in x])
        sq = inner(a1, a1)
        if np.any(np.abs(sq) < TAU_CAUSAL**2):
            k = int(np.argmin(np.abs(np.atleast_1d(sq))))
            raise NullSpeedError("arc-length integrand", "|<beta_s, beta_s>|",
                                 at=float(np.atleast_1d(sig_pts)[k]))
        return np.sqrt(np.abs(sq))

    return speed


def lambda_of_t(curve, var: VariationSpec, t: float,
                panels: int = 64, nodes: int = 16) -> float:
    """Cut parameter lambda with arclength(beta(.; t), [0, lambda]) = l."""
    from scipy.optimize import brentq

    l = curve.length
    l_star = l * (1.0 + var.margin)
    speed = _speed_of_sigma(curve, var, t)

    def shortfall(lam):
        return gauss_legendre(speed, 0.0, lam, panels, nodes) - l

    hi = shortfall(l_star)
    if hi < 0.0:
        raise WindowExceededError(
            "lambda_of_t", "available arc length", at=t,
            detail=f"arc over [0, l*] shorter than l by {-hi:.3e}")
    return float(brentq(shortfall, 0.0, l_star, xtol=1e-14, rtol=8.9e-16))


def dlambda_dt_closed(curve, var: VariationSpec,
                      panels: int = 64, nodes: int = 16) -> float:
    """eps1 * integral of mu kappa_g over the undisturbed arc."""
    sig = frame_bundle(curve, 0.0, inv_order=1).sig

    def integrand(s):
        b = frame_bundle(curve, s, inv_order=1)
        return var.mu_jet(s, 0).value * b.kg.value

    return sig.eps1 * integrate(integrand, 0.0, curve.length, panels, nodes)


def dlambda_dt_fd(curve, var: VariationSpec, h: float = 1e-3,
                  panels: int = 64, nodes: int = 16) -> float:
    """Richardson-extrapolated central difference of lambda(t)."""

    def slope(step):
        lp = lambda_of_t(curve, var, step, panels, nodes)
        lm = lambda_of_t(curve, var, -step, panels, nodes)
        return (lp - lm) / (2.0 * step)

    d1 = slope(h)
    d2 = slope(h / 2.0)
    return (4.0 * d2 - d1) / 3.0


# -- the functional ----------------------------------------------------------


def _torsion_ratio_sq(curve, var, t, mode):
    """Vectorized integrand of H(t): squared torsion ratio, optionally
    weighted by the speed factor for the arc-length measure."""

    def integrand(sig_pts):
        if t == 0.0 or var is None:
            u, v = curve.uv_jets(sig_pts, 3)
        else:
            u, v = displaced_uv_jets(curve, var, sig_pts, 3, t)
        x = position_jet(curve.patch, u, v)
        a1 = np.stack([j.deriv(1) for j in x])
        a2 = np.stack([j.deriv(2) for j in x])
        a3 = np.stack([j.deriv(3) for j in x])
        w = lorentz_cross(a1, a2)
        denom = inner(a1, a1) * inner(a2, a2) - inner(a1, a2) ** 2
        if np.any(np.abs(denom) < OSCULATING_TOL):
            k = int(np.argmin(np.abs(np.atleast_1d(denom))))
            raise DegenerateOsculatingError(
                "functional_H", "osculating denominator",
                at=float(np.atleast_1d(sig_pts)[k]))
        g = (inner(w, a3) / denom) ** 2
        if mode == "arclength":
            g = g * np.sqrt(np.abs(inner(a1, a1)))
        return g

    return integrand


def functional_H(curve, var: VariationSpec = None, t: float = 0.0,
                 mode: str = "paper", panels: int = 64, nodes: int = 16) -> float:
    """Total squared torsion of the length-l cut of the displaced arc.

    mode "paper" integrates the squared torsion ratio in the family
    parameter sigma; mode "arclength" includes the speed factor
    sqrt|<beta_sigma, beta_sigma>| so the measure is true arc length.  The
    two agree at t = 0.
    """
    if mode not in ("paper", "arclength"):
        raise ValueError(f"unknown mode {mode!r}")
    if t == 0.0:
        lam = curve.length
    else:
        if var is None:
            raise ValueError("t != 0 requires a VariationSpec")
        lam = lambda_of_t(curve, var, t, panels, nodes)
    return integrate(_torsion_ratio_sq(curve, var, t, mode),
                     0.0, lam, panels, nodes)


def probe_epsilon_window(curve, var: VariationSpec, start: float = 0.05,
                         floor: float = 1e-4, mode: str = "paper") -> float:
    """Largest probed |t| at which H evaluates cleanly, bisected downward."""
    from .errors import NumericalDomainError

    t = start
    while t >= floor:
        try:
            functional_H(curve, var, t, mode, panels=8, nodes=8)
            functional_H(curve, var, -t, mode, panels=8, nodes=8)
            return t
        except NumericalDomainError:
            t /= 2.0
    raise WindowExceededError("probe_epsilon_window", "variation window",
                              detail=f"no clean evaluation above {floor}")


def dH_dt_fd(curve, var: VariationSpec, h: float = 5e-4, mode: str = "paper",
             panels: int = 64, nodes: int = 16) -> float:
    """Richardson-extrapolated central difference of H(t) at t = 0."""
    window = probe_epsilon_window(curve, var, mode=mode)
    h = min(h, window / 4.0)

    def slope(step):
        hp = functional_H(curve, var, step, mode, panels, nodes)
        hm = functional_H(curve, var, -step, mode, panels, nodes)
        return (hp - hm) / (2.0 * step)

    d1 = slope(h)
    d2 = slope(h / 2.0)
    return (4.0 * d2 - d1) / 3.0


# -- closed-form first variation ---------------------------------------------


@dataclass
class VariationReport:
    """Itemized first variation of one (curve, bump) pair."""

    curve_name: str
    bump_name: str
    sig: tuple
    eps: int
    dH_dt_closed: float
    dlambda_dt_closed: float
    length_term: float
    integral_terms: dict          # keys mu, mu1, mu2, mu3
    boundary_terms: dict          # keys mu_l, mu1_l, mu2_l, mu2_0 (coefficients)
    ibp_total: float              # EL density integral + boundary terms
    raw_vs_ibp_gap: float
    integrand_samples: list       # rows (s, P0, P1, P2, P3, f)
    dH_dt_fd: float = None
    dlambda_dt_fd: float = None
    fd_rel_gap: float = None


def el_density_values(curve, s, f_end_sq):
    """mu-coefficient of the fully integrated-by-parts first variation,
    evaluated at `s` (batched); outer derivatives of the coefficient blocks
    come from their jets."""
    blocks = variation_blocks(curve, s)
    e1 = blocks.bundle.sig.eps1
    p0, p1, p2, p3 = blocks.p
    return (e1 * blocks.bundle.kg.value * f_end_sq
            + p0.value - p1.deriv(1) + p2.deriv(2) - p3.deriv(3))


def dH_dt_closed(curve, var: VariationSpec, panels: int = 64, nodes: int = 16,
                 sample_grid: int = 33) -> VariationReport:
    """Closed-form first variation, itemized.

    Assembles the length term (the derivative of the cut parameter times
    the endpoint value of the squared torsion) plus quadratures of the
    P0..P3 coefficient blocks against mu and its derivatives; additionally
    re-assembles the same number in integrated-by-parts form to expose the
    boundary coefficients.
    """
    l = curve.length
    end = variation_blocks(curve, l)
    f_l = float(end.f.value)
    f_l_sq = f_l**2

    def combined(s):
        blocks = variation_blocks(curve, s)
        mu_jet = var.mu_jet(s, 3)
        mu_vals = [mu_jet.deriv(k) for k in range(4)]
        kg = blocks.bundle.kg.value
        p0, p1, p2, p3 = blocks.p
        e1 = blocks.bundle.sig.eps1
        el_density = (e1 * kg * f_l_sq
                      + p0.value - p1.deriv(1) + p2.deriv(2) - p3.deriv(3))
        return np.stack([
            p0.value * mu_vals[0],
            p1.value * mu_vals[1],
            p2.value * mu_vals[2],
            p3.value * mu_vals[3],
            mu_vals[0] * kg,
            el_density * mu_vals[0],
        ])

    parts = integrate(combined, 0.0, l, panels, nodes)
    e1 = end.bundle.sig.eps1
    dlam = e1 * float(parts[4])
    length_term = dlam * f_l_sq
    integral_terms = {"mu": float(parts[0]), "mu1": float(parts[1]),
                      "mu2": float(parts[2]), "mu3": float(parts[3])}
    total = length_term + sum(integral_terms.values())

    # integrated-by-parts form: EL density against mu plus endpoint blocks
    p1_l, p2_l, p3_l = end.p[1], end.p[2], end.p[3]
    start = variation_blocks(curve, 0.0)
    boundary = {
        "mu_l": float(p1_l.value - p2_l.deriv(1) + p3_l.deriv(2)),
        "mu1_l": float(p2_l.value - p3_l.deriv(1)),
        "mu2_l": float(p3_l.value),
        "mu2_0": float(-start.p[3].value),
    }
    mu_l = var.mu_derivs(l, 3)
    mu_0 = var.mu_derivs(0.0, 3)
    ibp_total = (
        float(parts[5])
        + boundary["mu_l"] * mu_l[0] + boundary["mu1_l"] * mu_l[1]
        + boundary["mu2_l"] * mu_l[2] + boundary["mu2_0"] * mu_0[2])

    s_samples = np.linspace(0.0, l, sample_grid)
    blocks = variation_blocks(curve, s_samples)
    rows = [
        (float(s_samples[i]),) + tuple(float(np.atleast_1d(blocks.p[k].value)[i])
                                       for k in range(4))
        + (float(np.atleast_1d(blocks.f.value)[i]),)
        for i in range(sample_grid)
    ]

    return VariationReport(
        curve_name=getattr(curve, "name", ""),
        bump_name=var.name,
        sig=end.bundle.sig.astuple(),
        eps=end.bundle.eps,
        dH_dt_closed=float(total),
        dlambda_dt_closed=float(dlam),
        length_term=float(length_term),
        integral_terms={k: float(v) for k, v in integral_terms.items()},
        boundary_terms=boundary,
        ibp_total=float(ibp_total),
        raw_vs_ibp_gap=float(abs(total - ibp_total)),
        integrand_samples=rows,
    )


def vary(curve, var: VariationSpec, h: float = 5e-4, mode: str = "paper",
         panels: int = 64, nodes: int = 16) -> VariationReport:
    """Closed form plus finite-difference oracle, with the relative gap."""
    report = dH_dt_closed(curve, var, panels, nodes)
    report.dH_dt_fd = dH_dt_fd(curve, var, h, mode, panels, nodes)
    report.dlambda_dt_fd = dlambda_dt_fd(curve, var, h, panels, nodes)
    scale = max(abs(report.dH_dt_fd), 1e-30)
    report.fd_rel_gap = abs(report.dH_dt_closed - report.dH_dt_fd) / scale
    return report
