"""Direct numerical minimization of the squared-torsion energy over
discretized arcs of fixed length, initial point and initial direction.

Curves are clamped B-splines in the (u, v) chart; the first control point
pins the initial point and the second is confined to the ray spanned by the
initial tangent, which pins the initial direction exactly.  The far end is
free.  The length constraint is handled by a quadratic penalty whose weight
ramps up each outer loop, combined with an exact arc-length recut of the
candidate (resample by arc length, trim or extend to the target length,
refit) between loops.

The resulting minimizers are independent of the analytic variation
machinery and are cross-checked against the Euler-Lagrange classifier.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import BSpline, make_lsq_spline

from .errors import NumericalDomainError
from .jets import Jet2
from .minkowski import inner, lorentz_cross
from .quadrature import gauss_legendre
from .surfaces import position_jet

__all__ = [
    "DiscreteCurve",
    "SplineTrack",
    "MinimizeResult",
    "clamped_knots",
    "fit_discrete",
    "minimize_H",
]

DEFAULT_DEGREE = 7


def worker_count() -> int:
    """Worker cap from ELASTICA_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("ELASTICA_THREADS", "1")))
    except ValueError:
        return 1


def clamped_knots(n_ctrl: int, degree: int, span: float) -> np.ndarray:
    if n_ctrl < degree + 1:
        raise ValueError("need at least degree+1 control points")
    interior = np.linspace(0.0, span, n_ctrl - degree + 1)[1:-1]
    return np.concatenate([np.zeros(degree + 1), interior,
                           np.full(degree + 1, span)])


@dataclass
class DiscreteCurve:
    """B-spline curve in the chart: control points (N+1, 2), clamped
    uniform knots on [0, length]."""

    patch: object
    ctrl: np.ndarray
    degree: int
    length: float
    name: str = ""

    @property
    def knots(self):
        return clamped_knots(self.ctrl.shape[0], self.degree, self.length)

    def track(self) -> "SplineTrack":
        return SplineTrack(self)


class SplineTrack:
    """Duck-typed curve (patch, length, uv_jets) backed by a B-spline."""

    def __init__(self, dc: DiscreteCurve):
        self.dc = dc
        self.patch = dc.patch
        self.length = dc.length
        self.name = dc.name
        knots = dc.knots
        self._splines = []
        for col in range(2):
            base = BSpline(knots, dc.ctrl[:, col].copy(), dc.degree,
                           extrapolate=True)
            derivs = [base]
            for _ in range(dc.degree):
                derivs.append(derivs[-1].derivative())
            self._splines.append(derivs)

    @property
    def max_jet_order(self):
        return self.dc.degree

    def _jet(self, derivs, s, order):
        s = np.asarray(s, dtype=float)
        table = [derivs[m](s) if m < len(derivs) else np.zeros_like(s)
                 for m in range(order + 1)]
        return Jet2.from_derivatives(table, order=order)

    def uv_jets(self, s, order: int):
        return (self._jet(self._splines[0], s, order),
                self._jet(self._splines[1], s, order))

    def uv_values(self, s):
        s = np.asarray(s, dtype=float)
        return self._splines[0][0](s), self._splines[1][0](s)


def fit_discrete(curve, n_ctrl: int, degree: int = DEFAULT_DEGREE,
                 name: str = "") -> DiscreteCurve:
    """Least-squares B-spline fit of any (patch, length, uv_jets) curve."""
    span = curve.length
    knots = clamped_knots(n_ctrl, degree, span)
    m = max(8 * n_ctrl, 400)
    s = np.linspace(0.0, span, m)
    u, v = curve.uv_jets(s, 0)
    y = np.stack([np.atleast_1d(u.value), np.atleast_1d(v.value)], axis=1)
    spl = make_lsq_spline(s, y, knots, degree)
    return DiscreteCurve(curve.patch, np.asarray(spl.c, dtype=float), degree,
                         span, name or getattr(curve, "name", ""))


# -- energy and constraint evaluation ----------------------------------------

# |denominator| below which the torsion ratio is treated as 0/0; the point
# contributes zero when the numerator is comparably small (planar arcs,
# inflections), otherwise the candidate is rejected as degenerate.
RATIO_TOL = 1e-18


def _energy_speed_integrand(track):
    def integrand(s):
        u, v = track.uv_jets(s, 3)
        x = position_jet(track.patch, u, v)
        a1 = np.stack([j.deriv(1) for j in x])
        a2 = np.stack([j.deriv(2) for j in x])
        a3 = np.stack([j.deriv(3) for j in x])
        w = lorentz_cross(a1, a2)
        num = inner(w, a3)
        den = inner(a1, a1) * inner(a2, a2) - inner(a1, a2) ** 2
        speed_sq = np.abs(inner(a1, a1))
        if np.any(speed_sq < 1e-14):
            raise NumericalDomainError("solver energy", "curve speed",
                                       at=float(s[int(np.argmin(speed_sq))]))
        small = np.abs(den) < RATIO_TOL
        if np.any(small & (np.abs(num) > np.sqrt(RATIO_TOL))):
            k = int(np.argmax(small & (np.abs(num) > np.sqrt(RATIO_TOL))))
            raise NumericalDomainError("solver energy", "osculating data",
                                       at=float(s[k]))
        ratio = np.where(small, 0.0, num / np.where(small, 1.0, den))
        speed = np.sqrt(speed_sq)
        return np.stack([ratio**2 * speed, speed])

    return integrand


def energy_and_length(track, panels: int = 24, nodes: int = 10):
    """(total squared torsion in arc-length measure, arc length)."""
    vals = gauss_legendre(_energy_speed_integrand(track), 0.0, track.length,
                          panels, nodes)
    return float(vals[0]), float(vals[1])


# -- constraint-preserving parameterization of the free variables ------------


@dataclass
class _Gauge:
    """Pinned data: initial point q0 and unit chart direction d0."""

    q0: np.ndarray
    d0: np.ndarray
    h_min: float

    def pack(self, dc: DiscreteCurve) -> np.ndarray:
        h = float(np.dot(dc.ctrl[1] - self.q0, self.d0))
        return np.concatenate([[h], dc.ctrl[2:].ravel()])

    def unpack(self, template: DiscreteCurve, theta: np.ndarray) -> DiscreteCurve:
        ctrl = template.ctrl.copy()
        ctrl[0] = self.q0
        ctrl[1] = self.q0 + max(theta[0], self.h_min) * self.d0
        ctrl[2:] = theta[1:].reshape(-1, 2)
        return DiscreteCurve(template.patch, ctrl, template.degree,
                             template.length, template.name)

    def impose(self, dc: DiscreteCurve) -> DiscreteCurve:
        return self.unpack(dc, self.pack(dc))


def _gauge_of(dc: DiscreteCurve) -> _Gauge:
    q0 = dc.ctrl[0].copy()
    d = dc.ctrl[1] - q0
    norm = float(np.hypot(d[0], d[1]))
    if norm == 0.0:
        raise ValueError("degenerate initial direction")
    return _Gauge(q0=q0, d0=d / norm, h_min=1e-6 * dc.length)


# -- arc-length recut ---------------------------------------------------------


def recut_to_length(dc: DiscreteCurve, gauge: _Gauge,
                    samples: int = 2049) -> DiscreteCurve:
    """Resample by arc length, trim/extend to the target length, refit.

    Produces a candidate of (numerically) exact target length with an even
    parameter speed; the pinned start is re-imposed after the fit.
    """
    track = dc.track()
    span = dc.length
    # generous parameter range so a short arc can be extended
    s_dense = np.linspace(0.0, 1.25 * span, samples)
    u, v = track.uv_values(s_dense)
    # speeds via order-1 jets
    uj, vj = track.uv_jets(s_dense, 1)
    xj = position_jet(dc.patch, uj, vj)
    a1 = np.stack([j.deriv(1) for j in xj])
    speed = np.sqrt(np.abs(inner(a1, a1)))
    arclen = np.concatenate([[0.0], cumulative_simpson(speed, x=s_dense)])[:samples]
    if arclen[-1] < dc.length:
        raise NumericalDomainError("recut_to_length", "available arc length",
                                   detail="arc too short to recut")
    targets = np.linspace(0.0, dc.length, samples)
    s_of_a = np.interp(targets, arclen, s_dense)
    params = np.linspace(0.0, span, samples)
    y = np.stack([np.interp(s_of_a, s_dense, u), np.interp(s_of_a, s_dense, v)],
                 axis=1)
    spl = make_lsq_spline(params, y, dc.knots, dc.degree)
    out = DiscreteCurve(dc.patch, np.asarray(spl.c, dtype=float), dc.degree,
                        dc.length, dc.name)
    return gauge.impose(out)


# -- the optimizer -------------------------------------------------------------


@dataclass
class MinimizeResult:
    curve: DiscreteCurve
    H_value: float
    iterations: int
    converged: bool
    constraint_violation: float
    log: list = field(default_factory=list)  # rows (iteration, H, violation)


def _objective(dc_template, gauge, theta, weight, panels, nodes):
    try:
        dc = gauge.unpack(dc_template, theta)
        if theta[0] <= gauge.h_min:
            return np.inf, np.nan, np.nan
        h_val, length = energy_and_length(dc.track(), panels, nodes)
    except NumericalDomainError:
        return np.inf, np.nan, np.nan
    gap = length - dc_template.length
    return h_val + weight * gap * gap, h_val, length


def _fd_gradient(fun, theta, rel_step=1e-6):
    def component(i):
        step = rel_step * (1.0 + abs(theta[i]))
        up = theta.copy(); up[i] += step
        dn = theta.copy(); dn[i] -= step
        f_up = fun(up)
        f_dn = fun(dn)
        if not np.isfinite(f_up) or not np.isfinite(f_dn):
            return 0.0
        return (f_up - f_dn) / (2.0 * step)

    workers = worker_count()
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.fromiter(pool.map(component, range(theta.size)),
                               dtype=float, count=theta.size)
    return np.fromiter((component(i) for i in range(theta.size)),
                       dtype=float, count=theta.size)


def _descend_gradient(dc, gauge, weight, panels, nodes, max_iter, log,
                      iteration_offset, target_length):
    """Finite-difference-gradient descent with backtracking line search."""
    theta = gauge.pack(dc)
    value, h_val, length = _objective(dc, gauge, theta, weight, panels, nodes)
    alpha = 1e-2
    it = 0
    scalar = lambda th: _objective(dc, gauge, th, weight, panels, nodes)[0]
    while it < max_iter:
        grad = _fd_gradient(scalar, theta)
        gmax = float(np.max(np.abs(grad)))
        if gmax == 0.0:
            break
        direction = -grad / gmax
        improved = False
        while alpha > 1e-12:
            trial = theta + alpha * direction
            t_value, t_h, t_len = _objective(dc, gauge, trial, weight, panels, nodes)
            if t_value < value - 1e-15:
                theta, value, h_val, length = trial, t_value, t_h, t_len
                improved = True
                alpha *= 1.6
                break
            alpha *= 0.5
        it += 1
        log.append((iteration_offset + it, h_val,
                    abs(length - target_length)))
        if not improved:
            break
        if len(log) >= 2 and abs(log[-2][1] - h_val) <= 1e-10 * max(1.0, abs(h_val)) \
                and abs(length - target_length) <= 1e-8 * target_length:
            break
    return gauge.unpack(dc, theta), value, h_val, length, it


def _descend_coordinate(dc, gauge, weight, panels, nodes, max_sweeps, log,
                        iteration_offset, target_length):
    """Cyclic coordinate descent with per-coordinate adaptive steps."""
    theta = gauge.pack(dc)
    value, h_val, length = _objective(dc, gauge, theta, weight, panels, nodes)
    steps = np.full(theta.size, 1e-3)
    it = 0
    for sweep in range(max_sweeps):
        prev_value = value
        for i in range(theta.size):
            for _ in range(2):
                moved = False
                for sign in (+1.0, -1.0):
                    trial = theta.copy()
                    trial[i] += sign * steps[i]
                    t_value, t_h, t_len = _objective(dc, gauge, trial, weight,
                                                     panels, nodes)
                    if t_value < value - 1e-15:
                        theta, value, h_val, length = trial, t_value, t_h, t_len
                        steps[i] *= 2.0
                        moved = True
                        break
                if not moved:
                    steps[i] *= 0.5
                    break
        it += 1
        log.append((iteration_offset + it, h_val, abs(length - target_length)))
        if prev_value - value <= 1e-10 * max(1.0, abs(value)):
            break
    return gauge.unpack(dc, theta), value, h_val, length, it


def minimize_H(init: DiscreteCurve, outer_loops: int = 4, weight0: float = 1e4,
               weight_ramp: float = 10.0, inner_iter: int = 60,
               method: str = "gradient", panels: int = 24, nodes: int = 10,
               coarse_n: int = None, coarse_iter: int = 120) -> MinimizeResult:
    """Penalty-constrained descent on the squared-torsion energy.

    Runs an optional coarse stage on a thinned control net, then outer loops
    at the full resolution, each followed by an exact arc-length recut; the
    penalty weight ramps by `weight_ramp` per loop.  Accepted steps never
    increase energy + penalty; rejected (degenerate) candidates are skipped
    by step halving inside the line search.
    """
    gauge = _gauge_of(init)
    target_length = init.length
    log = []
    descend = _descend_gradient if method == "gradient" else _descend_coordinate

    dc = gauge.impose(init)
    iterations = 0

    if coarse_n is not None and coarse_n < dc.ctrl.shape[0]:
        coarse = fit_discrete(dc.track(), coarse_n, dc.degree, dc.name)
        cg = _gauge_of(gauge.impose(coarse))
        weight = weight0
        for loop in range(outer_loops):
            coarse, value, h_val, length, used = descend(
                coarse, cg, weight, panels, nodes, coarse_iter, log,
                iterations, target_length)
            iterations += used
            try:
                recut = recut_to_length(coarse, cg)
                r_value, r_h, r_len = _objective(
                    recut, cg, cg.pack(recut), weight, panels, nodes)
                if r_value <= value + 1e-12:
                    coarse = recut
            except NumericalDomainError:
                pass
            weight *= weight_ramp
        dc = fit_discrete(coarse.track(), init.ctrl.shape[0], dc.degree, dc.name)
        dc = gauge.impose(dc)

    weight = weight0 * weight_ramp ** max(outer_loops - 2, 0)
    h_val, length = energy_and_length(dc.track(), panels, nodes)
    for loop in range(outer_loops):
        dc, value, h_val, length, used = descend(
            dc, gauge, weight, panels, nodes, inner_iter, log,
            iterations, target_length)
        iterations += used
        try:
            recut = recut_to_length(dc, gauge)
            r_value, r_h, r_len = _objective(
                recut, gauge, gauge.pack(recut), weight, panels, nodes)
            if r_value <= value + 1e-12:
                dc, h_val, length = recut, r_h, r_len
        except NumericalDomainError:
            pass
        weight *= weight_ramp

    violation = abs(length - target_length)
    h_final, len_final = energy_and_length(dc.track(), panels * 2, nodes)
    converged = violation < 1e-6 * target_length
    log.append((iterations, h_final, abs(len_final - target_length)))
    return MinimizeResult(curve=dc, H_value=h_final, iterations=iterations,
                          converged=converged,
                          constraint_violation=abs(len_final - target_length),
                          log=log)
