"""Truncated bivariate Taylor jets.

A :class:`Jet2` stores the coefficients ``c[..., i, j]`` of a truncated
Taylor expansion in two formal parameters,
``c[..., i, j] = d^{i+j} f / dx^i dy^j / (i! j!)`` at the expansion point.
Orders are fixed at construction; mixed-order arithmetic truncates to the
common order and never extends.  Univariate jets are the degenerate case
``orders = (m, 0)``.

The leading axes are an arbitrary broadcastable batch shape, so one jet
evaluation can cover a whole sample grid.  All arithmetic is exact
truncated-series propagation; there is no differencing anywhere.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import JetDomainError

__all__ = ["Jet2", "as_jet", "jet_sqrt", "jet_abs"]


def _lift(value):
    """Reshape a plain scalar/array so it broadcasts against batch axes."""
    arr = np.asarray(value, dtype=float)
    return arr.reshape(arr.shape + (1, 1))


class Jet2:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)
        if self.c.ndim < 2:
            raise ValueError("jet coefficient array needs shape (..., m+1, n+1)")

    # -- construction -----------------------------------------------------

    @classmethod
    def constant(cls, value, orders, batch_shape=()):
        m, n = orders
        value = np.asarray(value, dtype=float)
        shape = np.broadcast_shapes(value.shape, batch_shape)
        c = np.zeros(shape + (m + 1, n + 1))
        c[..., 0, 0] = value
        return cls(c)

    @classmethod
    def variable(cls, value, orders, slot=0):
        """Seed jet for an independent variable: value plus unit first
        coefficient in the chosen slot (0 = first parameter, 1 = second)."""
        jet = cls.constant(value, orders)
        if slot == 0:
            if orders[0] < 1:
                raise ValueError("slot 0 unavailable at order 0")
            jet.c[..., 1, 0] = 1.0
        elif slot == 1:
            if orders[1] < 1:
                raise ValueError("slot 1 unavailable at order 0")
            jet.c[..., 0, 1] = 1.0
        else:
            raise ValueError("slot must be 0 or 1")
        return jet

    @classmethod
    def from_derivatives(cls, derivs, order=None):
        """Univariate jet from the sequence [f, f', f'', ...]."""
        derivs = [np.asarray(d, dtype=float) for d in derivs]
        m = len(derivs) - 1 if order is None else order
        shape = np.broadcast_shapes(*(d.shape for d in derivs))
        c = np.zeros(shape + (m + 1, 1))
        for k in range(min(m, len(derivs) - 1) + 1):
            c[..., k, 0] = derivs[k] / math.factorial(k)
        return cls(c)

    # -- basic queries -----------------------------------------------------

    @property
    def orders(self):
        return self.c.shape[-2] - 1, self.c.shape[-1] - 1

    @property
    def batch_shape(self):
        return self.c.shape[:-2]

    @property
    def value(self):
        return self.c[..., 0, 0]

    def coeff(self, i, j=0):
        return self.c[..., i, j]

    def deriv(self, i, j=0):
        """Mixed partial d^{i+j} f / dx^i dy^j (factorial normalization undone)."""
        return self.c[..., i, j] * (math.factorial(i) * math.factorial(j))

    def truncate(self, m, n=None):
        mm, nn = self.orders
        if n is None:
            n = nn
        if m > mm or n > nn:
            raise ValueError("truncation cannot extend the jet order")
        return Jet2(self.c[..., : m + 1, : n + 1])

    def d_dx(self):
        """Jet of the first-slot derivative; first-slot order drops by one."""
        m, n = self.orders
        if m < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        idx = np.arange(1, m + 1).reshape((m, 1))
        return Jet2(self.c[..., 1:, :] * idx)

    def __repr__(self):
        return f"Jet2(orders={self.orders}, value={self.value!r})"

    # -- arithmetic --------------------------------------------------------

    def _aligned(self, other):
        a, b = self, other
        m = min(a.orders[0], b.orders[0])
        n = min(a.orders[1], b.orders[1])
        if a.orders != (m, n):
            a = a.truncate(m, n)
        if b.orders != (m, n):
            b = b.truncate(m, n)
        return a, b, m, n

    def __add__(self, other):
        if isinstance(other, Jet2):
            a, b, _, _ = self._aligned(other)
            return Jet2(a.c + b.c)
        arr = np.asarray(other, dtype=float)
        m, n = self.orders
        shape = np.broadcast_shapes(self.batch_shape, arr.shape)
        out = np.zeros(shape + (m + 1, n + 1))
        out += self.c
        out[..., 0, 0] += arr
        return Jet2(out)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.c)

    def __sub__(self, other):
        if isinstance(other, Jet2):
            a, b, _, _ = self._aligned(other)
            return Jet2(a.c - b.c)
        return self + (-np.asarray(other, dtype=float))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            return Jet2(self.c * _lift(other))
        a, b, m, n = self._aligned(other)
        shape = np.broadcast_shapes(a.batch_shape, b.batch_shape)
        out = np.zeros(shape + (m + 1, n + 1))
        for i in range(m + 1):
            for j in range(n + 1):
                acc = 0.0
                for p in range(i + 1):
                    for q in range(j + 1):
                        acc = acc + a.c[..., p, q] * b.c[..., i - p, j - q]
                out[..., i, j] = acc
        return Jet2(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet2):
            return Jet2(self.c / _lift(other))
        a, b, m, n = self._aligned(other)
        b0 = b.c[..., 0, 0]
        if np.any(b0 == 0.0) or not np.all(np.isfinite(b0)):
            raise JetDomainError("jet division", "divisor constant term")
        shape = np.broadcast_shapes(a.batch_shape, b.batch_shape)
        out = np.zeros(shape + (m + 1, n + 1))
        for i in range(m + 1):
            for j in range(n + 1):
                acc = a.c[..., i, j] + np.zeros(shape)
                for p in range(i + 1):
                    for q in range(j + 1):
                        if p == 0 and q == 0:
                            continue
                        acc = acc - b.c[..., p, q] * out[..., i - p, j - q]
                out[..., i, j] = acc / b0
        return Jet2(out)

    def __rtruediv__(self, other):
        return Jet2.constant(other, self.orders, self.batch_shape) / self

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)):
            raise TypeError("jet exponent must be an integer")
        if k < 0:
            return 1.0 / self.__pow__(-k)
        result = Jet2.constant(1.0, self.orders, self.batch_shape)
        base = self
        k = int(k)
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- analytic primitives ------------------------------------------------

    def _compose(self, derivs):
        """Evaluate g(self) given derivative values g^(k)(value), k = 0..K,
        by Horner recursion on the nilpotent part of the jet."""
        m, n = self.orders
        kmax = m + n
        nil = Jet2(self.c.copy())
        nil.c[..., 0, 0] = 0.0
        acc = Jet2.constant(
            np.asarray(derivs[kmax], dtype=float) / math.factorial(kmax),
            (m, n),
            self.batch_shape,
        )
        for k in range(kmax - 1, -1, -1):
            acc = acc * nil + np.asarray(derivs[k], dtype=float) / math.factorial(k)
        return acc

    def _cyclic(self, table):
        a0 = self.c[..., 0, 0]
        kmax = sum(self.orders)
        vals = [f(a0) for f in table]
        return self._compose([vals[k % len(table)] for k in range(kmax + 1)])

    def sin(self):
        return self._cyclic([np.sin, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x)])

    def cos(self):
        return self._cyclic([np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x), np.sin])

    def sinh(self):
        return self._cyclic([np.sinh, np.cosh])

    def cosh(self):
        return self._cyclic([np.cosh, np.sinh])

    def tanh(self):
        return self.sinh() / self.cosh()

    def exp(self):
        kmax = sum(self.orders)
        e = np.exp(self.c[..., 0, 0])
        return self._compose([e] * (kmax + 1))

    def log(self):
        a0 = self.c[..., 0, 0]
        if np.any(a0 <= 0.0):
            raise JetDomainError("jet log", "non-positive argument")
        kmax = sum(self.orders)
        derivs = [np.log(a0)]
        for k in range(1, kmax + 1):
            derivs.append((-1.0) ** (k - 1) * math.factorial(k - 1) / a0**k)
        return self._compose(derivs)

    def sqrt(self):
        a0 = self.c[..., 0, 0]
        if np.any(a0 <= 0.0):
            raise JetDomainError("jet sqrt", "non-positive argument")
        kmax = sum(self.orders)
        derivs = [np.sqrt(a0)]
        coef = 0.5
        for k in range(1, kmax + 1):
            derivs.append(coef * a0 ** (0.5 - k))
            coef *= 0.5 - k
        return self._compose(derivs)

    def abs(self):
        """|f| as a jet; requires the constant term bounded away from zero."""
        a0 = self.c[..., 0, 0]
        if np.any(a0 == 0.0):
            raise JetDomainError("jet abs", "zero constant term")
        return self * np.sign(a0)


def as_jet(x, like: Jet2) -> Jet2:
    """Lift a plain number/array to a constant jet shaped like `like`."""
    if isinstance(x, Jet2):
        return x
    return Jet2.constant(x, like.orders, like.batch_shape)


def jet_sqrt(x):
    return x.sqrt() if isinstance(x, Jet2) else np.sqrt(x)


def jet_abs(x):
    return x.abs() if isinstance(x, Jet2) else np.abs(x)
