"""Forward-mode automatic differentiation with truncated Taylor jets.

Two engines live here:

* :class:`Jet3` — third-order multivariate Taylor jets (value, gradient,
  Hessian, third-derivative tensor), batched over a leading sample axis.
  This is the source of record for all field derivatives; finite
  differences are used only as a cross-check, never as the source.

* :class:`Grad` — a value-plus-gradient dual used by the divergence
  engine.  Seeding a Grad tower from a Jet3 (or from analytic radial
  derivatives) lets any algebraic expression of (u, grad u, hess u)
  return its own exact first derivatives.

All derivative tensors are stored as raw derivatives (not divided by
factorials) and are symmetric in their derivative indices.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Jet3",
    "jet3_coords",
    "jet3_const",
    "Grad",
    "grad_abs_pow",
    "grad_signed_pow",
]


def _sym_vh(g, h):
    # (g (x) h) symmetrized over the three derivative slots
    return (
        np.einsum("...i,...jk->...ijk", g, h)
        + np.einsum("...j,...ik->...ijk", g, h)
        + np.einsum("...k,...ij->...ijk", g, h)
    )


class Jet3:
    """Third-order Taylor jet of a scalar quantity at a batch of points.

    Shapes: v (N,), g (N,n), h (N,n,n), t (N,n,n,n).
    """

    __slots__ = ("v", "g", "h", "t")

    def __init__(self, v, g, h, t):
        self.v = v
        self.g = g
        self.h = h
        self.t = t

    # -- ring operations -------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet3):
            return Jet3(self.v + other.v, self.g + other.g,
                        self.h + other.h, self.t + other.t)
        return Jet3(self.v + other, self.g, self.h, self.t)

    __radd__ = __add__

    def __neg__(self):
        return Jet3(-self.v, -self.g, -self.h, -self.t)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet3) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet3):
            return Jet3(self.v * other, self.g * other, self.h * other, self.t * other)
        a, b = self, other
        v = a.v * b.v
        g = a.g * b.v[..., None] + b.g * a.v[..., None]
        outer_ab = np.einsum("...i,...j->...ij", a.g, b.g)
        h = (
            a.h * b.v[..., None, None]
            + b.h * a.v[..., None, None]
            + outer_ab
            + np.swapaxes(outer_ab, -1, -2)
        )
        t = (
            a.t * b.v[..., None, None, None]
            + b.t * a.v[..., None, None, None]
            + _sym_vh(b.g, a.h)
            + _sym_vh(a.g, b.h)
        )
        return Jet3(v, g, h, t)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet3):
            return self * other.compose_power(-1.0)
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.compose_power(-1.0) * other

    def __pow__(self, c):
        if isinstance(c, int) and 0 <= c <= 6:
            out = jet3_const(1.0, self.v.shape, self.g.shape[-1])
            for _ in range(c):
                out = out * self
            return out
        return self.compose_power(float(c))

    # -- composition with univariate outer functions ---------------------

    def compose(self, f0, f1, f2, f3):
        """Chain rule with outer derivatives f0..f3 evaluated at self.v."""
        g = f1[..., None] * self.g
        gg = np.einsum("...i,...j->...ij", self.g, self.g)
        h = f1[..., None, None] * self.h + f2[..., None, None] * gg
        t = (
            f1[..., None, None, None] * self.t
            + f2[..., None, None, None] * _sym_vh(self.g, self.h)
            + f3[..., None, None, None]
            * np.einsum("...i,...j,...k->...ijk", self.g, self.g, self.g)
        )
        return Jet3(f0, g, h, t)

    def compose_power(self, c):
        v = self.v
        return self.compose(
            v**c,
            c * v ** (c - 1.0),
            c * (c - 1.0) * v ** (c - 2.0),
            c * (c - 1.0) * (c - 2.0) * v ** (c - 3.0),
        )

    def exp(self):
        e = np.exp(self.v)
        return self.compose(e, e, e, e)

    def log(self):
        v = self.v
        return self.compose(np.log(v), 1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def sqrt(self):
        return self.compose_power(0.5)

    def sin(self):
        s, c = np.sin(self.v), np.cos(self.v)
        return self.compose(s, c, -s, -c)

    def cos(self):
        s, c = np.sin(self.v), np.cos(self.v)
        return self.compose(c, -s, -c, s)


def jet3_coords(points):
    """Coordinate jets at an (N, n) batch of points."""
    points = np.asarray(points, dtype=float)
    n_pts, dim = points.shape
    out = []
    for i in range(dim):
        g = np.zeros((n_pts, dim))
        g[:, i] = 1.0
        out.append(
            Jet3(
                points[:, i].copy(),
                g,
                np.zeros((n_pts, dim, dim)),
                np.zeros((n_pts, dim, dim, dim)),
            )
        )
    return out


def jet3_const(value, batch_shape, dim):
    if not isinstance(batch_shape, tuple):
        batch_shape = (int(batch_shape),)
    v = np.full(batch_shape, float(value))
    return Jet3(
        v,
        np.zeros(batch_shape + (dim,)),
        np.zeros(batch_shape + (dim, dim)),
        np.zeros(batch_shape + (dim, dim, dim)),
    )


# ----------------------------------------------------------------------
# value + gradient duals
# ----------------------------------------------------------------------


class Grad:
    """Scalar quantity with its gradient along m derivative directions.

    v has shape (N,) and d has shape (N, m).  m is the ambient dimension
    for Euclidean fields and 1 for radial reductions (d/dr).  Only scalar
    Grads support operator overloading; vector and matrix quantities are
    handled by the explicit helpers in the divergence engine.
    """

    __slots__ = ("v", "d")

    def __init__(self, v, d):
        self.v = np.asarray(v, dtype=float)
        self.d = np.asarray(d, dtype=float)

    def __add__(self, other):
        if isinstance(other, Grad):
            return Grad(self.v + other.v, self.d + other.d)
        return Grad(self.v + other, self.d)

    __radd__ = __add__

    def __neg__(self):
        return Grad(-self.v, -self.d)

    def __sub__(self, other):
        if isinstance(other, Grad):
            return Grad(self.v - other.v, self.d - other.d)
        return Grad(self.v - other, self.d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Grad):
            return Grad(
                self.v * other.v,
                self.d * other.v[..., None] + other.d * self.v[..., None],
            )
        return Grad(self.v * other, self.d * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Grad):
            return self * other**-1.0
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self**-1.0 * other

    def __pow__(self, c):
        c = float(c)
        return Grad(
            self.v**c, c * (self.v ** (c - 1.0))[..., None] * self.d
        )

    def sqrt(self):
        return self**0.5

    def log(self):
        return Grad(np.log(self.v), self.d / self.v[..., None])

    def exp(self):
        e = np.exp(self.v)
        return Grad(e, e[..., None] * self.d)


def grad_abs_pow(x: Grad, q: float) -> Grad:
    """|x|^q with derivative q*sign(x)*|x|^{q-1}; smooth away from x=0."""
    a = np.abs(x.v)
    return Grad(a**q, (q * np.sign(x.v) * a ** (q - 1.0))[..., None] * x.d)


def grad_signed_pow(x: Grad, q: float) -> Grad:
    """sign(x)|x|^q with derivative q|x|^{q-1}; odd extension of x^q."""
    a = np.abs(x.v)
    return Grad(np.sign(x.v) * a**q, (q * a ** (q - 1.0))[..., None] * x.d)
