"""Truncated multivariate Taylor arithmetic (jets) up to third order.

A :class:`Jet` stores the value and the raw partial derivatives (not the
factorial-divided Taylor coefficients) of a scalar quantity with respect to
``num_vars`` independent variables, up to total order <= 3.  All arithmetic
propagates derivatives exactly at the truncation order, so feeding seeded
jets through an analytic formula yields the exact derivatives of that
formula at the base point.

Coefficient arrays carry an arbitrary leading batch shape, which lets a
single jet describe a quantity at many evaluation points at once; every
operation is vectorized over the batch.

Degree-2 and degree-3 blocks are kept bitwise symmetric: after each
operation the canonical (sorted-index) entry is mirrored to all index
permutations.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Jet",
    "ComplexJet",
    "seed_variables",
    "constant",
    "arith",
    "elementary",
    "derivative",
    "compose",
    "compose_univariate",
    "sin",
    "cos",
    "sinh",
    "cosh",
    "exp",
    "sqrt",
    "recip",
    "atan2",
]

# Reciprocal of a jet value this close to zero is refused rather than
# letting derivatives blow past float range.
DIV_FLOOR = 1e-12

_MIRROR2_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}
_MIRROR3_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _mirror2(t: np.ndarray, v: int) -> np.ndarray:
    """Copy the i<=j entries of the trailing (v, v) block to all permutations."""
    if v not in _MIRROR2_CACHE:
        i, j = np.meshgrid(np.arange(v), np.arange(v), indexing="ij")
        lo, hi = np.minimum(i, j), np.maximum(i, j)
        _MIRROR2_CACHE[v] = (lo, hi)
    lo, hi = _MIRROR2_CACHE[v]
    return t[..., lo, hi]


def _mirror3(t: np.ndarray, v: int) -> np.ndarray:
    """Copy the i<=j<=k entries of the trailing (v, v, v) block everywhere."""
    if v not in _MIRROR3_CACHE:
        idx = np.stack(np.meshgrid(*[np.arange(v)] * 3, indexing="ij"))
        idx = np.sort(idx, axis=0)
        _MIRROR3_CACHE[v] = (idx[0], idx[1], idx[2])
    a, b, c = _MIRROR3_CACHE[v]
    return t[..., a, b, c]


def _sym3_from_21(t2: np.ndarray, t1: np.ndarray) -> np.ndarray:
    """Symmetric 3-tensor sum A_{ij} c_k + A_{ik} c_j + A_{jk} c_i."""
    base = t2[..., :, :, None] * t1[..., None, None, :]
    return base + np.swapaxes(base, -1, -2) + np.moveaxis(base, -1, -3)


class Jet:
    """Value plus partial derivatives of one scalar quantity.

    Parameters
    ----------
    order : int
        Truncation order, in ``{0, 1, 2, 3}``.
    num_vars : int
        Number of independent variables.
    val, d1, d2, d3 : ndarray
        Batched coefficient blocks; ``d1`` has trailing shape ``(num_vars,)``,
        ``d2`` ``(num_vars, num_vars)`` and so on.  Blocks above ``order``
        are ``None``.
    """

    __slots__ = ("order", "num_vars", "val", "d1", "d2", "d3")

    def __init__(self, order, num_vars, val, d1=None, d2=None, d3=None):
        if order not in (0, 1, 2, 3):
            raise ValueError(f"jet order must be in 0..3, got {order}")
        if num_vars < 1:
            raise ValueError(f"num_vars must be >= 1, got {num_vars}")
        self.order = order
        self.num_vars = num_vars
        self.val = np.asarray(val, dtype=float)
        b = self.val.shape
        v = num_vars
        self.d1 = np.zeros(b + (v,)) if (order >= 1 and d1 is None) else d1
        self.d2 = np.zeros(b + (v, v)) if (order >= 2 and d2 is None) else d2
        self.d3 = np.zeros(b + (v, v, v)) if (order >= 3 and d3 is None) else d3
        if order < 1:
            self.d1 = None
        if order < 2:
            self.d2 = None
        if order < 3:
            self.d3 = None

    # -- basic introspection -------------------------------------------------

    @property
    def batch_shape(self):
        return self.val.shape

    def copy(self) -> "Jet":
        return Jet(
            self.order,
            self.num_vars,
            self.val.copy(),
            None if self.d1 is None else self.d1.copy(),
            None if self.d2 is None else self.d2.copy(),
            None if self.d3 is None else self.d3.copy(),
        )

    def __repr__(self):
        return (
            f"Jet(order={self.order}, num_vars={self.num_vars}, "
            f"batch={self.batch_shape}, val={self.val!r})"
        )

    def _check_compatible(self, other: "Jet"):
        if self.order != other.order or self.num_vars != other.num_vars:
            raise ValueError(
                "jet shape mismatch: "
                f"({self.order}, {self.num_vars}) vs ({other.order}, {other.num_vars})"
            )

    # -- ring operations ------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Jet):
            out = self.copy()
            out.val = out.val + np.asarray(other, dtype=float)
            return out
        self._check_compatible(other)
        return Jet(
            self.order,
            self.num_vars,
            self.val + other.val,
            None if self.d1 is None else self.d1 + other.d1,
            None if self.d2 is None else self.d2 + other.d2,
            None if self.d3 is None else self.d3 + other.d3,
        )

    __radd__ = __add__

    def __neg__(self):
        return Jet(
            self.order,
            self.num_vars,
            -self.val,
            None if self.d1 is None else -self.d1,
            None if self.d2 is None else -self.d2,
            None if self.d3 is None else -self.d3,
        )

    def __sub__(self, other):
        if not isinstance(other, Jet):
            out = self.copy()
            out.val = out.val - np.asarray(other, dtype=float)
            return out
        return self.__add__(other.__neg__())

    def __rsub__(self, other):
        return self.__neg__().__add__(other)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)

            def scale(blk, extra):
                if blk is None:
                    return None
                return blk * (c if c.ndim == 0 else c.reshape(c.shape + (1,) * extra))

            return Jet(
                self.order,
                self.num_vars,
                self.val * c,
                scale(self.d1, 1),
                scale(self.d2, 2),
                scale(self.d3, 3),
            )
        self._check_compatible(other)
        a, b = self, other
        v = self.num_vars
        val = a.val * b.val
        d1 = d2 = d3 = None
        if self.order >= 1:
            d1 = a.d1 * b.val[..., None] + b.d1 * a.val[..., None]
        if self.order >= 2:
            d2 = (
                a.d2 * b.val[..., None, None]
                + b.d2 * a.val[..., None, None]
                + a.d1[..., :, None] * b.d1[..., None, :]
                + b.d1[..., :, None] * a.d1[..., None, :]
            )
            d2 = _mirror2(d2, v)
        if self.order >= 3:
            d3 = (
                a.d3 * b.val[..., None, None, None]
                + b.d3 * a.val[..., None, None, None]
                + _sym3_from_21(a.d2, b.d1)
                + _sym3_from_21(b.d2, a.d1)
            )
            d3 = _mirror3(d3, v)
        return Jet(self.order, v, val, d1, d2, d3)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self.__mul__(1.0 / np.asarray(other, dtype=float))
        return self.__mul__(recip(other))

    def __rtruediv__(self, other):
        return recip(self).__mul__(other)

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("jet powers must be non-negative integers")
        out = constant(np.ones(self.batch_shape), self.num_vars, self.order)
        for _ in range(int(k)):
            out = out * self
        return out


def seed_variables(base_point, order: int, batch=False) -> list[Jet]:
    """Seed one jet per coordinate of ``base_point``.

    Each returned jet has the coordinate value, a unit first derivative in
    its own slot, and zero higher coefficients.

    Parameters
    ----------
    base_point : array_like
        Coordinates; shape ``(num_vars,)`` or, with ``batch=True``,
        ``(..., num_vars)`` for batched evaluation.
    order : int
        Truncation order in ``{0, 1, 2, 3}``.
    """
    p = np.asarray(base_point, dtype=float)
    if not batch:
        p = np.atleast_1d(p)
        if p.ndim != 1:
            raise ValueError("base_point must be one-dimensional (or use batch=True)")
    v = p.shape[-1]
    jets = []
    for i in range(v):
        j = Jet(order, v, p[..., i].copy())
        if order >= 1:
            j.d1[..., i] = 1.0
        jets.append(j)
    return jets


def constant(value, num_vars: int, order: int) -> Jet:
    """A jet whose derivative blocks all vanish."""
    return Jet(order, num_vars, np.asarray(value, dtype=float).copy())


def arith(a: Jet, b: Jet, kind: str) -> Jet:
    """Named wrapper over the ring operations: ``add, sub, mul, div``."""
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        return a / b
    raise ValueError(f"unknown arithmetic kind {kind!r}")


def compose_univariate(derivs, u: Jet) -> Jet:
    """Compose a scalar function with a jet (Faa di Bruno to order 3).

    ``derivs`` is the tuple ``(f(u0), f'(u0), f''(u0), f'''(u0))`` truncated
    to ``u.order + 1`` entries, each shaped like ``u.val``.
    """
    f = derivs
    v = u.num_vars
    val = np.asarray(f[0], dtype=float)
    d1 = d2 = d3 = None
    if u.order >= 1:
        d1 = f[1][..., None] * u.d1
    if u.order >= 2:
        d2 = f[1][..., None, None] * u.d2 + f[2][..., None, None] * (
            u.d1[..., :, None] * u.d1[..., None, :]
        )
        d2 = _mirror2(d2, v)
    if u.order >= 3:
        d3 = (
            f[1][..., None, None, None] * u.d3
            + f[2][..., None, None, None] * _sym3_from_21(u.d2, u.d1)
            + f[3][..., None, None, None]
            * (
                u.d1[..., :, None, None]
                * u.d1[..., None, :, None]
                * u.d1[..., None, None, :]
            )
        )
        d3 = _mirror3(d3, v)
    return Jet(u.order, v, val, d1, d2, d3)


def _table(u: Jet, kind: str):
    x = u.val
    if kind == "sin":
        s, c = np.sin(x), np.cos(x)
        return (s, c, -s, -c)
    if kind == "cos":
        s, c = np.sin(x), np.cos(x)
        return (c, -s, -c, s)
    if kind == "sinh":
        s, c = np.sinh(x), np.cosh(x)
        return (s, c, s, c)
    if kind == "cosh":
        s, c = np.sinh(x), np.cosh(x)
        return (c, s, c, s)
    if kind == "exp":
        e = np.exp(x)
        return (e, e, e, e)
    if kind == "sqrt":
        if np.any(x <= 0):
            raise ValueError("sqrt of a jet requires a strictly positive value")
        r = np.sqrt(x)
        return (r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x))
    if kind == "recip":
        if np.any(np.abs(x) < DIV_FLOOR):
            raise ZeroDivisionError(
                "jet reciprocal: value within %.1e of zero" % DIV_FLOOR
            )
        w = 1.0 / x
        return (w, -w * w, 2.0 * w**3, -6.0 * w**4)
    raise ValueError(f"unknown elementary kind {kind!r}")


def elementary(a: Jet, kind: str, b: Jet | None = None) -> Jet:
    """Apply an elementary function to a jet.

    ``kind`` is one of ``sin, cos, sinh, cosh, exp, sqrt, recip`` or the
    two-argument ``atan2_pair`` (pass the abscissa jet as ``b``).
    """
    if kind == "atan2_pair":
        if b is None:
            raise ValueError("atan2_pair needs a second jet")
        return atan2(a, b)
    return compose_univariate(_table(a, kind)[: a.order + 1], a)


def _dispatch(kind):
    def op(x, second=None):
        if isinstance(x, Jet):
            return elementary(x, kind, second)
        return getattr(np, kind)(x)

    op.__name__ = kind
    return op


sin = _dispatch("sin")
cos = _dispatch("cos")
sinh = _dispatch("sinh")
cosh = _dispatch("cosh")
exp = _dispatch("exp")
sqrt = _dispatch("sqrt")


def recip(x):
    if isinstance(x, Jet):
        return elementary(x, "recip")
    return 1.0 / x


def derivative(jet: Jet, i: int) -> Jet:
    """The jet of ``d(jet)/dx_i``, one order lower."""
    if jet.order < 1:
        raise ValueError("cannot differentiate an order-0 jet")
    return Jet(
        jet.order - 1,
        jet.num_vars,
        jet.d1[..., i].copy(),
        None if jet.d2 is None else jet.d2[..., i, :].copy(),
        None if jet.d3 is None else jet.d3[..., i, :, :].copy(),
    )


def atan2(y: Jet, x: Jet):
    """Two-argument arctangent of a pair of jets.

    The value is ``arctan2(y0, x0)``; derivatives come from the closed form
    ``d(theta) = (x dy - y dx) / (x^2 + y^2)``, evaluated through jet
    arithmetic one order down, so no branch-cut issues enter the
    derivative blocks.
    """
    if not isinstance(y, Jet) or not isinstance(x, Jet):
        return np.arctan2(y, x)
    y._check_compatible(x)
    v = y.num_vars
    val = np.arctan2(y.val, x.val)
    if y.order == 0:
        return Jet(0, v, val)
    out = Jet(y.order, v, val)
    q = x * x + y * y
    if np.any(q.val < DIV_FLOOR**2):
        raise ZeroDivisionError("atan2 of a jet pair vanishing at the origin")
    xl, yl, ql = _drop(x), _drop(y), _drop(q)
    for i in range(v):
        # d(theta)/dx_i as a jet of order-1 lower.
        gi = (xl * derivative(y, i) - yl * derivative(x, i)) / ql
        out.d1[..., i] = gi.val
        if out.order >= 2:
            out.d2[..., i, :] = gi.d1
        if out.order >= 3:
            out.d3[..., i, :, :] = gi.d2
    if out.order >= 2:
        out.d2 = _mirror2(out.d2, v)
    if out.order >= 3:
        out.d3 = _mirror3(out.d3, v)
    return out


def _drop(j: Jet) -> Jet:
    """Same jet truncated one order lower."""
    return Jet(
        j.order - 1,
        j.num_vars,
        j.val,
        j.d1 if j.order - 1 >= 1 else None,
        j.d2 if j.order - 1 >= 2 else None,
        None,
    )


def compose(f: Jet, xs: list[Jet]) -> Jet:
    """Multivariate chain rule: the jet of ``f(x_1(t), ..., x_m(t))``.

    ``f`` is a jet in ``m`` variables (the derivatives of the outer function
    at the inner values) and ``xs`` are ``m`` jets in a common set of inner
    variables.  The result is truncated to ``min(f.order, xs[0].order)``.
    """
    m = f.num_vars
    if len(xs) != m:
        raise ValueError(f"need {m} inner jets, got {len(xs)}")
    order = min(f.order, xs[0].order)
    v = xs[0].num_vars
    for x in xs:
        if x.num_vars != v or x.order != xs[0].order:
            raise ValueError("inner jets must share order and num_vars")
    val = f.val.copy()
    out = Jet(order, v, val)
    if order == 0:
        return out
    X1 = np.stack([x.d1 for x in xs], axis=-2)  # (..., m, v)
    out.d1 = np.einsum("...m,...mi->...i", f.d1, X1)
    if order >= 1 and order < 2:
        return out
    X2 = np.stack([x.d2 for x in xs], axis=-3)  # (..., m, v, v)
    out.d2 = _mirror2(
        np.einsum("...m,...mij->...ij", f.d1, X2)
        + np.einsum("...mn,...mi,...nj->...ij", f.d2, X1, X1),
        v,
    )
    if order < 3:
        return out
    X3 = np.stack([x.d3 for x in xs], axis=-4)
    cross = np.einsum("...mn,...mi,...njk->...ijk", f.d2, X1, X2)
    cross = cross + np.moveaxis(cross, -3, -2) + np.moveaxis(cross, -3, -1)
    out.d3 = _mirror3(
        np.einsum("...m,...mijk->...ijk", f.d1, X3)
        + cross
        + np.einsum("...mnp,...mi,...nj,...pk->...ijk", f.d3, X1, X1, X1),
        v,
    )
    return out


class ComplexJet:
    """A complex scalar carried as a (real, imaginary) pair of jets."""

    __slots__ = ("re", "im")

    def __init__(self, re: Jet, im: Jet):
        re._check_compatible(im)
        self.re = re
        self.im = im

    @classmethod
    def from_real(cls, re: Jet) -> "ComplexJet":
        return cls(re, constant(np.zeros(re.batch_shape), re.num_vars, re.order))

    def __add__(self, other):
        if isinstance(other, ComplexJet):
            return ComplexJet(self.re + other.re, self.im + other.im)
        if isinstance(other, Jet):
            return ComplexJet(self.re + other, self.im.copy())
        c = complex(other)
        return ComplexJet(self.re + c.real, self.im + c.imag)

    __radd__ = __add__

    def __neg__(self):
        return ComplexJet(-self.re, -self.im)

    def __sub__(self, other):
        if isinstance(other, (ComplexJet, Jet)):
            return self + (-other)
        return self + (-complex(other))

    def __mul__(self, other):
        if isinstance(other, ComplexJet):
            return ComplexJet(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        if isinstance(other, Jet):
            return ComplexJet(self.re * other, self.im * other)
        c = complex(other)
        return ComplexJet(
            self.re * c.real - self.im * c.imag,
            self.re * c.imag + self.im * c.real,
        )

    __rmul__ = __mul__

    def conj(self) -> "ComplexJet":
        return ComplexJet(self.re.copy(), -self.im)

    def abs2(self) -> Jet:
        return self.re * self.re + self.im * self.im

    def __truediv__(self, other):
        if not isinstance(other, ComplexJet):
            return self * (1.0 / complex(other))
        q = other.abs2()
        if np.any(q.val < DIV_FLOOR**2):
            raise ZeroDivisionError("complex jet division by a near-zero value")
        qi = recip(q)
        num = self * other.conj()
        return ComplexJet(num.re * qi, num.im * qi)
