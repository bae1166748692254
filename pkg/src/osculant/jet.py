"""Truncated multivariate Taylor series (jets).

A :class:`Jet` stores the Taylor-normalized coefficients ``d^a g / a!`` of a
function of ``num_vars`` variables for every multi-index ``a`` of total degree
at most ``order``.  Coefficients live on the last axis of ``coeffs``; any
leading axes are component axes, so a jet with ``coeffs.shape == (m, N)`` is a
vector field of ``m`` jets sharing one shape.

Multi-indices are ordered graded-lexicographically: by degree first, then
within a degree so that ``u1`` dominates (``u1^2, u1*u2, u2^2``).  Because the
ordering is graded, the coefficients of a lower-order truncation are a prefix
of the full coefficient array.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "DIV_FLOOR",
    "Jet",
    "JetShapeError",
    "SingularJetError",
    "jet_add",
    "jet_constant",
    "jet_div",
    "jet_dot",
    "jet_elementary",
    "jet_extract_derivative",
    "jet_mul",
    "jet_partial",
    "jet_pow",
    "jet_scale",
    "jet_sqrt",
    "jet_sub",
    "jet_truncate",
    "jet_variable",
    "multi_indices",
    "num_coeffs",
]

#: Absolute floor on the constant term of a divisor.
DIV_FLOOR = 1e-300


class JetShapeError(ValueError):
    """Raised when jets of different (num_vars, order) are combined."""


class SingularJetError(ArithmeticError):
    """Raised on division by (or square root of) a jet with a bad constant term."""


def num_coeffs(num_vars: int, order: int) -> int:
    return math.comb(num_vars + order, order)


@functools.lru_cache(maxsize=None)
def multi_indices(num_vars: int, order: int) -> tuple[tuple[int, ...], ...]:
    """All exponent tuples of degree <= order, in graded-lex order."""
    out = []
    for degree in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(num_vars), degree):
            exps = [0] * num_vars
            for var in combo:
                exps[var] += 1
            out.append(tuple(exps))
    return tuple(out)


class _Tables:
    """Index tables for one (num_vars, order) shape."""

    def __init__(self, num_vars: int, order: int):
        self.num_vars = num_vars
        self.order = order
        self.indices = multi_indices(num_vars, order)
        self.position = {alpha: i for i, alpha in enumerate(self.indices)}
        self.size = len(self.indices)
        self.degree = np.array([sum(a) for a in self.indices], dtype=int)
        self.factorial = np.array(
            [math.prod(math.factorial(e) for e in a) for a in self.indices], dtype=float
        )
        # degree d occupies [start[d], start[d + 1])
        self.start = [num_coeffs(num_vars, d - 1) if d > 0 else 0 for d in range(order + 2)]

        left, right, target = [], [], []
        for i, a in enumerate(self.indices):
            for j, b in enumerate(self.indices):
                if self.degree[i] + self.degree[j] > order:
                    continue
                left.append(i)
                right.append(j)
                target.append(self.position[tuple(x + y for x, y in zip(a, b))])
        self.left = np.array(left, dtype=int)
        self.right = np.array(right, dtype=int)
        scatter = np.zeros((len(target), self.size))
        scatter[np.arange(len(target)), target] = 1.0
        self.scatter = scatter

    def layer(self, degree: int) -> slice:
        return slice(self.start[degree], self.start[degree + 1])


@functools.lru_cache(maxsize=None)
def _tables(num_vars: int, order: int) -> _Tables:
    return _Tables(num_vars, order)


def _cauchy(a: np.ndarray, b: np.ndarray, tab: _Tables) -> np.ndarray:
    return (a[..., tab.left] * b[..., tab.right]) @ tab.scatter


@dataclass(frozen=True, eq=False)
class Jet:
    """Truncated Taylor expansion at a point.

    Parameters
    ----------
    num_vars : int
        Number of variables ``n``.
    order : int
        Truncation order ``R``; terms of degree > R are dropped.
    coeffs : ndarray
        Taylor-normalized coefficients, shape ``(..., C(n + R, R))``.
    """

    num_vars: int
    order: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("num_vars must be positive")
        if self.order < 0:
            raise ValueError("order must be non-negative")
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim == 0 or coeffs.shape[-1] != num_coeffs(self.num_vars, self.order):
            raise JetShapeError(
                f"expected {num_coeffs(self.num_vars, self.order)} coefficients, "
                f"got shape {coeffs.shape}"
            )
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def _raw(cls, num_vars: int, order: int, coeffs: np.ndarray) -> "Jet":
        # trusted internal constructor: coeffs is a fresh float array of the right size
        jet = object.__new__(cls)
        object.__setattr__(jet, "num_vars", num_vars)
        object.__setattr__(jet, "order", order)
        coeffs.flags.writeable = False
        object.__setattr__(jet, "coeffs", coeffs)
        return jet

    @property
    def shape(self) -> tuple[int, ...]:
        """Component shape (leading axes of ``coeffs``)."""
        return self.coeffs.shape[:-1]

    @property
    def value(self):
        """Constant term(s), i.e. the value at the expansion point."""
        return self.coeffs[..., 0]

    def __getitem__(self, key) -> "Jet":
        if not self.shape:
            raise TypeError("scalar jet is not subscriptable")
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.num_vars, self.order, self.coeffs[key + (Ellipsis,)])

    def __len__(self) -> int:
        if not self.shape:
            raise TypeError("scalar jet has no len()")
        return self.shape[0]

    def __repr__(self) -> str:
        return f"Jet(num_vars={self.num_vars}, order={self.order}, coeffs={self.coeffs!r})"

    # arithmetic sugar; real numbers are promoted to constant jets
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return jet_constant(other, self.num_vars, self.order)

    def __add__(self, other):
        return jet_add(self, self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return jet_sub(self, self._coerce(other))

    def __rsub__(self, other):
        return jet_sub(self._coerce(other), self)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, other)
        return jet_scale(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return jet_div(self, other)
        return jet_scale(self, 1.0 / other)

    def __rtruediv__(self, other):
        return jet_div(self._coerce(other), self)

    def __neg__(self):
        return jet_scale(self, -1.0)

    def __pow__(self, exponent: int):
        return jet_pow(self, exponent)


def _check_shape(a: Jet, b: Jet) -> None:
    if a.num_vars != b.num_vars or a.order != b.order:
        raise JetShapeError(
            f"jet shapes differ: (n={a.num_vars}, R={a.order}) vs (n={b.num_vars}, R={b.order})"
        )


def jet_constant(value, num_vars: int, order: int) -> Jet:
    value = np.asarray(value, dtype=float)
    coeffs = np.zeros(value.shape + (num_coeffs(num_vars, order),))
    coeffs[..., 0] = value
    return Jet._raw(num_vars, order, coeffs)


def jet_variable(index: int, center: float, num_vars: int, order: int) -> Jet:
    """Jet of the coordinate function ``u_index`` expanded at ``center``."""
    if not 0 <= index < num_vars:
        raise IndexError(f"variable index {index} out of range for {num_vars} variables")
    if order < 0:
        raise ValueError("order must be non-negative")
    coeffs = np.zeros(num_coeffs(num_vars, order))
    coeffs[0] = center
    if order >= 1:
        coeffs[1 + index] = 1.0
    return Jet._raw(num_vars, order, coeffs)


def jet_add(a: Jet, b: Jet) -> Jet:
    _check_shape(a, b)
    return Jet._raw(a.num_vars, a.order, a.coeffs + b.coeffs)


def jet_sub(a: Jet, b: Jet) -> Jet:
    _check_shape(a, b)
    return Jet._raw(a.num_vars, a.order, a.coeffs - b.coeffs)


def jet_scale(a: Jet, s) -> Jet:
    """Multiply by a real scalar (or an array broadcasting over components)."""
    s = np.asarray(s, dtype=float)
    return Jet._raw(a.num_vars, a.order, a.coeffs * s[..., None])


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Truncated Cauchy product, broadcasting over component axes."""
    _check_shape(a, b)
    tab = _tables(a.num_vars, a.order)
    return Jet._raw(a.num_vars, a.order, _cauchy(a.coeffs, b.coeffs, tab))


def jet_dot(a: Jet, b: Jet) -> Jet:
    """Euclidean inner product of two vector-valued jets over their first axis."""
    prod = jet_mul(a, b)
    return Jet._raw(a.num_vars, a.order, prod.coeffs.sum(axis=0))


def jet_pow(a: Jet, exponent: int) -> Jet:
    if int(exponent) != exponent or exponent < 0:
        raise ValueError(f"exponent must be a non-negative integer, got {exponent!r}")
    exponent = int(exponent)
    result = jet_constant(np.ones(a.shape), a.num_vars, a.order)
    base = a
    while exponent:
        if exponent & 1:
            result = jet_mul(result, base)
        exponent >>= 1
        if exponent:
            base = jet_mul(base, base)
    return result


def jet_div(a: Jet, b: Jet) -> Jet:
    """Quotient ``a / b`` solved layer by layer in increasing degree."""
    _check_shape(a, b)
    b0 = b.coeffs[..., 0]
    if np.any(np.abs(b0) <= DIV_FLOOR):
        raise SingularJetError("division by a jet with (near-)zero constant term")
    tab = _tables(a.num_vars, a.order)
    shape = np.broadcast_shapes(a.shape, b.shape)
    a_c = np.broadcast_to(a.coeffs, shape + (tab.size,))
    nil = np.array(np.broadcast_to(b.coeffs, shape + (tab.size,)))
    nil[..., 0] = 0.0
    q = np.zeros(shape + (tab.size,))
    inv0 = (1.0 / b0)[..., None]
    for d in range(a.order + 1):
        layer = tab.layer(d)
        if d == 0:
            q[..., layer] = a_c[..., layer] * inv0
            continue
        cross = _cauchy(nil, q, tab)
        q[..., layer] = (a_c[..., layer] - cross[..., layer]) * inv0
    return Jet._raw(a.num_vars, a.order, q)


def jet_sqrt(a: Jet) -> Jet:
    """Principal square root; the constant term must be strictly positive."""
    a0 = a.coeffs[..., 0]
    if np.any(a0 <= 0.0):
        raise SingularJetError("square root of a jet with non-positive constant term")
    tab = _tables(a.num_vars, a.order)
    s = np.zeros(a.coeffs.shape)
    s0 = np.sqrt(a0)
    s[..., 0] = s0
    half_inv = (0.5 / s0)[..., None]
    for d in range(1, a.order + 1):
        layer = tab.layer(d)
        nil = s.copy()
        nil[..., 0] = 0.0
        cross = _cauchy(nil, nil, tab)
        s[..., layer] = (a.coeffs[..., layer] - cross[..., layer]) * half_inv
    return Jet._raw(a.num_vars, a.order, s)


def _series(func: str, x0: np.ndarray, terms: int) -> list[np.ndarray]:
    # Taylor coefficients f^(k)(x0) / k! of the outer function
    if func == "exp":
        e = np.exp(x0)
        return [e / math.factorial(k) for k in range(terms)]
    if func == "sin":
        cycle = (np.sin(x0), np.cos(x0), -np.sin(x0), -np.cos(x0))
    elif func == "cos":
        cycle = (np.cos(x0), -np.sin(x0), -np.cos(x0), np.sin(x0))
    else:
        raise ValueError(f"unsupported elementary function {func!r}")
    return [cycle[k % 4] / math.factorial(k) for k in range(terms)]


def jet_elementary(a: Jet, func: str) -> Jet:
    """Compose ``func`` in {'sin', 'cos', 'exp'} with a jet.

    The univariate series of ``func`` at the constant term is evaluated on the
    nilpotent part by Horner's rule with ``order + 1`` terms.
    """
    x0 = a.coeffs[..., 0]
    coef = _series(func, x0, a.order + 1)
    nil_c = np.array(a.coeffs)
    nil_c[..., 0] = 0.0
    nil = Jet._raw(a.num_vars, a.order, nil_c)
    result = jet_constant(coef[-1], a.num_vars, a.order)
    for c in reversed(coef[:-1]):
        result = jet_mul(result, nil) + jet_constant(c, a.num_vars, a.order)
    return result


def _as_alpha(alpha: Sequence[int], num_vars: int) -> tuple[int, ...]:
    alpha = tuple(int(e) for e in alpha)
    if len(alpha) != num_vars or any(e < 0 for e in alpha):
        raise ValueError(f"invalid multi-index {alpha} for {num_vars} variables")
    return alpha


def jet_extract_derivative(a: Jet, alpha: Sequence[int]):
    """The partial derivative ``d^alpha`` at the expansion point."""
    alpha = _as_alpha(alpha, a.num_vars)
    if sum(alpha) > a.order:
        raise ValueError(f"multi-index {alpha} exceeds truncation order {a.order}")
    tab = _tables(a.num_vars, a.order)
    i = tab.position[alpha]
    return a.coeffs[..., i] * tab.factorial[i]


def jet_truncate(a: Jet, new_order: int) -> Jet:
    if new_order > a.order:
        raise ValueError(f"cannot truncate order {a.order} jet to order {new_order}")
    if new_order < 0:
        raise ValueError("order must be non-negative")
    return Jet(a.num_vars, new_order, a.coeffs[..., : num_coeffs(a.num_vars, new_order)])


@functools.lru_cache(maxsize=None)
def _partial_map(num_vars: int, order: int, var: int) -> tuple[np.ndarray, np.ndarray]:
    src = _tables(num_vars, order)
    dst = _tables(num_vars, order - 1)
    take = np.empty(dst.size, dtype=int)
    weight = np.empty(dst.size)
    for i, beta in enumerate(dst.indices):
        raised = list(beta)
        raised[var] += 1
        take[i] = src.position[tuple(raised)]
        weight[i] = raised[var]
    return take, weight


def jet_partial(a: Jet, var: int) -> Jet:
    """Jet of the partial derivative in ``var``; the order drops by one."""
    if a.order < 1:
        raise ValueError("cannot differentiate an order-0 jet")
    if not 0 <= var < a.num_vars:
        raise IndexError(f"variable index {var} out of range")
    take, weight = _partial_map(a.num_vars, a.order, var)
    return Jet._raw(a.num_vars, a.order - 1, a.coeffs[..., take] * weight)
