"""Parametrized immersions f: R^n -> R^m and their jets.

Spec files are line-oriented ``key = value`` text::

    # comments start with '#'
    name = helix
    dim_domain = 1
    components = ["cos(u1)", "sin(u1)", "u1"]
    base_point = [0.0]
    max_order = 2

``components`` is a JSON list of expression strings and may span several
lines; ``base_point`` (JSON list, default the origin) and ``max_order``
(default 2) are optional.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .expr import BinOp, Expr, Neg, Num, Seeds, Var, parse_expression, substitute
from .jet import Jet, jet_variable, multi_indices

__all__ = [
    "Immersion",
    "SpecError",
    "eval_jet",
    "evaluate",
    "extremal_example",
    "gallery",
    "gallery_names",
    "load_spec",
    "monomials",
    "random_corpus",
    "random_polynomial_immersion",
    "reparametrize",
    "save_gallery",
    "save_spec",
]

DEFAULT_MAX_ORDER = 2


class SpecError(ValueError):
    """Malformed spec file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class Immersion:
    dim_domain: int
    components: tuple[Expr, ...]
    name: str = "immersion"

    def __post_init__(self):
        if self.dim_domain < 1:
            raise ValueError("dim_domain must be at least 1")
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) < self.dim_domain:
            raise ValueError(
                f"ambient dimension {len(self.components)} is smaller than "
                f"domain dimension {self.dim_domain}"
            )
        for i, c in enumerate(self.components):
            bad = [v for v in c.variables() if v > self.dim_domain]
            if bad:
                raise ValueError(f"component {i + 1} uses u{max(bad)} but n = {self.dim_domain}")

    @property
    def dim_ambient(self) -> int:
        return len(self.components)

    @classmethod
    def from_strings(cls, components: Sequence[str], dim_domain: int, name: str = "immersion"):
        return cls(dim_domain, tuple(parse_expression(c, dim_domain) for c in components), name)

    def texts(self) -> list[str]:
        return [c.to_text() for c in self.components]


def _check_point(im: Immersion, point) -> np.ndarray:
    point = np.asarray(point, dtype=float).reshape(-1)
    if point.shape != (im.dim_domain,):
        raise ValueError(f"base point must have {im.dim_domain} coordinates, got {point.shape[0]}")
    return point


def eval_jet(im: Immersion, point, order: int) -> Jet:
    """Jets of all components of ``im`` at ``point``, as one ``(m,)``-shaped jet."""
    if order < 1:
        raise ValueError("jet order must be at least 1")
    point = _check_point(im, point)
    n = im.dim_domain
    seeds = Seeds(jet_variable(i, point[i], n, order) for i in range(n))
    rows = [c.jet(seeds).coeffs for c in im.components]
    return Jet(n, order, np.stack(rows))


def evaluate(im: Immersion, point) -> np.ndarray:
    """Plain floating-point value f(point)."""
    point = _check_point(im, point)
    return np.array([c.evaluate(point) for c in im.components])


def monomials(num_vars: int, degree: int) -> list[tuple[int, ...]]:
    """Exponent tuples of exactly ``degree``, in graded-lex order."""
    lo = math.comb(num_vars + degree - 1, degree - 1) if degree else 0
    return list(multi_indices(num_vars, degree)[lo:])


def _monomial_text(alpha: Sequence[int]) -> str:
    parts = []
    for i, e in enumerate(alpha):
        if e == 1:
            parts.append(f"u{i + 1}")
        elif e > 1:
            parts.append(f"u{i + 1}^{e}")
    return "*".join(parts) if parts else "1"


def _term_text(coef: float, alpha: Sequence[int]) -> str:
    mono = _monomial_text(alpha)
    if coef == 1.0:
        return mono
    return f"{coef!r}*{mono}"


def extremal_example(n: int, r: int, coefficients=None) -> Immersion:
    """Polynomial immersion with one fresh ambient axis per monomial.

    ``f(u) = (u_1, .., u_n, a_a u^a for 2 <= |a| <= r + 1)``, monomials in
    graded-lex order.  At the origin its order-``d`` normal curvature matrix
    has rank ``C(n + d, d + 1)`` for every ``d <= r``.

    Parameters
    ----------
    n, r : int
        Domain dimension and highest curvature order to saturate.
    coefficients : sequence or mapping, optional
        Nonzero monomial coefficients, either in monomial order or keyed by
        exponent tuple.  Defaults to all ones.
    """
    if n < 1 or r < 1:
        raise ValueError(f"extremal example needs n >= 1 and r >= 1, got n={n}, r={r}")
    alphas = [a for d in range(2, r + 2) for a in monomials(n, d)]
    if coefficients is None:
        coefs = [1.0] * len(alphas)
    elif isinstance(coefficients, Mapping):
        coefs = [float(coefficients.get(a, 1.0)) for a in alphas]
    else:
        coefs = [float(c) for c in coefficients]
        if len(coefs) != len(alphas):
            raise ValueError(f"expected {len(alphas)} coefficients, got {len(coefs)}")
    if any(c == 0.0 for c in coefs):
        raise ValueError("extremal example coefficients must all be nonzero")
    texts = [f"u{i + 1}" for i in range(n)]
    texts += [_term_text(c, a) for c, a in zip(coefs, alphas)]
    return Immersion.from_strings(texts, n, name=f"extremal_n{n}_r{r}")


def _poly_text(rng: np.random.Generator, n: int, degrees: range, lead: str | None) -> str:
    terms = [lead] if lead else []
    for d in degrees:
        for alpha in monomials(n, d):
            c = round(float(rng.uniform(-1.0, 1.0)), 6)
            if c == 0.0:
                continue
            text = _term_text(abs(c), alpha)
            if not terms:
                terms.append(text if c > 0 else f"-{text}")
            else:
                terms.append(("+ " if c > 0 else "- ") + text)
    return " ".join(terms) if terms else "0"


def random_polynomial_immersion(n: int, m: int, max_degree: int, seed: int) -> Immersion:
    """Seeded random polynomial immersion with identity Jacobian block at 0.

    The first ``n`` components are ``u_i`` plus random terms of degree 2 to
    ``max_degree``; the rest are random polynomials of degree 1 to
    ``max_degree`` without constant term.  Coefficients are uniform in
    [-1, 1], rounded to six decimals so that spec files store them exactly.
    """
    if n < 1 or m < n or max_degree < 1:
        raise ValueError(f"invalid random immersion shape n={n}, m={m}, degree={max_degree}")
    rng = np.random.default_rng(seed)
    texts = [_poly_text(rng, n, range(2, max_degree + 1), f"u{i + 1}") for i in range(n)]
    texts += [_poly_text(rng, n, range(1, max_degree + 1), None) for _ in range(m - n)]
    return Immersion.from_strings(texts, n, name=f"random_n{n}_m{m}_d{max_degree}_s{seed}")


def random_corpus(count: int, seed: int) -> list[tuple[Immersion, np.ndarray, int]]:
    """``count`` seeded cases (immersion, base point, max order).

    Shapes are drawn with n <= 3, m <= 15, degree <= 4 and order <= 3; the
    base point is the origin.
    """
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(count):
        n = int(rng.integers(1, 4))
        m = int(rng.integers(n, 16))
        degree = int(rng.integers(1, 5))
        order = int(rng.integers(1, 4))
        sub = int(rng.integers(0, 2**31 - 1))
        cases.append((random_polynomial_immersion(n, m, degree, sub), np.zeros(n), order))
    return cases


def _linear_expr(row: Sequence[float]) -> Expr:
    node = None
    for j, q in enumerate(row):
        if q == 0.0:
            continue
        term = Var(j + 1) if abs(q) == 1.0 else BinOp("*", Num(abs(q)), Var(j + 1))
        if node is None:
            node = Neg(term) if q < 0 else term
        else:
            node = BinOp("-" if q < 0 else "+", node, term)
    return node if node is not None else Num(0.0)


def reparametrize(im: Immersion, Q) -> Immersion:
    """The immersion ``v -> f(Q v)`` for an invertible ``n x n`` matrix ``Q``."""
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (im.dim_domain, im.dim_domain):
        raise ValueError(f"Q must be {im.dim_domain}x{im.dim_domain}")
    repl = [_linear_expr(Q[i]) for i in range(im.dim_domain)]
    return Immersion(im.dim_domain, tuple(substitute(c, repl) for c in im.components), im.name)


def save_spec(im: Immersion, base_point=None, max_order: int | None = None) -> str:
    """Serialize to the spec-file format read by :func:`load_spec`."""
    lines = [f"name = {im.name}", f"dim_domain = {im.dim_domain}", "components = ["]
    texts = im.texts()
    for i, t in enumerate(texts):
        lines.append(f"  {json.dumps(t)}" + ("," if i < len(texts) - 1 else ""))
    lines.append("]")
    if base_point is not None:
        pt = [float(x) for x in np.asarray(base_point, dtype=float).reshape(-1)]
        lines.append(f"base_point = {json.dumps(pt)}")
    if max_order is not None:
        lines.append(f"max_order = {int(max_order)}")
    return "\n".join(lines) + "\n"


_KEYS = ("name", "dim_domain", "components", "base_point", "max_order")


def _logical_lines(text: str):
    # joins a bracketed value continued over several physical lines
    pending, start = None, 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if pending is not None:
            pending += " " + line
            if pending.count("[") <= pending.count("]"):
                yield start, pending
                pending = None
            continue
        if not line or line.startswith("#"):
            continue
        if line.count("[") > line.count("]"):
            pending, start = line, lineno
            continue
        yield lineno, line
    if pending is not None:
        raise SpecError("unterminated list", start)


def load_spec(source) -> tuple[Immersion, np.ndarray, int]:
    """Read a spec from a path or from spec text.

    Returns the immersion, the base point (default: origin) and the maximal
    curvature order (default: 2).
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and "=" not in source):
        text = Path(source).read_text()
    else:
        text = source
    values: dict[str, tuple[int, str]] = {}
    for lineno, line in _logical_lines(text):
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise SpecError(f"expected 'key = value', got {line!r}", lineno)
        if key not in _KEYS:
            raise SpecError(f"unknown key {key!r}", lineno)
        if key in values:
            raise SpecError(f"duplicate key {key!r}", lineno)
        values[key] = (lineno, value.strip())

    for required in ("dim_domain", "components"):
        if required not in values:
            raise SpecError(f"missing required key {required!r}")

    def parse_json(key):
        lineno, raw = values[key]
        try:
            return json.loads(raw), lineno
        except json.JSONDecodeError as exc:
            raise SpecError(f"bad value for {key}: {exc.msg}", lineno) from None

    n, lineno = parse_json("dim_domain")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SpecError("dim_domain must be a positive integer", lineno)
    comps, lineno = parse_json("components")
    if not isinstance(comps, list) or not comps or not all(isinstance(c, str) for c in comps):
        raise SpecError("components must be a non-empty list of strings", lineno)
    if len(comps) < n:
        raise SpecError(f"{len(comps)} components cannot immerse a {n}-dimensional domain", lineno)
    exprs = []
    for i, c in enumerate(comps):
        try:
            exprs.append(parse_expression(c, n))
        except ValueError as exc:
            raise SpecError(f"component {i + 1}: {exc}", lineno) from None

    name = "immersion"
    if "name" in values:
        raw = values["name"][1]
        name = json.loads(raw) if raw.startswith('"') else raw

    point = np.zeros(n)
    if "base_point" in values:
        pt, lineno = parse_json("base_point")
        if not isinstance(pt, list) or len(pt) != n or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in pt
        ):
            raise SpecError(f"base_point must be a list of {n} numbers", lineno)
        point = np.array(pt, dtype=float)

    max_order = DEFAULT_MAX_ORDER
    if "max_order" in values:
        max_order, lineno = parse_json("max_order")
        if not isinstance(max_order, int) or isinstance(max_order, bool) or max_order < 1:
            raise SpecError("max_order must be a positive integer", lineno)

    return Immersion(n, tuple(exprs), name), point, max_order


def _gallery_dir():
    return resources.files("osculant") / "gallery"


def gallery_names() -> list[str]:
    return sorted(p.name[: -len(".spec")] for p in _gallery_dir().iterdir() if p.name.endswith(".spec"))


def gallery() -> list[tuple[Immersion, np.ndarray, int]]:
    """All bundled spec files, sorted by name."""
    return [load_spec((_gallery_dir() / f"{name}.spec").read_text()) for name in gallery_names()]


def save_gallery(directory) -> list[Path]:
    """Copy the bundled gallery spec files into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in gallery_names():
        target = directory / f"{name}.spec"
        target.write_text((_gallery_dir() / f"{name}.spec").read_text())
        written.append(target)
    return written
