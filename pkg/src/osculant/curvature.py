"""Higher-order normal curvatures and the osculating flag of an immersion.

For an immersion ``f`` at a base point, the order-``r`` normal curvature
matrix is

    P^(r) = sum_{i, j} w_{ij} w_{ij}^T,
    w_{ij} = component of (grad_{Y_j} B_i) orthogonal to O_{r-1},

where ``Y_j`` is an orthonormal tangent frame, ``B_i`` runs over orthonormal
fields spanning the previous normal level (the tangent fields themselves for
``r = 1``) and ``O_{r-1}`` is the osculating space of order ``r - 1``.  The
vectors ``w`` are written in an orthonormal basis of the complement of
``O_{r-1}``, so ``P^(r)`` is a square matrix of size ``m - dim O_{r-1}``.
Its positive eigenvalues are the order-``r`` normal curvatures and the
matching eigenvectors, mapped back to R^m, the order-``r`` normal vectors.

The osculating space of order ``r`` is also the span of all partial
derivatives of ``f`` of order ``<= r + 1``; :func:`oracle_flag_dims`
computes its dimensions that way, without frames, and the report compares
both routes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .immersion import Immersion, eval_jet, reparametrize
from .jet import Jet, jet_extract_derivative, jet_partial, jet_truncate, multi_indices
from .linalg import (
    JetFrame,
    RankTolerance,
    _as_tol,
    clamp_psd,
    fix_signs,
    mgs_pivoted,
    mgs_pivoted_jets,
    rank_positive,
    span_distance,
    sym_eigen,
)

__all__ = [
    "BasePointFrame",
    "CurvatureLevel",
    "FlagReport",
    "NotAnImmersionError",
    "OsculatingFlag",
    "adapted_frame_fields",
    "analyze",
    "curvature_bound",
    "curvature_matrix",
    "derivative_fields",
    "oracle_flag_dims",
    "tangent_frame",
    "verify_eigen_span",
    "verify_frame_invariance",
    "verify_symmetry",
]

MAX_ORDER_REACHED = "max_order_reached"
RANK_ZERO = "rank_zero"
AMBIENT_EXHAUSTED = "ambient_exhausted"

# decision quantities within this factor of a threshold flag the level
_MARGIN = 10.0


class NotAnImmersionError(ValueError):
    """The Jacobian has rank < n at the base point."""


def curvature_bound(n: int, r: int) -> int:
    """Upper bound C(n + r, r + 1) on the rank of the order-r curvature matrix."""
    return math.comb(n + r, r + 1)


@dataclass
class BasePointFrame:
    """Orthonormal tangent frame at the base point.

    ``tangent`` holds ``Y_1 .. Y_n`` as columns, ``tangent_fields`` the same
    frame as jet fields, and ``coeffs_c[j, a]`` expresses
    ``Y_j = sum_a c[j, a] * d_a f`` at the point.
    """

    tangent: np.ndarray
    tangent_fields: list[Jet]
    coeffs_c: np.ndarray


@dataclass
class CurvatureLevel:
    order: int
    matrix_P: np.ndarray
    eigenvalues: np.ndarray
    curvatures: np.ndarray
    normal_vectors: np.ndarray
    rank_k: int
    bound: int
    min_eigenvalue: float = 0.0
    ill_conditioned: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def sqrt_curvatures(self) -> np.ndarray:
        return np.sqrt(self.curvatures)


@dataclass
class OsculatingFlag:
    levels: list[CurvatureLevel]
    dims: list[int]
    stop_reason: str


@dataclass
class FlagReport:
    """Everything :func:`analyze` computes for one immersion and base point."""

    immersion: Immersion
    base_point: np.ndarray
    max_order: int
    tolerance: RankTolerance
    flag: OsculatingFlag
    oracle_dims: list[int]
    span_check_residuals: list[float]
    symmetry_residual: float
    frame_invariance_residual: float | None = None

    @property
    def levels(self) -> list[CurvatureLevel]:
        return self.flag.levels

    @property
    def dims(self) -> list[int]:
        return self.flag.dims

    @property
    def ranks(self) -> list[int]:
        return [lv.rank_k for lv in self.flag.levels]

    @property
    def bound_satisfied(self) -> bool:
        return all(lv.rank_k <= lv.bound for lv in self.flag.levels)

    @property
    def naive_bounds_satisfied(self) -> bool:
        """The weaker bounds k_1 <= n^2 and k_{r+1} <= n * k_r."""
        n = self.immersion.dim_domain
        ks = self.ranks
        if ks and ks[0] > n * n:
            return False
        return all(b <= n * a for a, b in zip(ks, ks[1:]))

    @property
    def oracle_match(self) -> bool:
        return self.flag.dims == self.oracle_dims

    @property
    def ill_conditioned(self) -> bool:
        return any(lv.ill_conditioned for lv in self.flag.levels)


def derivative_fields(jets: Jet, degree: int) -> list[tuple[tuple[int, ...], Jet]]:
    """Jets of all partial derivatives of ``f`` of exactly ``degree``.

    The field for ``d^alpha f`` carries order ``jets.order - degree``.
    """
    n = jets.num_vars
    out = []
    for alpha in multi_indices(n, degree):
        if sum(alpha) != degree:
            continue
        g = jets
        for var, e in enumerate(alpha):
            for _ in range(e):
                g = jet_partial(g, var)
        out.append((alpha, g))
    return out


def _coeffs_c(frame_values: np.ndarray, jacobian: np.ndarray) -> np.ndarray:
    sol, *_ = np.linalg.lstsq(jacobian, frame_values, rcond=None)
    c = sol.T
    if np.abs(jacobian @ c.T - frame_values).max() > 1e-10 * max(1.0, np.abs(frame_values).max()):
        raise NotAnImmersionError("tangent frame is not in the span of the Jacobian")
    return c


def tangent_frame(jets: Jet, tol=None) -> BasePointFrame:
    """Orthonormal tangent frame fields from the first partials of ``f``."""
    if jets.order < 1:
        raise ValueError("tangent frame needs jets of order >= 1")
    tol = _as_tol(tol)
    cols = [g for _, g in derivative_fields(jets, 1)]
    frame = mgs_pivoted_jets(cols, tol)
    n = jets.num_vars
    if len(frame.frame) < n:
        raise NotAnImmersionError(
            f"Jacobian has rank {len(frame.frame)} < {n} at the base point"
        )
    Y = frame.values()
    J = np.column_stack([g.value for g in cols])
    return BasePointFrame(Y, frame.frame, _coeffs_c(Y, J))


def adapted_frame_fields(jets: Jet, tol=None, max_order: int | None = None) -> tuple[JetFrame, BasePointFrame]:
    """Graded orthonormal frame fields along the immersion.

    Level 0 holds the tangent fields; level ``l >= 1`` holds the fields that
    the degree ``l + 1`` partial derivatives add to the previous levels.
    Jets of order ``R + 1`` give levels ``0 .. R``, level ``l`` fields having
    truncation order ``R - l``.
    """
    tol = _as_tol(tol)
    R = jets.order - 1 if max_order is None else max_order
    if jets.order < R + 1:
        raise ValueError(f"max order {R} needs jets of order {R + 1}, got {jets.order}")
    cols, levels = [], []
    for d in range(1, R + 2):
        for _, g in derivative_fields(jets, d):
            cols.append(g)
            levels.append(d - 1)
    frame = mgs_pivoted_jets(cols, tol, levels)
    n = jets.num_vars
    tangent = frame.fields(0)
    if len(tangent) < n:
        raise NotAnImmersionError(f"Jacobian has rank {len(tangent)} < {n} at the base point")
    Y = frame.values(0)
    J = np.column_stack([g.value for g in cols[:n]])
    return frame, BasePointFrame(Y, tangent, _coeffs_c(Y, J))


def _covariant_derivatives(fields: list[Jet], c: np.ndarray) -> np.ndarray:
    """Columns grad_{Y_j} B at the point, for every field B and direction j."""
    n = c.shape[0]
    out = []
    for B in fields:
        if B.order < 1:
            raise ValueError("frame field has no first-order information left (order 0)")
        first = B.coeffs[:, 1 : 1 + n]  # d_a B at the point
        for j in range(n):
            out.append(first @ c[j])
    if not out:
        return np.zeros((fields[0].shape[0] if fields else 0, 0))
    return np.column_stack(out)


def _complement(basis: np.ndarray, m: int) -> np.ndarray:
    d = basis.shape[1]
    if d == 0:
        return np.eye(m)
    _, _, vt = np.linalg.svd(basis.T, full_matrices=True)
    return vt[d:].T


def curvature_matrix(
    level: int,
    frame: JetFrame,
    base: BasePointFrame,
    osculating_basis: np.ndarray,
    tol=None,
) -> CurvatureLevel:
    """Normal curvature data of order ``level + 1``.

    Parameters
    ----------
    level : int
        Index ``l`` of the frame level being differentiated (0 = tangent).
    frame : JetFrame
        Output of :func:`adapted_frame_fields`.
    base : BasePointFrame
    osculating_basis : ndarray, shape (m, d_l)
        Orthonormal basis of the osculating space ``O_l`` at the point.
    """
    tol = _as_tol(tol)
    order = level + 1
    n = base.coeffs_c.shape[0]
    m = frame.ambient_dim
    bound = curvature_bound(n, order)
    comp = _complement(osculating_basis, m)
    s = comp.shape[1]
    if s == 0:
        return CurvatureLevel(
            order, np.zeros((0, 0)), np.zeros(0), np.zeros(0), np.zeros((m, 0)), 0, bound,
            notes=["osculating space already fills the ambient space"],
        )
    fields = base.tangent_fields if level == 0 else frame.fields(level)
    D = _covariant_derivatives(fields, base.coeffs_c)
    if D.shape[1] == 0:
        return CurvatureLevel(
            order, np.zeros((s, s)), np.zeros(s), np.zeros(0), np.zeros((m, 0)), 0, bound
        )
    W = comp.T @ D
    P = W @ W.T
    raw, V = sym_eigen(P)
    size = float(np.abs(P).sum(axis=1).max())
    w = clamp_psd(raw, size)

    # below this the residuals are cancellation noise, not curvature
    floor = (tol.rel_tol * max(1.0, float(np.linalg.norm(D, axis=0).max()))) ** 2
    k = 0 if w[0] <= floor else rank_positive(w, tol)

    notes = []
    ill = False
    if w[0] > 0 and floor / _MARGIN < w[0] <= floor * _MARGIN:
        ill = True
        notes.append("largest eigenvalue is close to the noise floor")
    if w[0] > floor:
        ratio = w / w[0]
        cut = tol.rel_tol
        if np.any((ratio > cut / _MARGIN) & (ratio <= cut * _MARGIN)):
            ill = True
            notes.append("an eigenvalue ratio is close to the rank tolerance")
    if order in frame.level_of or order in frame.rejected_norms:
        if frame.near_threshold(order, _MARGIN):
            ill = True
            notes.append("a frame pivot decision is close to the rank tolerance")
        if len(frame.fields(order)) != k:
            ill = True
            notes.append(
                f"frame level {order} has {len(frame.fields(order))} fields but rank is {k}"
            )

    return CurvatureLevel(
        order=order,
        matrix_P=P,
        eigenvalues=w,
        curvatures=w[:k].copy(),
        normal_vectors=fix_signs(comp @ V[:, :k]),
        rank_k=k,
        bound=bound,
        min_eigenvalue=float(raw.min()),
        ill_conditioned=ill,
        notes=notes,
    )


def _flag(jets: Jet, R: int, tol: RankTolerance) -> tuple[OsculatingFlag, list[np.ndarray]]:
    frame, base = adapted_frame_fields(jets, tol, R)
    n = jets.num_vars
    m = frame.ambient_dim
    basis = base.tangent
    bases = [basis]
    levels: list[CurvatureLevel] = []
    dims = [n]
    stop = MAX_ORDER_REACHED
    for level in range(R):
        cur = curvature_matrix(level, frame, base, basis, tol)
        levels.append(cur)
        dims.append(dims[-1] + cur.rank_k)
        if dims[-2] == m:
            stop = AMBIENT_EXHAUSTED
            break
        if cur.rank_k == 0:
            stop = RANK_ZERO
            break
        basis = np.hstack([basis, cur.normal_vectors])
        bases.append(basis)
    return OsculatingFlag(levels, dims, stop), bases


def oracle_flag_dims(im: Immersion, point, R: int, tol=None) -> list[int]:
    """Dimensions of the osculating spaces from raw partial derivatives.

    ``d_r`` is the numerical rank of all partials ``d^alpha f`` with
    ``1 <= |alpha| <= r + 1`` at the point, for ``r = 0 .. R``.  No frame
    fields or curvature matrices are involved.
    """
    return _oracle_dims(eval_jet(im, point, R + 1), R, _as_tol(tol))


def _oracle_dims(jets: Jet, R: int, tol: RankTolerance) -> list[int]:
    n = jets.num_vars
    alphas = [a for a in multi_indices(n, R + 1) if sum(a) >= 1]
    dims = []
    for r in range(R + 1):
        cols = np.column_stack(
            [jet_extract_derivative(jets, a) for a in alphas if sum(a) <= r + 1]
        )
        basis, _ = mgs_pivoted(cols, tol=tol)
        dims.append(basis.shape[1])
    return dims


def _eigen_span_residual(jets: Jet, order: int, prev_basis: np.ndarray, normals: np.ndarray, tol) -> float:
    n = jets.num_vars
    alphas = [a for a in multi_indices(n, order + 1) if sum(a) == order + 1]
    cols = np.column_stack([jet_extract_derivative(jets, a) for a in alphas])
    proj, _ = mgs_pivoted(cols, against=prev_basis, tol=tol)
    return span_distance(normals, proj)


def verify_eigen_span(report: FlagReport, order: int) -> float:
    """Projector distance between the order-``r`` normal vectors and the
    projections of the order ``r + 1`` partials off ``O_{r-1}``."""
    levels = report.flag.levels
    if not 1 <= order <= len(levels):
        raise ValueError(f"order {order} was not computed")
    jets = eval_jet(report.immersion, report.base_point, order + 1)
    frame = tangent_frame(jets, report.tolerance)
    prev = np.hstack([frame.tangent] + [lv.normal_vectors for lv in levels[: order - 1]])
    return _eigen_span_residual(jets, order, prev, levels[order - 1].normal_vectors, report.tolerance)


def _normal_basis(tangent: np.ndarray) -> np.ndarray:
    return _complement(tangent, tangent.shape[0])


def verify_symmetry(im: Immersion, point, tol=None) -> float:
    """Scaled asymmetry of the second fundamental form computed from frame fields.

    With ``h[a, i, j] = N_a . grad_{Y_j} Y_i`` taken from the orthonormalized
    tangent fields, returns the largest of ``|h[a, i, j] - h[a, j, i]|`` and
    of the disagreement with ``N_a . sum c_ia c_jb d_a d_b f``, divided by
    ``max(1, max |h|)``.
    """
    return _symmetry_residual(eval_jet(im, point, 2), _as_tol(tol))


def _symmetry_residual(jets: Jet, tol: RankTolerance) -> float:
    if jets.order > 2:
        jets = jet_truncate(jets, 2)
    base = tangent_frame(jets, tol)
    N = _normal_basis(base.tangent)
    n = jets.num_vars
    c = base.coeffs_c
    if N.shape[1] == 0:
        return 0.0
    # grad[i][:, j] = grad_{Y_j} Y_i
    grad = [
        np.column_stack([Y.coeffs[:, 1 : 1 + n] @ c[j] for j in range(n)])
        for Y in base.tangent_fields
    ]
    h = np.einsum("ma,imj->aij", N, np.stack(grad))
    hess = np.empty((jets.shape[0], n, n))
    for a in range(n):
        for b in range(n):
            alpha = [0] * n
            alpha[a] += 1
            alpha[b] += 1
            hess[:, a, b] = jet_extract_derivative(jets, alpha)
    h_direct = np.einsum("ma,mpq,ip,jq->aij", N, hess, c, c)
    scale = max(1.0, float(np.abs(h).max()))
    asym = float(np.abs(h - h.transpose(0, 2, 1)).max())
    agree = float(np.abs(h - h_direct).max())
    return max(asym, agree) / scale


def random_rotation(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


def _spectrum_distance(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        return math.inf
    if a.size == 0:
        return 0.0
    return float(np.abs(a - b).max() / max(abs(a[0]), abs(b[0]), 1e-300))


def verify_frame_invariance(im: Immersion, point, R: int, seed: int, tol=None, report=None) -> float:
    """Largest change in spectra or normal spans under a random domain rotation.

    The immersion is re-parametrized as ``v -> f(Q v)`` with a seeded random
    orthogonal ``Q`` and analyzed at ``Q^T p``; ranks must agree and the
    spectra (relative sup distance) and normal spans (projector distance)
    are compared order by order.
    """
    tol = _as_tol(tol)
    point = np.asarray(point, dtype=float)
    if report is None:
        report = analyze(im, point, R, tol, checks=False)
    Q = random_rotation(im.dim_domain, seed)
    other = analyze(reparametrize(im, Q), Q.T @ point, R, tol, checks=False)
    if report.dims != other.dims:
        return math.inf
    worst = 0.0
    for a, b in zip(report.levels, other.levels):
        worst = max(worst, _spectrum_distance(a.curvatures, b.curvatures))
        worst = max(worst, span_distance(a.normal_vectors, b.normal_vectors))
    return worst


def analyze(
    im: Immersion,
    point,
    max_order: int,
    tol=None,
    *,
    checks: bool = True,
    invariance_seed: int | None = None,
) -> FlagReport:
    """Normal curvatures of orders ``1 .. max_order`` and the osculating flag.

    Stops early when a curvature matrix has rank zero or when the osculating
    space already fills R^m.  With ``checks`` the report also carries the
    derivative-oracle dimensions, the eigen-span and symmetry residuals, and
    (given ``invariance_seed``) the frame-invariance residual.
    """
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    tol = _as_tol(tol)
    point = np.asarray(point, dtype=float).reshape(-1)
    jets = eval_jet(im, point, max_order + 1)
    flag, bases = _flag(jets, max_order, tol)
    report = FlagReport(im, point, max_order, tol, flag, [], [], 0.0)
    if not checks:
        return report
    computed = len(flag.levels)
    # levels stop at max_order, so the analysis jets already cover the oracle
    report.oracle_dims = _oracle_dims(jet_truncate(jets, computed + 1), computed, tol)[: len(flag.dims)]
    residuals = []
    for lv in flag.levels:
        prev = np.hstack(
            [bases[0]] + [x.normal_vectors for x in flag.levels[: lv.order - 1]]
        )
        residuals.append(_eigen_span_residual(jets, lv.order, prev, lv.normal_vectors, tol))
    report.span_check_residuals = residuals
    report.symmetry_residual = _symmetry_residual(jets, tol)
    if invariance_seed is not None:
        report.frame_invariance_residual = verify_frame_invariance(
            im, point, max_order, invariance_seed, tol, report=report
        )
    return report
