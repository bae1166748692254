"""Small dense linear algebra over reals and over vector-valued jets.

Bases are stored as ``(m, k)`` arrays whose columns are orthonormal vectors
in R^m.  Jet frames are lists of :class:`~osculant.jet.Jet` objects with
component shape ``(m,)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .jet import Jet, jet_div, jet_dot, jet_mul, jet_sqrt, jet_truncate

__all__ = [
    "AsymmetryError",
    "JetFrame",
    "RankTolerance",
    "clamp_psd",
    "fix_signs",
    "mgs_pivoted",
    "mgs_pivoted_jets",
    "project_off",
    "project_onto",
    "rank_positive",
    "span_distance",
    "sym_eigen",
]

_TIE = 1e-12
_SIGN_EPS = 1e-8


class AsymmetryError(ValueError):
    pass


@dataclass(frozen=True)
class RankTolerance:
    """Relative threshold deciding which quantities count as nonzero."""

    rel_tol: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")


DEFAULT_TOL = RankTolerance()


def _as_tol(tol) -> RankTolerance:
    if tol is None:
        return DEFAULT_TOL
    if isinstance(tol, RankTolerance):
        return tol
    return RankTolerance(float(tol))


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    # first entry with |x| > 1e-8 is made positive, per column
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        big = np.flatnonzero(np.abs(col) > _SIGN_EPS)
        if big.size and col[big[0]] < 0:
            vectors[:, j] = -col
    return vectors


def sym_eigen(A, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    A : array_like, shape (k, k)
        Symmetric matrix.  Asymmetry up to ``1e-10 * ||A||_inf`` is tolerated
        and removed by symmetrizing.

    Returns
    -------
    eigenvalues : ndarray, shape (k,)
        Sorted descending.
    eigenvectors : ndarray, shape (k, k)
        Orthonormal columns; ``A @ V[:, i] == eigenvalues[i] * V[:, i]``.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    k = A.shape[0]
    if k == 0:
        return np.zeros(0), np.zeros((0, 0))
    norm_inf = np.abs(A).sum(axis=1).max()
    if np.abs(A - A.T).sum(axis=1).max() > 1e-10 * norm_inf:
        raise AsymmetryError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(k)
    target = 1e-14 * np.linalg.norm(A)

    for sweep in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.tril(A, -1) ** 2)) * 2.0)
        if off <= target:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = float(A[p, q])
                if apq == 0.0:
                    continue
                app, aqq = float(A[p, p]), float(A[q, q])
                small = 100.0 * abs(apq)
                if sweep > 3 and app + small == app and aqq + small == aqq:
                    # negligible against both diagonal entries
                    A[p, q] = A[q, p] = 0.0
                    continue
                theta = (aqq - app) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                # A <- J^T A J with J the (p, q) plane rotation
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq

    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], fix_signs(V[:, order])


def clamp_psd(eigenvalues, scale: float) -> np.ndarray:
    """Zero out slightly negative eigenvalues of a PSD matrix.

    Raises if some eigenvalue falls below ``-1e-10 * max(1, scale)``.
    """
    w = np.asarray(eigenvalues, dtype=float)
    if w.size and w.min() < -1e-10 * max(1.0, scale):
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w.min():.3e})")
    return np.where(w < 0.0, 0.0, w)


def rank_positive(eigenvalues, tol=None) -> int:
    """Count eigenvalues above ``rel_tol * max(eigenvalues[0], 0)``."""
    tol = _as_tol(tol)
    w = np.asarray(eigenvalues, dtype=float)
    if w.size == 0 or w[0] <= 0.0:
        return 0
    return int(np.count_nonzero(w > tol.rel_tol * w[0]))


def _pick(norms: np.ndarray, initial: np.ndarray, alive: np.ndarray, threshold: float) -> int:
    """Next pivot, or -1 when no live residual exceeds the threshold.

    Among acceptable columns the largest residual relative to the column's
    initial norm wins; ties within 1e-12 relative go to the lowest index.
    """
    ok = alive & (norms > threshold)
    if not ok.any():
        return -1
    score = np.where(ok, norms / np.where(initial > 0, initial, 1.0), -np.inf)
    best = score.max()
    return int(np.flatnonzero(score >= best * (1.0 - _TIE))[0])


def mgs_pivoted(columns, against=None, tol=None) -> tuple[np.ndarray, list[int]]:
    """Modified Gram-Schmidt with greedy column pivoting.

    A column is acceptable while its residual norm exceeds
    ``rel_tol * max(1, largest initial column norm)``; among acceptable
    columns the one with the largest residual relative to its own initial
    norm is taken next.

    Parameters
    ----------
    columns : array_like, shape (m, p)
        Candidate vectors as columns.
    against : array_like, shape (m, j), optional
        Orthonormal basis that the result must be orthogonal to.
    tol : RankTolerance or float, optional

    Returns
    -------
    basis : ndarray, shape (m, k)
        Orthonormal columns spanning the accepted residuals.
    pivots : list of int
        Indices of accepted columns, in acceptance order.
    """
    tol = _as_tol(tol)
    cols = np.array(columns, dtype=float)
    if cols.ndim == 1:
        cols = cols[:, None]
    m, p = cols.shape
    if against is None:
        against = np.zeros((m, 0))
    against = np.asarray(against, dtype=float).reshape(m, -1)
    if p == 0:
        return np.zeros((m, 0)), []

    initial = np.linalg.norm(cols, axis=0)
    threshold = tol.rel_tol * max(1.0, initial.max())
    for _ in range(2):
        cols -= against @ (against.T @ cols)

    basis: list[np.ndarray] = []
    pivots: list[int] = []
    alive = np.ones(p, dtype=bool)
    while alive.any():
        norms = np.linalg.norm(cols, axis=0)
        j = _pick(norms, initial, alive, threshold)
        if j < 0:
            break
        v = cols[:, j].copy()
        # second pass keeps the basis orthonormal when cancellation is heavy
        for b in basis:
            v -= (b @ v) * b
        v -= against @ (against.T @ v)
        v /= np.linalg.norm(v)
        basis.append(v)
        pivots.append(j)
        alive[j] = False
        cols -= np.outer(v, v @ cols)
    out = np.column_stack(basis) if basis else np.zeros((m, 0))
    return out, pivots


@dataclass
class JetFrame:
    """Result of :func:`mgs_pivoted_jets`.

    ``frame[i]`` is the orthonormalized field of column ``pivots[i]``, which
    belongs to block ``level_of[i]``.  ``accepted_norms`` and ``rejected_norms``
    record the base-point residuals behind each rank decision.
    """

    frame: list[Jet]
    pivots: list[int]
    level_of: list[int]
    threshold: float
    ambient_dim: int
    accepted_norms: list[float] = field(default_factory=list)
    rejected_norms: dict[int, float] = field(default_factory=dict)

    def fields(self, level: int) -> list[Jet]:
        return [f for f, lv in zip(self.frame, self.level_of) if lv == level]

    def values(self, level: int | None = None) -> np.ndarray:
        """Base-point values of the frame (or of one level) as columns."""
        fs = self.frame if level is None else self.fields(level)
        if not fs:
            return np.zeros((self.ambient_dim, 0))
        return np.column_stack([f.value for f in fs])

    def near_threshold(self, level: int, factor: float = 10.0) -> bool:
        """Whether any decision for ``level`` lies within ``factor`` of the threshold."""
        acc = [r for r, lv in zip(self.accepted_norms, self.level_of) if lv == level]
        if any(r < factor * self.threshold for r in acc):
            return True
        return self.rejected_norms.get(level, 0.0) > self.threshold / factor


def _subtract_projection(c: Jet, f: Jet) -> Jet:
    order = min(c.order, f.order)
    if c.order != order:
        c = jet_truncate(c, order)
    if f.order != order:
        f = jet_truncate(f, order)
    coef = jet_dot(c, f)
    return c - jet_mul(f, coef)


def mgs_pivoted_jets(columns: Sequence[Jet], tol=None, levels: Sequence[int] | None = None) -> JetFrame:
    """Pivoted Gram-Schmidt on vector-valued jets.

    Pivots and rank decisions are taken on the base-point values with the
    rule of :func:`mgs_pivoted`; the arithmetic itself runs on jets so the
    result is an orthonormal frame field near the point, up to truncation.

    Columns are processed block by block in increasing ``levels`` label, with
    greedy pivoting inside each block, so that accepted fields stay graded.
    Columns may carry different truncation orders; a field inherits the
    lowest order among the jets it was built from.
    """
    tol = _as_tol(tol)
    columns = list(columns)
    if levels is None:
        levels = [0] * len(columns)
    levels = list(levels)
    if len(levels) != len(columns):
        raise ValueError("levels must have one label per column")
    if not columns:
        return JetFrame([], [], [], tol.rel_tol, 0)
    m = columns[0].shape[0]
    for c in columns:
        if c.shape != (m,) or c.num_vars != columns[0].num_vars:
            raise ValueError("all columns must be vector jets of the same ambient dimension")

    initial = np.array([np.linalg.norm(c.value) for c in columns])
    threshold = tol.rel_tol * max(1.0, initial.max())
    result = JetFrame([], [], [], threshold, m)

    for level in sorted(set(levels)):
        idx = [i for i, lv in enumerate(levels) if lv == level]
        work = {}
        for i in idx:
            c = columns[i]
            for f in result.frame:
                c = _subtract_projection(c, f)
            work[i] = c
        alive = np.ones(len(idx), dtype=bool)
        while alive.any():
            norms = np.array([np.linalg.norm(work[i].value) for i in idx])
            j = _pick(norms, initial[idx], alive, threshold)
            if j < 0:
                break
            i = idx[j]
            v = work[i]
            for f in result.frame:
                v = _subtract_projection(v, f)
            v = jet_div(v, jet_sqrt(jet_dot(v, v)))
            result.frame.append(v)
            result.pivots.append(i)
            result.level_of.append(level)
            result.accepted_norms.append(float(norms[j]))
            alive[j] = False
            for jj, ii in enumerate(idx):
                if alive[jj]:
                    work[ii] = _subtract_projection(work[ii], v)
        if alive.any():
            rest = [np.linalg.norm(work[i].value) for jj, i in enumerate(idx) if alive[jj]]
            result.rejected_norms[level] = float(max(rest))
    return result


def project_onto(v, basis) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    basis = np.asarray(basis, dtype=float).reshape(v.shape[0], -1)
    return basis @ (basis.T @ v)


def project_off(v, basis) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v - project_onto(v, basis)


def span_distance(basis_a, basis_b) -> float:
    """Frobenius distance between the orthogonal projectors onto two spans."""
    a = np.asarray(basis_a, dtype=float)
    b = np.asarray(basis_b, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ValueError(f"ambient dimensions differ: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a @ a.T - b @ b.T))
