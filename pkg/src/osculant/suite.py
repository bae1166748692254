"""Batch verification of the curvature invariants over a corpus of immersions."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .curvature import analyze, verify_frame_invariance
from .immersion import Immersion, gallery, random_corpus
from .linalg import RankTolerance, _as_tol

__all__ = ["CaseResult", "THRESHOLDS", "format_table", "run_case", "run_suite", "suite_cases"]

#: Pass thresholds for the residual checks.
THRESHOLDS = {
    "psd": 1e-10,
    "symmetry": 1e-8,
    "eigen_span": 1e-7,
    "frame_invariance": 1e-6,
}


@dataclass
class CaseResult:
    name: str
    n: int
    m: int
    max_order: int
    ranks: list[int] = field(default_factory=list)
    dims: list[int] = field(default_factory=list)
    oracle_dims: list[int] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)
    residuals: dict[str, float] = field(default_factory=dict)
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(self.checks.values())

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "m": self.m,
            "max_order": self.max_order,
            "ranks": self.ranks,
            "dims": self.dims,
            "oracle_dims": self.oracle_dims,
            "checks": dict(self.checks),
            "residuals": dict(self.residuals),
            "error": self.error,
            "passed": self.passed,
        }


def suite_cases(suite: str, count: int = 200, seed: int = 7):
    if suite == "gallery":
        return gallery()
    if suite == "random":
        return random_corpus(count, seed)
    raise ValueError(f"unknown suite {suite!r}")


def run_case(im: Immersion, point, R: int, tol: RankTolerance, seeds) -> CaseResult:
    """Analyze one immersion and evaluate every invariant check."""
    res = CaseResult(im.name, im.dim_domain, im.dim_ambient, R)
    try:
        rep = analyze(im, point, R, tol)
        inv = max(
            (verify_frame_invariance(im, point, R, s, tol, report=rep) for s in seeds),
            default=0.0,
        )
    except (ValueError, ArithmeticError) as exc:
        res.error = f"{type(exc).__name__}: {exc}"
        return res
    res.ranks = rep.ranks
    res.dims = list(rep.dims)
    res.oracle_dims = list(rep.oracle_dims)
    psd = max(
        (-lv.min_eigenvalue / max(1.0, float(np.abs(lv.matrix_P).max(initial=0.0))) for lv in rep.levels),
        default=0.0,
    )
    span = max(rep.span_check_residuals, default=0.0)
    res.residuals = {
        "psd": max(psd, 0.0),
        "symmetry": rep.symmetry_residual,
        "eigen_span": span,
        "frame_invariance": inv,
    }
    res.checks = {
        "bound": rep.bound_satisfied,
        "naive_bound": rep.naive_bounds_satisfied,
        "oracle": rep.oracle_match,
        "well_conditioned": not rep.ill_conditioned,
    }
    for key, limit in THRESHOLDS.items():
        value = res.residuals[key]
        res.checks[key] = math.isfinite(value) and value <= limit
    return res


def run_suite(cases, tol=None, rotations: int = 1, seed: int = 0, jobs: int = 1) -> list[CaseResult]:
    """Run :func:`run_case` over ``cases``; results come back in input order.

    Case ``i`` uses rotation seeds ``seed + 1000 * i + j`` for
    ``j < rotations``.
    """
    tol = _as_tol(tol)
    cases = list(cases)

    def one(item):
        i, (im, point, R) = item
        seeds = [seed + 1000 * i + j for j in range(rotations)]
        return run_case(im, point, R, tol, seeds)

    if jobs <= 1:
        return [one(item) for item in enumerate(cases)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, enumerate(cases)))


_COLUMNS = ("bound", "naive_bound", "oracle", "well_conditioned", "psd", "symmetry", "eigen_span", "frame_invariance")


def format_table(results: list[CaseResult]) -> str:
    """Fixed-width summary table, one row per case plus a totals line."""
    head = f"{'#':>4}  {'name':<28} {'n':>2} {'m':>3} {'R':>2}  {'ranks':<16} {'sym':>9} {'span':>9} {'inv':>9}  status"
    lines = [head, "-" * len(head)]
    for i, r in enumerate(results):
        if r.error:
            lines.append(f"{i:>4}  {r.name:<28} {r.n:>2} {r.m:>3} {r.max_order:>2}  ERROR {r.error}")
            continue
        ranks = ",".join(str(k) for k in r.ranks)
        failed = [c for c in _COLUMNS if not r.checks.get(c, True)]
        status = "ok" if not failed else "FAIL " + ",".join(failed)
        lines.append(
            f"{i:>4}  {r.name:<28} {r.n:>2} {r.m:>3} {r.max_order:>2}  {ranks:<16} "
            f"{r.residuals['symmetry']:9.2e} {r.residuals['eigen_span']:9.2e} "
            f"{r.residuals['frame_invariance']:9.2e}  {status}"
        )
    passed = sum(r.passed for r in results)
    lines.append("-" * len(head))
    lines.append(f"{passed}/{len(results)} cases passed")
    return "\n".join(lines) + "\n"
