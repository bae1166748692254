"""Deterministic JSON and CSV serialization of analysis reports."""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from . import __version__
from .curvature import FlagReport

__all__ = ["dumps_json", "report_csv", "report_document"]


def _float(x: float) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def report_document(report: FlagReport) -> dict:
    """The report as plain Python data, in the fixed key order."""
    im = report.immersion
    levels = []
    for lv in report.levels:
        levels.append(
            {
                "order": lv.order,
                "rank_k": lv.rank_k,
                "bound": lv.bound,
                "curvatures": [_float(x) for x in lv.curvatures],
                "sqrt_curvatures": [_float(x) for x in lv.sqrt_curvatures],
                "normal_vectors": [[_float(x) for x in col] for col in lv.normal_vectors.T],
                "ill_conditioned": bool(lv.ill_conditioned),
            }
        )
    checks = {
        "symmetry_residual": _float(report.symmetry_residual),
        "eigen_span_residuals": [_float(x) for x in report.span_check_residuals],
    }
    if report.frame_invariance_residual is not None:
        checks["frame_invariance_residual"] = _float(report.frame_invariance_residual)
    checks["bound_satisfied"] = report.bound_satisfied
    checks["oracle_match"] = report.oracle_match
    return {
        "meta": {
            "name": im.name,
            "n": im.dim_domain,
            "m": im.dim_ambient,
            "base_point": [_float(x) for x in report.base_point],
            "max_order": report.max_order,
            "tolerance": report.tolerance.rel_tol,
            "tool_version": __version__,
        },
        "levels": levels,
        "dims": list(report.dims),
        "oracle_dims": list(report.oracle_dims),
        "checks": checks,
        "stop_reason": report.flag.stop_reason,
    }


def _scalar(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            return "null"
        text = format(float(x), ".17g")
        if not any(ch in text for ch in ".en"):
            text += ".0"
        return text
    if isinstance(x, str):
        return json.dumps(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats written to 17 significant digits.

    Lists of scalars stay on one line; dicts and nested lists are indented.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        items = [pad + dumps_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _scalar(obj)


CSV_HEADER = ["name", "order", "index", "rank_k", "bound", "curvature", "sqrt_curvature", "ill_conditioned"]


def report_csv(report: FlagReport) -> str:
    """One row per (order, eigenvalue)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for lv in report.levels:
        for i, (lam, root) in enumerate(zip(lv.curvatures, lv.sqrt_curvatures), start=1):
            writer.writerow(
                [
                    report.immersion.name,
                    lv.order,
                    i,
                    lv.rank_k,
                    lv.bound,
                    _scalar(float(lam)),
                    _scalar(float(root)),
                    "true" if lv.ill_conditioned else "false",
                ]
            )
    return buf.getvalue()
