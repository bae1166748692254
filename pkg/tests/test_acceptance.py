"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line; the lines are repeated
in the pytest terminal summary (see ``conftest.py``).  Run directly with
``python3 tests/test_acceptance.py`` to get just the nine lines.
"""

import math
import subprocess
import sys
from functools import lru_cache

import numpy as np

from osculant.curvature import analyze, oracle_flag_dims, verify_frame_invariance, verify_symmetry
from osculant.immersion import Immersion, eval_jet, evaluate, extremal_example, gallery, random_corpus
from osculant.jet import Jet, jet_div, jet_extract_derivative, jet_mul, jet_sqrt, multi_indices, num_coeffs
from osculant.linalg import RankTolerance

TOL = RankTolerance(1e-8)
RESULTS: dict[int, str] = {}


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})"
    RESULTS[number] = line
    print(line)
    assert ok, line


@lru_cache(maxsize=None)
def corpus():
    """Gallery plus 200 seeded random polynomial immersions, with reports."""
    cases = list(gallery()) + random_corpus(200, 7)
    return [(im, point, R, analyze(im, point, R, TOL)) for im, point, R in cases]


# ---------------------------------------------------------------- 1


def test_criterion_1_extremal_sharpness():
    bad = []
    for n, r in [(1, 1), (1, 3), (2, 1), (2, 2), (3, 2)]:
        im = extremal_example(n, r)
        rep = analyze(im, np.zeros(n), r, TOL)
        want = [math.comb(n + d, d + 1) for d in range(1, r + 1)]
        oracle = oracle_flag_dims(im, np.zeros(n), r, TOL)
        if rep.ranks != want or rep.dims != oracle[: len(rep.dims)] or len(rep.dims) != r + 1:
            bad.append((n, r, rep.ranks, want))
    record(1, "extremal sharpness", not bad, f"5 cases, mismatches {bad}")


# ---------------------------------------------------------------- 2


def test_criterion_2_rank_bounds():
    violations = 0
    for im, _, _, rep in corpus():
        n = im.dim_domain
        ks = rep.ranks
        violations += sum(k > math.comb(n + r, r + 1) for r, k in enumerate(ks, start=1))
        violations += sum(b > n * a for a, b in zip(ks, ks[1:]))
        violations += bool(ks) and ks[0] > n * n
    record(2, "rank bounds", violations == 0, f"{len(corpus())} immersions, {violations} violations")


# ---------------------------------------------------------------- 3


def test_criterion_3_oracle_equivalence():
    mismatched = [im.name for im, _, _, rep in corpus() if rep.dims != rep.oracle_dims or not rep.dims]
    record(3, "oracle equivalence", not mismatched, f"{len(corpus())} immersions, mismatches {mismatched[:5]}")


# ---------------------------------------------------------------- 4


def test_criterion_4_eigen_span():
    worst = 0.0
    for im, point, R in gallery():
        rep = analyze(im, point, R, TOL)
        worst = max([worst, *rep.span_check_residuals])
    # residuals are projector distances between orthonormal bases: scale 0
    record(4, "eigen-span equality", worst <= 1e-7, f"max residual {worst:.2e}")


# ---------------------------------------------------------------- 5


def _first_curvatures(im, point, R):
    rep = analyze(im, point, R, TOL)
    return [lv.curvatures[0] if lv.rank_k else 0.0 for lv in rep.levels]


def test_criterion_5_classical_curvatures():
    errors = []
    for rho in (0.5, 1.0, 2.0):
        im = Immersion.from_strings([f"{rho!r}*cos(u1)", f"{rho!r}*sin(u1)"], 1)
        lam = _first_curvatures(im, [0.3], 1)[0]
        errors.append(("circle", rho, abs(lam - 1 / rho**2) / (1 / rho**2), 1e-9))
    sphere = Immersion.from_strings(["cos(u1)*cos(u2)", "cos(u1)*sin(u2)", "sin(u1)"], 2)
    lam = _first_curvatures(sphere, [0.3, 0.2], 1)[0]
    errors.append(("sphere", 1.0, abs(lam - 2.0) / 2.0, 1e-9))
    for a, b in [(1.0, 1.0), (2.0, 1.0)]:
        im = Immersion.from_strings([f"{a!r}*cos(u1)", f"{a!r}*sin(u1)", f"{b!r}*u1"], 1)
        kappa, tau = a / (a * a + b * b), b / (a * a + b * b)
        l1, l2 = _first_curvatures(im, [0.0], 2)
        errors.append(("helix k", (a, b), abs(l1 - kappa**2) / kappa**2, 1e-8))
        errors.append(("helix t", (a, b), abs(l2 - tau**2) / tau**2, 1e-8))
    failing = [e for e in errors if not e[2] <= e[3]]
    worst = max(e[2] for e in errors)
    record(5, "classical curvatures", not failing, f"{len(errors)} values, worst rel error {worst:.2e}")


# ---------------------------------------------------------------- 6


def test_criterion_6_symmetry():
    worst = max(verify_symmetry(im, point, TOL) for im, point, _, _ in corpus())
    record(6, "symmetry", worst <= 1e-8, f"max scaled residual {worst:.2e}")


# ---------------------------------------------------------------- 7


def test_criterion_7_frame_invariance():
    worst, count = 0.0, 0
    for im, point, R in gallery():
        rep = analyze(im, point, R, TOL, checks=False)
        for seed in range(20):
            worst = max(worst, verify_frame_invariance(im, point, R, seed, TOL, report=rep))
            count += 1
    record(7, "frame invariance", worst <= 1e-6, f"{count} rotations, max residual {worst:.2e}")


# ---------------------------------------------------------------- 8


def _finite_difference(im, point, alpha, h=1e-4):
    idx = [i for i, e in enumerate(alpha) for _ in range(e)]
    E = np.eye(len(point)) * h
    if len(idx) == 1:
        i = idx[0]
        return (evaluate(im, point + E[i]) - evaluate(im, point - E[i])) / (2 * h)
    i, j = idx
    return (
        evaluate(im, point + E[i] + E[j])
        - evaluate(im, point + E[i] - E[j])
        - evaluate(im, point - E[i] + E[j])
        + evaluate(im, point - E[i] - E[j])
    ) / (4 * h * h)


def test_criterion_8_jet_kernel():
    fd_worst = 0.0
    for im, point, _ in gallery():
        jets = eval_jet(im, point, 2)
        for alpha in multi_indices(im.dim_domain, 2):
            if sum(alpha) == 0:
                continue
            exact = jet_extract_derivative(jets, alpha)
            approx = _finite_difference(im, np.asarray(point, dtype=float), alpha)
            err = np.abs(exact - approx) / np.maximum(1.0, np.abs(exact))
            fd_worst = max(fd_worst, float(err.max()))

    rng = np.random.default_rng(2024)
    trip_worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 4))
        R = int(rng.integers(0, 5))
        N = num_coeffs(n, R)
        ca, cb = rng.uniform(-1, 1, N), rng.uniform(-1, 1, N)
        ca[0], cb[0] = rng.uniform(0.5, 2.0, 2)
        a, b = Jet(n, R, ca), Jet(n, R, cb)
        q = jet_mul(jet_div(a, b), b)
        s = jet_sqrt(a)
        scale = max(1.0, float(np.abs(ca).max()))
        trip_worst = max(
            trip_worst,
            float(np.abs(q.coeffs - ca).max()) / scale,
            float(np.abs(jet_mul(s, s).coeffs - ca).max()) / scale,
        )
    ok = fd_worst <= 1e-5 and trip_worst <= 1e-10
    record(8, "jet kernel", ok, f"finite differences {fd_worst:.2e}, round trips {trip_worst:.2e}")


# ---------------------------------------------------------------- 9


def test_criterion_9_determinism(tmp_path):
    argv = [sys.executable, "-m", "osculant", "verify", "--suite", "random", "--count", "200", "--seed", "7"]
    runs = []
    for tag in ("a", "b"):
        out = tmp_path / f"{tag}.json"
        runs.append((subprocess.Popen(argv + ["--out", str(out)], stdout=subprocess.PIPE), out))
    texts = []
    for proc, out in runs:
        stdout, _ = proc.communicate()
        texts.append((proc.returncode, stdout, out.read_bytes()))
    same = texts[0] == texts[1]
    record(9, "determinism", same and texts[0][0] == 0, f"stdout and JSON identical: {same}, exit {texts[0][0]}")


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    failures = 0
    for name, fn in sorted(globals().items()):
        if not name.startswith("test_criterion_"):
            continue
        try:
            if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as d:
                    fn(Path(d))
            else:
                fn()
        except AssertionError:
            failures += 1
    sys.exit(1 if failures else 0)
