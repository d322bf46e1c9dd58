"""Acceptance suite: one pass/fail line per criterion.

Run with pytest (the lines are collected in the terminal summary) or as a script.
"""
import subprocess
import sys
import time
from dataclasses import replace
from math import asin, pi, sqrt
from pathlib import Path

import numpy as np
import pytest

from cochord.bounds_inequalities import (brunn_minkowski_check, inscribed_ball_lower_bound, j_norm_upper_bound,
                                         k_monotonicity_check, sandwich_check, viterbo_ratio)
from cochord.chord_flow import ball_chord, capacity_family, neduv_return_time, return_spectrum
from cochord.closed_forms import (box_capacity, cube_cross, ellipse_disc_example, ellipsoid_capacity,
                                  example_bodies_catalog, offcenter_ball_capacity)
from cochord.convex_bodies import Ball, Box, Ellipsoid, Polydisc, Scale
from cochord.dual_solver import SolveConfig, capacity_p_consistency, solve
from cochord.errors import DomainError
from cochord.symplectic_core import Frame

from conftest import ACCEPTANCE_LINES, FAST

TESTS = Path(__file__).resolve().parent


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_01_ball_normalization():
    cfg = SolveConfig(N=512)
    worst_err, worst_time = 0.0, 0.0
    for n in (1, 2, 3):
        for k in range(n):
            t0 = time.perf_counter()
            v = solve(Ball(np.zeros(2 * n), 1.0), Frame(n, k), cfg).capacity
            worst_time = max(worst_time, time.perf_counter() - t0)
            worst_err = max(worst_err, rel(v, pi / 2))
    record(1, worst_err <= 0.02 and worst_time < 30,
           f"balls n<=3, all k<n, N=512: max rel err {worst_err:.2e}, max time {worst_time:.1f}s")


def test_criterion_02_random_ellipsoids():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 4))
        k = int(rng.integers(0, n))
        r = rng.uniform(0.5, 2.0, n)
        f = Frame(n, k)
        worst = max(worst, rel(solve(Ellipsoid(r), f, FAST).capacity, ellipsoid_capacity(f, r).value))
    record(2, worst <= 0.02, f"20 random ellipsoids: max rel err {worst:.2e}")


def test_criterion_03_offcenter_ball():
    f = Frame(2, 1)
    worst_solver, worst_chord = 0.0, 0.0
    for a in (0.0, 0.5, -0.5):
        exact = offcenter_ball_capacity(f, a).value
        r = sqrt(1 - a * a)
        assert exact == pytest.approx(asin(r) - r * sqrt(1 - r * r), rel=1e-14)
        v = solve(Ball(np.array([0.0, 0.0, 0.0, a]), 1.0), f, FAST).capacity
        worst_solver = max(worst_solver, rel(v, exact))
        worst_chord = max(worst_chord, abs(ball_chord(f, a).action - exact))
    record(3, worst_solver <= 0.02 and worst_chord <= 1e-10,
           f"a in {{0, +-0.5}}: solver rel err {worst_solver:.2e}, chord abs err {worst_chord:.1e}")


def test_criterion_04_random_boxes():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 4))
        k = int(rng.integers(0, n))
        a = rng.uniform(-1.0, 0.0, n)
        iv = np.column_stack([a, a + rng.uniform(0.5, 2.0, n), rng.uniform(0.3, 1.5, n), rng.uniform(0.3, 1.5, n)])
        f = Frame(n, k)
        worst = max(worst, rel(solve(Box.from_intervals(iv), f, FAST).capacity, box_capacity(f, iv).value))
    record(4, worst <= 0.02, f"20 random boxes: max rel err {worst:.2e}")


def test_criterion_05_cube_cross():
    body = cube_cross(2)
    errs = [rel(solve(body, Frame(2, k), FAST).capacity, target) for k, target in ((0, 2.0), (1, 2.0), (2, 4.0))]
    record(5, max(errs) <= 0.03, "cube x cross-polytope k=0,1,2: rel errs " + ", ".join(f"{e:.2e}" for e in errs))


def test_criterion_06_ellipse_disc():
    body = ellipse_disc_example()
    v0, v1, v2 = (solve(body, Frame(2, k), FAST).capacity for k in range(3))
    ok = rel(v0, 2.0) <= 0.03 and rel(v2, 4.0) <= 0.03 and v1 >= pi * (1 - FAST.tol_rel)
    record(6, ok, f"E(1,2) x D(1): k=0 {v0:.5f}, k=1 {v1:.5f} (>= pi), k=2 {v2:.5f}")


def test_criterion_07_flow_vs_solver():
    rng = np.random.default_rng(7)
    cfg = SolveConfig(N=512)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(1, 4))
        k = int(rng.integers(0, n))
        r = rng.uniform(0.5, 2.0, n)
        f = Frame(n, k)
        spec_min = return_spectrum(f, r, 10 * pi * r.max() ** 2)[0].action
        worst = max(worst, rel(solve(Ellipsoid(r), f, cfg).capacity, spec_min))
    record(7, worst <= cfg.tol_rel, f"10 random ellipsoids: max rel gap {worst:.2e} (tol {cfg.tol_rel:g})")


def test_criterion_08_p_independence():
    spreads = {}
    for name, body, f in (("disc", Ball(np.zeros(2), 1.0), Frame(1, 0)),
                          ("square", Box(-np.ones(2), np.ones(2)), Frame(1, 0)),
                          ("E(1,2)", Ellipsoid([1.0, 2.0]), Frame(2, 1))):
        vals = capacity_p_consistency(body, f, FAST)
        spreads[name] = (max(vals.values()) - min(vals.values())) / min(vals.values())
    ok = max(spreads.values()) <= 2 * FAST.tol_rel
    record(8, ok, "p in {2,3,4} rel spread " + ", ".join(f"{k} {v:.1e}" for k, v in spreads.items()))


def inequality_corpus():
    reports = []
    catalog = [e for e in example_bodies_catalog() if e.relation == "eq"]
    bases = {}
    for e in catalog:
        bases.setdefault(e.name.rsplit("_k", 1)[0], e)
    for e in bases.values():
        reports += k_monotonicity_check(e.body, e.frame.n)
    for e in catalog:
        for check in (sandwich_check, j_norm_upper_bound, inscribed_ball_lower_bound):
            try:
                out = check(e.body, e.frame)
            except DomainError:
                continue
            reports += list(out) if isinstance(out, tuple) else [out]
    pairs = [(Ball(np.zeros(4), 1.0), Scale(2.0, Ball(np.zeros(4), 1.0)), Frame(2, 1)),
             (Ellipsoid([1.0, 2.0]), Ellipsoid([1.0, 2.0]), Frame(2, 0)),
             (Box(-np.ones(2), np.ones(2)), Ball(np.zeros(2), 1.0), Frame(1, 0)),
             (Ellipsoid([1.0]), Box(np.array([-0.5, -1.0]), np.array([1.0, 0.5])), Frame(1, 0))]
    for D, K, f in pairs:
        for p in (1, 2):
            reports.append(brunn_minkowski_check(D, K, p, f, cfg=FAST))
    return reports


def test_criterion_09_inequality_corpus():
    reports = inequality_corpus()
    bad = [r.formula_id for r in reports if not r.holds]
    kinds = sorted({r.formula_id.split("_")[0] for r in reports})
    record(9, len(reports) >= 50 and not bad,
           f"{len(reports)} instances ({', '.join(kinds)}), {len(bad)} violations {bad[:3]}")


def test_criterion_10_neduv():
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(1, 4))
        f = Frame(n, int(rng.integers(0, n + 1)))
        r = rng.uniform(0.5, 2.0, n)
        e, h = rng.uniform(0.5, 3.0), 1e-4
        d = (capacity_family(f, r, e + h) - capacity_family(f, r, e - h)) / (2 * h)
        worst = max(worst, abs(d - neduv_return_time(f, r, e)))
    record(10, worst <= 1e-6, f"10 quadratic families: max |dC/de - T| {worst:.1e}")


def test_criterion_11_viterbo():
    r1 = viterbo_ratio(Ellipsoid([1.0, sqrt(2)]), Frame(2, 1)).extra["ratio"]
    r2 = viterbo_ratio(Ball(np.zeros(2), 1.0), Frame(1, 0)).extra["ratio"]
    ratios = [viterbo_ratio(e.body, e.frame, method="closed_form").extra["ratio"]
              for e in example_bodies_catalog() if e.frame.k == e.frame.n - 1 and e.relation == "eq"]
    ok = rel(r1, 1.0) <= 0.01 and rel(r2, 1.0) <= 0.01 and max(ratios) <= 1 + 1e-9
    record(11, ok, f"E(1,sqrt2) {r1:.6f}, B2 {r2:.6f}, {len(ratios)} catalog bodies max {max(ratios):.4f}")


PROPERTY_SUITES = [
    "test_symplectic_core.py",
    "test_convex_bodies.py",
    "test_dual_solver.py::test_constraint_space_audit",
    "test_dual_solver.py::test_objective_gradient_matches_finite_differences",
    "test_dual_solver.py::test_conformality",
    "test_dual_solver.py::test_translation_invariance_along_rnk",
    "test_closed_forms.py::test_catalog_conformality",
]


def test_criterion_12_property_suites():
    args = [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *[str(TESTS / s) for s in PROPERTY_SUITES]]
    proc = subprocess.run(args, capture_output=True, text=True, cwd=TESTS.parent)
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    record(12, proc.returncode == 0, f"property suites: {summary}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
