import json
from math import pi, sqrt

import numpy as np
import pytest

from cochord.bounds_inequalities import (brunn_minkowski_check, carrier_integral, dk_derivative, inscribed_ball_lower_bound,
                                         j_norm_upper_bound, j_operator_norm, k_monotonicity_check, mean_width_bound,
                                         reports_to_csv, reports_to_json, sandwich_check, viterbo_ratio)
from cochord.closed_forms import ellipse_disc_example, example_bodies_catalog
from cochord.convex_bodies import Ball, Box, Ellipsoid, Polydisc, Scale, VertexPolytope
from cochord.errors import DomainError
from cochord.symplectic_core import Frame

from conftest import FAST

# half the area of [-1, 1]^2 + unit disc, (4 + 8 + pi) / 2, from the planar area rule at n = 1
SQUARE_PLUS_DISC = 7.570796326794897


@pytest.mark.parametrize("n", [1, 2, 3])
def test_j_norm_ball(n):
    r = j_norm_upper_bound(Ball(np.zeros(2 * n), 1.0), Frame(n, 0))
    assert r.extra["norm"] == pytest.approx(1.0, rel=1e-9)
    assert r.rhs == pytest.approx(2.0) and r.lhs == pytest.approx(pi / 2) and r.holds


def test_j_norm_ellipsoid_diagonal_formula(rng):
    for _ in range(10):
        n = int(rng.integers(2, 4))
        k = int(rng.integers(0, n))
        radii = rng.uniform(0.5, 2, n)
        norm = j_operator_norm(Ellipsoid(radii), Frame(n, k))
        assert norm == pytest.approx(np.max(1 / radii[k:] ** 2), rel=1e-7)
    r = j_norm_upper_bound(Ellipsoid([1.0, 2.0]), Frame(2, 1))
    assert r.extra["norm"] == pytest.approx(0.25) and r.holds


def test_j_norm_scaling_and_k_order():
    box = Box(-np.array([1.0, 0.5, 0.8, 1.2]), np.array([1.0, 0.5, 0.8, 1.2]))
    for lam in (0.5, 2.0):
        a = j_norm_upper_bound(box, Frame(2, 0), cfg=FAST)
        b = j_norm_upper_bound(Scale(lam, box), Frame(2, 0), cfg=FAST)
        assert b.rhs == pytest.approx(lam ** 2 * a.rhs, rel=1e-7)
    E = Ellipsoid([1.3, 0.7, 1.9])
    rhs = [j_norm_upper_bound(E, Frame(3, k)).rhs for k in range(3)]
    assert rhs[0] <= rhs[1] * (1 + 1e-9) and rhs[1] <= rhs[2] * (1 + 1e-9)


def test_j_norm_needs_symmetry():
    tri = VertexPolytope([[1.0, 0.0], [0.0, 1.0], [-1.0, -0.5]])
    with pytest.raises(DomainError):
        j_norm_upper_bound(tri, Frame(1, 0))
    r = j_norm_upper_bound(tri, Frame(1, 0), cfg=FAST, symmetrize=True, grid=64)
    assert r.extra["symmetrized"] and r.holds


def test_brunn_minkowski_examples():
    B = Ball(np.zeros(4), 1.0)
    r = brunn_minkowski_check(B, B, 2, Frame(2, 0))
    assert r.lhs == pytest.approx(pi) and r.rhs == pytest.approx(pi) and r.holds
    r = brunn_minkowski_check(B, Ellipsoid([1.0, 2.0]), 1, Frame(2, 0), cfg=FAST)
    assert r.holds and r.slack >= -1e-6
    sq, disc = Box(-np.ones(2), np.ones(2)), Ball(np.zeros(2), 1.0)
    r = brunn_minkowski_check(sq, disc, 1, Frame(1, 0), cfg=FAST)
    assert r.extra["capacities"][2] == pytest.approx(SQUARE_PLUS_DISC, rel=1e-3)
    assert r.holds and r.slack > 0
    with pytest.raises(DomainError):
        brunn_minkowski_check(B, B, 0.5, Frame(2, 0))


def test_dk_derivative_ball():
    B = Ball(np.zeros(2), 1.0)
    d = dk_derivative(B, B, Frame(1, 0), cfg=FAST)
    assert d.estimate == pytest.approx(pi, rel=1e-6)
    assert d.lower == pytest.approx(pi) and d.upper == pytest.approx(pi, rel=1e-3)
    assert d.holds and d.monotone


def test_dk_derivative_square_disc():
    d = dk_derivative(Box(-np.ones(2), np.ones(2)), Ball(np.zeros(2), 1.0), Frame(1, 0), cfg=FAST)
    # d/de of (4 + 8e + pi e^2) / 2 at 0 is the half perimeter 4
    assert d.estimate == pytest.approx(4.0, rel=1e-2)
    assert d.holds and d.monotone
    assert d.lower <= d.upper


def test_carrier_integral_of_ball_is_perimeter_half():
    from cochord.chord_flow import ball_chord
    ch = ball_chord(Frame(1, 0), 0.0)
    assert carrier_integral(Ball(np.zeros(2), 1.0), ch) == pytest.approx(pi, rel=1e-6)


def test_sandwich():
    lo, hi = sandwich_check(Ball(np.zeros(4), 1.0), Frame(2, 1))
    assert lo.holds and hi.holds and lo.extra["tight"] == "lower"
    lo, hi = sandwich_check(ellipse_disc_example(), Frame(2, 1), cfg=FAST)
    assert lo.holds and hi.holds
    assert lo.rhs >= pi * (1 - FAST.tol_rel)
    assert lo.slack > 0.5  # c >= pi > c_HZ / 2 = 2
    sq = Box(-np.ones(2), np.ones(2))
    lo, hi = sandwich_check(sq, Frame(1, 0))
    assert lo.extra["tight"] == "lower" and lo.lhs == pytest.approx(2.0)
    with pytest.raises(DomainError):
        sandwich_check(Box(np.array([-1.0, -1.0]), np.array([1.0, 2.0])), Frame(1, 0))


def test_k_monotonicity_reports():
    reps = k_monotonicity_check(Polydisc([1.0, 0.6, 1.4]), 3)
    assert len(reps) == 3 and all(r.holds for r in reps)


def test_inscribed_ball():
    r = inscribed_ball_lower_bound(Ball(np.zeros(4), 1.0), Frame(2, 0))
    assert r.extra["radius"] == pytest.approx(1.0, rel=1e-6) and abs(r.slack) <= 1e-5 and r.holds
    r = inscribed_ball_lower_bound(Ellipsoid([1.0, 2.0]), Frame(2, 0))
    assert r.extra["radius"] == pytest.approx(1.0, rel=1e-6) and r.holds
    r = inscribed_ball_lower_bound(Box(np.array([0.0, -1.0]), np.array([2.0, 3.0])), Frame(1, 0))
    assert r.extra["radius"] == pytest.approx(1.0, rel=1e-6)
    assert r.rhs == pytest.approx(2.0) and r.holds
    with pytest.raises(DomainError):
        inscribed_ball_lower_bound(Ball(np.zeros(2), 1.0), Frame(1, 1))


def test_viterbo_examples():
    assert viterbo_ratio(Ellipsoid([1.0, sqrt(2)]), Frame(2, 1)).extra["ratio"] == pytest.approx(1.0)
    assert viterbo_ratio(Ball(np.zeros(2), 1.0), Frame(1, 0)).extra["ratio"] == pytest.approx(1.0)
    r = viterbo_ratio(Ball(np.array([0, 0, 0, 0.9]), 1.0), Frame(2, 1))
    assert r.extra["ratio"] < 0.2 and r.holds
    mc = viterbo_ratio(Ball(np.array([0, 0, 0, 0.5]), 1.0), Frame(2, 1), volume_mode="monte_carlo",
                       samples=200_000)
    assert mc.holds
    with pytest.raises(DomainError):
        viterbo_ratio(Ball(np.zeros(4), 1.0), Frame(2, 0))


def test_viterbo_catalog():
    count = 0
    for e in example_bodies_catalog():
        if e.frame.k == e.frame.n - 1 and e.relation == "eq":
            r = viterbo_ratio(e.body, e.frame, method="closed_form")
            assert r.holds, e.name
            assert r.extra["ratio"] <= 1 + 1e-9, e.name
            count += 1
    assert count >= 10


def test_mean_width():
    d2 = Ball(np.zeros(2), 1.0)
    r = mean_width_bound(d2, d2, cfg=FAST, samples=20_000)
    assert r.rhs == pytest.approx(2.0) and r.holds
    cube = Box(-np.ones(2), np.ones(2))
    r = mean_width_bound(cube, cube, cfg=FAST)
    assert r.holds and r.rhs == pytest.approx(2 * (4 / pi) ** 2, rel=1e-2)
    a = mean_width_bound(cube, d2, cfg=FAST, samples=20_000)
    b = mean_width_bound(Scale(2.0, cube), d2, cfg=FAST, samples=20_000)
    assert b.rhs == pytest.approx(2 * a.rhs, rel=1e-9)
    with pytest.raises(DomainError):
        mean_width_bound(cube, VertexPolytope([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]))


def test_report_serialization():
    reps = list(sandwich_check(Ball(np.zeros(2), 1.0), Frame(1, 0)))
    doc = json.loads(reports_to_json(reps))
    assert doc[0]["formula_id"] == "sandwich_lower" and doc[0]["holds"] is True
    lines = reports_to_csv(reps).splitlines()
    assert lines[0] == "formula_id,lhs,rhs,slack,holds" and len(lines) == 3
