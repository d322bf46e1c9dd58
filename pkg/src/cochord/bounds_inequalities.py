"""Numerical checks of comparison inequalities for coisotropic capacities.

Every check returns an :class:`InequalityReport` oriented as ``lhs <= rhs``,
so ``slack = rhs - lhs`` and ``holds`` means ``slack >= -tol``. Tolerances are
relative: ``1e-9`` when every capacity comes from a closed form, ``rel_tol``
when the solver is involved, plus three standard errors for Monte Carlo
quantities.
"""
import csv
import io
import json
from dataclasses import asdict, dataclass, field, replace
from math import factorial, pi, sqrt

import numpy as np
from scipy.optimize import minimize

from .capacity import capacity, inscribed_radius
from .convex_bodies import LagrangianProduct, PSum, Scale, SymmDiff, mean_width_symmetrized, volume_half
from .dual_solver import SolveConfig, solve
from .errors import DomainError
from .symplectic_core import Frame, apply_J

EXACT_TOL = 1e-9
SOLVER_TOL = 1e-2


@dataclass
class InequalityReport:
    """Outcome of one inequality check, oriented as lhs <= rhs."""

    formula_id: str
    lhs: float
    rhs: float
    tol: float
    inputs: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def holds(self):
        return bool(self.slack >= -self.tol)

    def to_dict(self):
        d = asdict(self)
        d["slack"] = self.slack
        d["holds"] = self.holds
        return d


def reports_to_json(reports):
    """JSON array of reports with sorted keys."""
    return json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=2, default=_jsonable)


def reports_to_csv(reports):
    """Flat CSV with columns formula_id, lhs, rhs, slack, holds."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["formula_id", "lhs", "rhs", "slack", "holds"])
    for r in reports:
        w.writerow([r.formula_id, repr(float(r.lhs)), repr(float(r.rhs)), repr(float(r.slack)), r.holds])
    return buf.getvalue()


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    return str(o)


def _report(formula_id, lhs, rhs, used_solver, inputs, rel_tol=SOLVER_TOL, abs_extra=0.0, **extra):
    scale = max(abs(lhs), abs(rhs), 1e-300)
    tol = (rel_tol if used_solver else EXACT_TOL) * scale + abs_extra
    return InequalityReport(formula_id, float(lhs), float(rhs), float(tol), inputs, extra)


def _cap(body, frame, method, cfg):
    r = capacity(body, frame, method=method, cfg=cfg)
    return r.value, r.method == "dual-solver", r


# ---------------------------------------------------------------------------
# operator norm bound
# ---------------------------------------------------------------------------
def _unit_directions(d, grid, rng):
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        t = np.linspace(0, 2 * pi, grid, endpoint=False)
        return np.column_stack([np.cos(t), np.sin(t)])
    u = rng.normal(size=(grid * d, d))
    return np.vstack([np.eye(d), -np.eye(d), u / np.linalg.norm(u, axis=1, keepdims=True)])


def j_operator_norm(body, frame, grid=720, seed=0):
    """Sup of j_D(Jv) / h_D(v) over nonzero v in J V0.

    The sup is taken over a dense grid of unit directions in J V0 and refined
    locally from the best three.

    Returns
    -------
    float
    """
    if frame.k >= frame.n:
        raise DomainError("the operator norm bound needs k < n")
    idx = np.flatnonzero(frame.mask("JV0"))
    d = idx.size

    def embed(u):
        v = np.zeros((u.shape[0], frame.dim))
        v[:, idx] = u
        return v

    def ratio(u):
        v = embed(np.atleast_2d(u))
        return body.gauge(apply_J(v)).value / body.support(v).value

    u = _unit_directions(d, grid, np.random.default_rng(seed))
    r = ratio(u)
    best = float(r.max())
    if d >= 2:
        for i in np.argsort(r)[-3:]:
            res = minimize(lambda y: -ratio(y / np.linalg.norm(y)).item(), u[i], method="Nelder-Mead",
                           options=dict(xatol=1e-10, fatol=1e-13, maxiter=600))
            best = max(best, -float(res.fun))
    return best


def j_norm_upper_bound(body, frame, method="auto", cfg=None, grid=720, seed=0, symmetrize=False):
    """Check c(D) <= 2 / ||J restricted to J V0||, the norm taken from D-polar to D.

    Parameters
    ----------
    body : Body
        Centrally symmetric unless ``symmetrize`` is set.
    frame : Frame
        With k < n.
    symmetrize : bool
        Evaluate the norm on the difference body D - D, which bounds the
        capacity of any convex D.

    Raises
    ------
    DomainError
        If the body is not centrally symmetric and ``symmetrize`` is off.
    """
    sym = body.is_symmetric()
    if not sym and not symmetrize:
        raise DomainError("the operator norm bound needs a centrally symmetric body")
    normed = SymmDiff(body) if (symmetrize and not sym) else body
    norm = j_operator_norm(normed, frame, grid, seed)
    c, used, _ = _cap(body, frame, method, cfg)
    return _report("j_norm_upper_bound", c, 2.0 / norm, used, {"n": frame.n, "k": frame.k},
                   norm=norm, symmetrized=normed is not body)


# ---------------------------------------------------------------------------
# Brunn-Minkowski
# ---------------------------------------------------------------------------
def brunn_minkowski_check(D, K, p, frame, method="auto", cfg=None):
    """Check c(D)^{p/2} + c(K)^{p/2} <= c(D +_p K)^{p/2}.

    Raises
    ------
    DomainError
        If p < 1 or the origin is not interior to both bodies.
    """
    if not p >= 1:
        raise DomainError("the Brunn-Minkowski check needs p >= 1")
    D.require_origin_interior()
    K.require_origin_interior()
    cD, uD, _ = _cap(D, frame, method, cfg)
    cK, uK, _ = _cap(K, frame, method, cfg)
    cS, uS, _ = _cap(PSum(p, D, K), frame, method, cfg)
    e = p / 2
    return _report("brunn_minkowski", cD ** e + cK ** e, cS ** e, uD or uK or uS,
                   {"p": p, "n": frame.n, "k": frame.k}, capacities=[cD, cK, cS])


# ---------------------------------------------------------------------------
# derivative along Minkowski sums
# ---------------------------------------------------------------------------
@dataclass
class DerivativeReport:
    """Estimate of d/d eps c(D + eps K) at 0 with its two-sided bound."""

    estimate: float
    lower: float
    upper: float
    eps: tuple
    capacities: tuple
    quotients_sqrt: tuple
    tol: float

    @property
    def holds(self):
        return bool(self.lower - self.tol <= self.estimate <= self.upper + self.tol)

    @property
    def monotone(self):
        """Whether the quotients of sqrt(c) do not increase with eps."""
        q = np.asarray(self.quotients_sqrt)
        # eps is sorted decreasingly, so quotients must be nondecreasing in order
        return bool(np.all(np.diff(q) >= -self.tol))


def carrier_integral(K, chord):
    """Integral over [0, 1] of h_K(-J z') along a chord's samples."""
    dz = np.diff(chord.path.samples, axis=0)
    return float(K.support(-apply_J(dz)).value.sum())


def dk_derivative(D, K, frame, eps=(0.1, 0.05, 0.025), cfg=None, method="auto"):
    """Right derivative of eps -> c(D + eps K) at 0.

    The quotients of s(eps) = sqrt(c(D + eps K)) are extrapolated linearly in
    eps from the two smallest steps, and d_K = 2 s(0) s'(0). The lower bound is
    2 sqrt(c(D) c(K)); the upper bound integrates h_K(-J z') along the solver
    carrier of D.

    Returns
    -------
    DerivativeReport
    """
    D.require_origin_interior()
    K.require_origin_interior()
    eps = tuple(sorted((float(e) for e in eps), reverse=True))
    if len(eps) < 2 or eps[-1] <= 0:
        raise DomainError("the eps ladder needs at least two positive steps")
    cfg = cfg or SolveConfig()
    base = solve(D, frame, cfg)
    cD = capacity(D, frame, method=method, cfg=cfg).value
    cK = capacity(K, frame, method=method, cfg=cfg).value
    caps = [capacity(PSum(1, D, Scale(e, K)), frame, method=method, cfg=cfg).value for e in eps]
    s0 = sqrt(cD)
    q = [(sqrt(c) - s0) / e for c, e in zip(caps, eps)]
    e1, e2 = eps[-2], eps[-1]
    slope = q[-1] - (q[-2] - q[-1]) * e2 / (e1 - e2)
    est = 2 * s0 * slope
    lower = 2 * sqrt(cD * cK)
    upper = carrier_integral(K, base.carrier)
    tol = SOLVER_TOL * max(lower, upper)
    return DerivativeReport(est, lower, upper, eps, tuple(caps), tuple(q), tol)


# ---------------------------------------------------------------------------
# sandwich, inscribed ball, volume ratio, mean width
# ---------------------------------------------------------------------------
def sandwich_check(D, frame, method="auto", cfg=None):
    """Check c_HZ(D) / 2 <= c(D) <= c_HZ(D) for a body invariant under (q, p) -> (q, -p).

    Returns
    -------
    (InequalityReport, InequalityReport)
        The lower and upper comparisons. Both carry ``extra['tight']``, the
        side that is tight within tolerance or 'none'.
    """
    if not D.is_tau0_invariant():
        raise DomainError("the sandwich check needs a body invariant under (q, p) -> (q, -p)")
    c, u1, _ = _cap(D, frame, method, cfg)
    chz, u2, _ = _cap(D, Frame(frame.n, frame.n), method, cfg)
    inputs = {"n": frame.n, "k": frame.k}
    lo = _report("sandwich_lower", 0.5 * chz, c, u1 or u2, inputs, c_hz=chz)
    hi = _report("sandwich_upper", c, chz, u1 or u2, inputs, c_hz=chz)
    tight = "lower" if abs(lo.slack) <= lo.tol else "upper" if abs(hi.slack) <= hi.tol else "none"
    lo.extra["tight"] = hi.extra["tight"] = tight
    return lo, hi


def k_monotonicity_check(D, n, method="auto", cfg=None):
    """Reports c(D, k) <= c(D, k+1) for k = 0..n-1, ending at c_HZ."""
    caps = [_cap(D, Frame(n, k), method, cfg) for k in range(n + 1)]
    return [_report("k_monotonicity", caps[k][0], caps[k + 1][0], caps[k][1] or caps[k + 1][1],
                    {"n": n, "k": k}) for k in range(n)]


def inscribed_ball_lower_bound(D, frame, method="auto", cfg=None, seed=0):
    """Check pi r^2 / 2 <= c(D) for a ball of radius r centered in R^{n,k} inside D."""
    if frame.periodic:
        raise DomainError("the inscribed ball bound needs k < n")
    r, z = inscribed_radius(D, frame, seed)
    if r <= 0:
        raise DomainError("the body has no interior point in R^{n,k}")
    c, used, _ = _cap(D, frame, method, cfg)
    return _report("inscribed_ball", 0.5 * pi * r * r, c, used, {"n": frame.n, "k": frame.k},
                   radius=r, center=z.tolist())


def viterbo_ratio(D, frame, method="auto", cfg=None, volume_mode="exact", seed=0, samples=1_000_000):
    """Ratio c(D)^n / (n! min(Vol D+, Vol D-)) at k = n - 1.

    The report compares lhs = c^n with rhs = n! times the smaller half volume;
    ``extra['ratio']`` holds their quotient. A ratio above one would contradict
    the conjectured volume bound on this instance.
    """
    if frame.k != frame.n - 1:
        raise DomainError("the volume ratio is defined for k = n - 1")
    c, used, _ = _cap(D, frame, method, cfg)
    vp, sp = volume_half(D, +1, volume_mode, seed, samples)
    vm, sm = volume_half(D, -1, volume_mode, seed + 1, samples)
    vmin, se = (vp, sp) if vp <= vm else (vm, sm)
    if vmin <= 0:
        raise DomainError("one half of the body has zero volume")
    nf = factorial(frame.n)
    lhs, rhs = c ** frame.n, nf * vmin
    return _report("viterbo_ratio", lhs, rhs, used or volume_mode != "exact", {"n": frame.n, "k": frame.k},
                   abs_extra=3 * nf * se, ratio=lhs / rhs, half_volumes=[vp, vm])


def mean_width_bound(delta, lam, method="auto", cfg=None, seed=0, samples=200_000):
    """Check c(delta x lam) <= 2 r_delta r_lam at k = 0.

    ``r`` is the mean over the unit sphere of the support of the symmetrized
    body (K - K) / 2.
    """
    if not lam.is_symmetric():
        raise DomainError("the mean width bound needs a centrally symmetric momentum body")
    n = delta.dim
    frame = Frame(n, 0)
    rd, sd = mean_width_symmetrized(delta, seed, samples)
    rl, sl = mean_width_symmetrized(lam, seed + 1, samples)
    c, used, _ = _cap(LagrangianProduct(delta, lam), frame, method, cfg)
    rhs = 2 * rd * rl
    se = 2 * sqrt((rl * sd) ** 2 + (rd * sl) ** 2)
    return _report("mean_width", c, rhs, True, {"n": n, "k": 0}, abs_extra=3 * se,
                   r_delta=rd, r_lambda=rl)
