"""Capacity as the minimum of a discretized dual action functional.

The decision variable is a polyline x_0..x_N. Its velocities
w_j = -J N (x_{j+1} - x_j) determine it completely: the endpoint and mean
constraints fix the starting point, so the constrained path space is
isomorphic to

    W = {w in R^{N x 2n} : mean(w) in J V0}.

On W the functional is the scale-free ratio

    R(w) = (mean_j H*(w_j)^{p/2})^{2/p} / A(x(w)),    H* = (h_D / 2)^2,

restricted to the cone A > 0, and the capacity is its minimum. Minimization
uses L-BFGS on a coarse grid with a continuation in a smoothing parameter for
polyhedral pieces of h_D, then refines on the fine grid. A carrier chord is
rebuilt from the Euler-Lagrange equation dH*(w) = lambda x + a with a in R^{n,k}.
"""
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import brentq, linprog, minimize

from .convex_bodies import Translate
from .errors import ConvergenceError, DomainError, SchemaError
from .symplectic_core import Chord, DiscretePath, Frame, action_samples, apply_J


# ---------------------------------------------------------------------------
# constraint space
# ---------------------------------------------------------------------------
class ConstraintSpace:
    """Linear space of polylines with x_0 in R^{n,k}, x_N - x_0 in V0 and mean in J V0.

    Parameters
    ----------
    frame : Frame
    N : int
        Number of segments, at least 16.
    with_basis : bool
        Compute an orthonormal basis of the space (memory grows like N^2).
    """

    def __init__(self, frame, N, with_basis=True):
        if int(N) != N or N < 16:
            raise SchemaError("N must be an integer >= 16")
        self.frame, self.N = frame, int(N)
        d = frame.dim
        size = (self.N + 1) * d
        rows = []

        def row(entries):
            r = np.zeros(size)
            for idx, val in entries:
                r[idx] += val
            rows.append(r)

        off = np.flatnonzero(frame.mask("JV0"))
        not_v0 = np.flatnonzero(~frame.mask("V0"))
        rnk = np.flatnonzero(frame.mask("Rnk"))
        last = self.N * d
        for i in off:  # x_0 has no J V0 component
            row([(i, 1.0)])
        for i in not_v0:  # x_N - x_0 lies in V0
            row([(last + i, 1.0), (i, -1.0)])
        wts = np.full(self.N + 1, 1.0 / self.N)
        wts[[0, -1]] *= 0.5
        for i in rnk:  # trapezoid mean has no R^{n,k} component
            row([(j * d + i, wts[j]) for j in range(self.N + 1)])
        self.matrix = np.array(rows)
        self.codim = self.matrix.shape[0]
        self.expected_codim = (frame.n - frame.k) + (frame.n + frame.k) + (frame.n + frame.k)
        rank = np.linalg.matrix_rank(self.matrix)
        if rank != self.codim or self.codim != self.expected_codim:
            raise AssertionError(f"constraint audit failed: rank {rank}, rows {self.codim}")
        self.dim = size - self.codim
        self.basis = null_space(self.matrix) if with_basis else None
        if self.basis is not None and self.basis.shape[1] != self.dim:
            raise AssertionError("basis dimension does not match the audit")
        self._gram = np.linalg.cholesky(self.matrix @ self.matrix.T)

    def residual(self, samples):
        """Constraint violation of a sample array of shape (N+1, 2n)."""
        return float(np.max(np.abs(self.matrix @ np.asarray(samples, float).ravel()), initial=0.0))

    def contains(self, samples, tol=1e-10):
        x = np.asarray(samples, float)
        return self.residual(x) <= tol * max(1.0, float(np.abs(x).max()))

    def project(self, samples):
        """Orthogonal projection of samples onto the constraint space."""
        x = np.asarray(samples, float).ravel()
        y = np.linalg.solve(self._gram.T, np.linalg.solve(self._gram, self.matrix @ x))
        return (x - self.matrix.T @ y).reshape(self.N + 1, self.frame.dim)


def build_constraint_space(frame, N, with_basis=True):
    """Discrete constraint space for polylines with N segments; see :class:`ConstraintSpace`."""
    return ConstraintSpace(frame, N, with_basis)


# ---------------------------------------------------------------------------
# velocity coordinates
# ---------------------------------------------------------------------------
def project_velocities(frame, w):
    """Remove the R^{n,k} part of the mean velocity."""
    return w - np.where(frame.mask("Rnk"), w.mean(axis=0), 0.0)


def path_from_velocities(frame, w):
    """Polyline with velocities w_j = -J N (x_{j+1} - x_j) in the constraint space.

    Parameters
    ----------
    frame : Frame
    w : ndarray, shape (N, 2n)
        Velocities with mean in J V0.

    Returns
    -------
    ndarray, shape (N+1, 2n)
    """
    N = w.shape[0]
    x = np.zeros((N + 1, frame.dim))
    x[1:] = np.cumsum(apply_J(w), axis=0) / N
    m = 0.5 * (x[1:] + x[:-1])
    return x - np.where(frame.mask("Rnk"), m.mean(axis=0), 0.0)


def velocities_from_path(path):
    """Inverse of :func:`path_from_velocities`."""
    return -apply_J(path.velocities())


def objective(body, path, p=2.0):
    """Discrete dual functional (1/N) sum_j H*(-J N (x_{j+1} - x_j))^{p/2}.

    Parameters
    ----------
    body : Body
        Body with 0 in its interior.
    path : DiscretePath
    p : float
        Exponent, at least 1.

    Returns
    -------
    value : float
    grad : ndarray, shape (N+1, 2n)
        Subgradient with respect to the samples.
    """
    body.require_origin_interior()
    w = velocities_from_path(path)
    N = path.N
    h, g = body.support(w)
    half = np.maximum(h, 0.0) / 2
    val = float(np.mean(half ** p))
    gw = (p / 2) * (half ** (p - 1))[:, None] * g / N  # d value / d w_j
    # w_j = -J N (x_{j+1} - x_j) and J^T = -J
    t = N * apply_J(gw)
    grad = np.zeros_like(path.samples)
    grad[1:] += t
    grad[:-1] -= t
    return val, grad


# ---------------------------------------------------------------------------
# configuration and results
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SolveConfig:
    """Solver settings.

    Parameters
    ----------
    N : int
        Fine grid size (segments), at least 16.
    N0 : int
        Coarse grid size for the multistart; ``N`` must be a multiple of it.
    max_iters : int
        L-BFGS iteration cap per continuation level.
    tol_rel : float
        Relative tolerance on the objective, in (0, 1e-2].
    restarts : int
        Number of random coarse starts.
    seed : int
    p : float
        Exponent of the dual functional.
    keep : int
        Coarse candidates refined on the fine grid.
    coarse_smoothing, fine_smoothing : tuple of float
        Continuation ladders for the smoothing width.
    algorithm : {'lbfgs', 'subgradient'}
        Fine-grid method. 'subgradient' runs projected Polyak steps.
    residual_tol : float
        Tolerance of the carrier certificates.
    threads : int or None
        Worker threads for restarts; defaults to COCHORD_THREADS or 1.
    """

    N: int = 512
    N0: int = 64
    max_iters: int = 400
    tol_rel: float = 1e-3
    restarts: int = 8
    seed: int = 0
    p: float = 2.0
    keep: int = 2
    coarse_smoothing: tuple = (0.3, 0.1, 0.03, 0.01, 0.003)
    fine_smoothing: tuple = (3e-3, 1e-3, 3e-4, 1e-4)
    algorithm: str = "lbfgs"
    residual_tol: float = 1e-6
    threads: int = None

    def validate(self):
        if int(self.N) != self.N or self.N < 16:
            raise SchemaError("N must be an integer >= 16")
        if self.N0 < 8 or self.N % min(self.N0, self.N):
            raise SchemaError("N must be a multiple of N0")
        if not 0 < self.tol_rel <= 1e-2:
            raise SchemaError("tol_rel must lie in (0, 1e-2]")
        if self.restarts < 1 or self.keep < 1 or self.max_iters < 1:
            raise SchemaError("restarts, keep and max_iters must be positive")
        if not self.p >= 1:
            raise SchemaError("p must be at least 1")
        if self.algorithm not in ("lbfgs", "subgradient"):
            raise SchemaError(f"unknown algorithm {self.algorithm!r}")
        return self


@dataclass
class SolveResult:
    """Capacity estimate with its minimizer and carrier chord.

    ``minimizer`` is the optimal dual path scaled to action 1, ``carrier`` the
    reconstructed chord on the boundary of the original body, ``multiplier_a0``
    the Lagrange multiplier in R^{n,k} and ``z0`` the normalization translation.
    """

    capacity: float
    minimizer: DiscretePath
    carrier: Chord
    multiplier_a0: np.ndarray
    z0: np.ndarray
    frame: Frame
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------
def normalization_point(body, frame, samples=256, seed=0):
    """Deep interior point of body ∩ R^{n,k}.

    Maximizes the margin t subject to <z, u> + t <= h(u) over sampled unit
    directions u, with z restricted to R^{n,k}.

    Returns
    -------
    z0 : ndarray, shape (2n,)
    margin : float

    Raises
    ------
    DomainError
        If the body misses R^{n,k}.
    """
    d = frame.dim
    rng = np.random.default_rng(seed)
    u = np.vstack([np.eye(d), -np.eye(d), rng.normal(size=(samples, d))])
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    h = body.support(u).value
    idx = np.flatnonzero(frame.mask("Rnk"))
    A = np.c_[u[:, idx], np.ones(len(u))]
    c = np.r_[np.zeros(idx.size), -1.0]
    res = linprog(c, A_ub=A, b_ub=h, bounds=[(None, None)] * (idx.size + 1), method="highs")
    if res.status != 0 or -res.fun <= 1e-9 * max(1.0, float(np.abs(h).max())):
        raise DomainError("the body does not meet R^{n,k} in an interior point")
    z0 = np.zeros(d)
    z0[idx] = res.x[:-1]
    return z0, float(-res.fun)


def _normalized_body(body, frame, seed):
    z0, margin = normalization_point(body, frame, seed=seed)
    d = frame.dim
    u = np.random.default_rng(seed + 1).normal(size=(512, d))
    u = np.vstack([np.eye(d), -np.eye(d), u / np.linalg.norm(u, axis=1, keepdims=True)])
    if body.support(u).value.min() >= 0.25 * margin and body._origin_ok():
        return body, np.zeros(d)
    return Translate(-z0, body), z0


# ---------------------------------------------------------------------------
# the ratio functional in velocity coordinates
# ---------------------------------------------------------------------------
class _Ratio:
    """R(w) = I_p(w)^{2/p} / A(w) and its gradient on W."""

    def __init__(self, body, frame, N, p, mu):
        self.body, self.frame, self.N, self.p, self.mu = body, frame, N, p, mu
        self.rnk = frame.mask("Rnk")

    def parts(self, w):
        N, p = self.N, self.p
        h, g = self.body._support(w, self.mu)
        half = np.maximum(h, 0.0) / 2
        I = float(np.mean(half ** p))
        F = I ** (2 / p)
        dF = (I ** (2 / p - 1) if I > 0 else 0.0) * (half ** (p - 1))[:, None] * g / N
        x = path_from_velocities(self.frame, w)
        m = 0.5 * (x[1:] + x[:-1])
        A = 0.5 * float(np.sum(w * m)) / N
        return F, dF, A, m / N, x

    def __call__(self, u):
        w = project_velocities(self.frame, u.reshape(self.N, self.frame.dim))
        F, dF, A, dA, _ = self.parts(w)
        if A <= 0:
            g = project_velocities(self.frame, -dA)
            return 1e6 - A, g.ravel()
        R = F / A
        g = project_velocities(self.frame, (dF - R * dA) / A)
        return R, g.ravel()


def _reverse(w):
    """Velocities of the time-reversed path, which flips the sign of the action."""
    return -w[::-1]


def _random_start(frame, N, rng, modes=3):
    t = (np.arange(N) + 0.5) / N
    w = np.zeros((N, frame.dim))
    for m in range(1, modes + 1):
        w += np.outer(np.cos(np.pi * m * t), rng.normal(size=frame.dim)) / m
        w += np.outer(np.sin(np.pi * m * t), rng.normal(size=frame.dim)) / m
    return project_velocities(frame, w)


def _lbfgs(fun, w, iters):
    res = minimize(fun, w.ravel(), jac=True, method="L-BFGS-B",
                   options=dict(maxiter=iters, maxcor=20, ftol=1e-13, gtol=1e-10, maxfun=2 * iters))
    return res.x.reshape(w.shape), int(res.nit), int(res.status)


def _normalize(w):
    s = np.sqrt(np.mean(w * w))
    return w / s if s > 0 else w


def _coarse_run(body, frame, cfg, N0, rng):
    exact = _Ratio(body, frame, N0, cfg.p, 0.0)
    w = _random_start(frame, N0, rng)
    if exact(w.ravel())[0] >= 1e6:
        w = _reverse(w)
    its = 0
    for mu in cfg.coarse_smoothing:
        w, nit, _ = _lbfgs(_Ratio(body, frame, N0, cfg.p, mu), w, cfg.max_iters)
        w = _normalize(project_velocities(frame, w))
        its += nit
    w, nit, _ = _lbfgs(exact, w, cfg.max_iters)
    w = _normalize(project_velocities(frame, w))
    return exact(w.ravel())[0], w, its + nit


def _polyak(fun, w, iters, tol):
    """Projected subgradient descent with Polyak steps toward a moving target."""
    best_v, g = fun(w.ravel())
    best = w.copy()
    delta = 0.05 * best_v
    v = best_v
    for _ in range(iters):
        gg = float(g @ g)
        if gg == 0:
            break
        target = best_v - delta
        w = w - ((v - target) / gg) * g.reshape(w.shape)
        w = _normalize(w)
        v, g = fun(w.ravel())
        if v < best_v:
            best_v, best = v, w.copy()
        else:
            delta *= 0.7
        if delta < tol * best_v:
            break
    return best, best_v


def _fine_run(body, frame, cfg, w, N):
    w = np.repeat(w, N // w.shape[0], axis=0)
    exact = _Ratio(body, frame, N, cfg.p, 0.0)
    history = [exact(w.ravel())[0]]
    its, status = 0, 0
    if cfg.algorithm == "subgradient":
        w, v = _polyak(exact, w, 40 * cfg.max_iters, cfg.tol_rel * 1e-2)
        history.append(v)
        return v, w, history, its, 0
    for mu in cfg.fine_smoothing:
        w, nit, status = _lbfgs(_Ratio(body, frame, N, cfg.p, mu), w, cfg.max_iters)
        w = _normalize(project_velocities(frame, w))
        history.append(exact(w.ravel())[0])
        its += nit
    w2, nit, status = _lbfgs(exact, w, cfg.max_iters)
    w2 = _normalize(project_velocities(frame, w2))
    v2 = exact(w2.ravel())[0]
    if v2 <= history[-1]:
        w = w2
    history.append(min(v2, history[-1]))
    return history[-1], w, history, its + nit, status


def _threads(cfg):
    if cfg.threads:
        return int(cfg.threads)
    try:
        return max(1, int(os.environ.get("COCHORD_THREADS", "1")))
    except ValueError:
        return 1


def _multistart(body, frame, cfg, N0):
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    jobs = [lambda s=s: _coarse_run(body, frame, cfg, N0, np.random.default_rng(s)) for s in seeds]
    nthreads = min(_threads(cfg), len(jobs))
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            return list(ex.map(lambda f: f(), jobs))
    return [f() for f in jobs]


# ---------------------------------------------------------------------------
# carrier reconstruction
# ---------------------------------------------------------------------------
def _gauge_scalar(body, z):
    return float(body._gauge(z[None, :], 0.0)[0][0])


def reconstruct_carrier(body, frame, w, lam, p=2.0, residual_tol=1e-6):
    """Chord on the boundary of ``body`` from an optimal velocity array.

    Recovers a0 in R^{n,k} as the mean of the R^{n,k} part of
    rho_j - lam m_j, where rho_j is the gradient of the numerator at w_j, then
    maps v_i = lam x_i + a0 radially onto the boundary. The last sample is
    moved along V0 so that both endpoints share a leaf exactly; the offset
    before this adjustment is reported as ``leaf_offset_raw``.

    Returns
    -------
    chord : Chord
    a0 : ndarray
    """
    N = w.shape[0]
    ratio = _Ratio(body, frame, N, p, 0.0)
    F, dF, A, _, x = ratio.parts(w)
    rho = dF * N
    m = 0.5 * (x[1:] + x[:-1])
    resid = rho - lam * m
    a0 = np.where(frame.mask("Rnk"), resid.mean(axis=0), 0.0)
    v = lam * x + a0
    j, _ = body._gauge(v, 0.0)
    if np.any(j <= 0):
        raise ConvergenceError("degenerate carrier: a sample maps to the origin", best=lam)
    xs = v / j[:, None]
    v0 = frame.mask("V0")
    raw = float(np.linalg.norm(np.where(v0, 0.0, xs[-1] - xs[0])))
    d = np.where(v0, xs[-1] - xs[0], 0.0)
    t_raw = float(np.linalg.norm(d))
    if t_raw > 0:
        # far boundary point on the leaf of the start, near the raw end sample
        d = d / t_raw
        phi = lambda t: _gauge_scalar(body, xs[0] + t * d) - 1.0
        lo, hi = 0.5 * t_raw, 1.5 * t_raw
        while phi(lo) >= 0 and lo > 1e-12 * t_raw:
            lo *= 0.5
        while phi(hi) < 0:
            hi *= 2.0
        if phi(lo) < 0:
            xs[-1] = xs[0] + brentq(phi, lo, hi, xtol=1e-15, rtol=1e-15) * d
    else:
        xs[-1] = xs[0]
    spread = float((j.max() - j.min()) / j.mean())
    jj = body._gauge(xs, 0.0)[0]
    path = DiscretePath(xs, frame)
    act = action_samples(xs)
    chord = Chord(path, act, act, frame, {})
    res = chord.endpoint_residuals()
    res.update({
        "on_boundary": float(np.max(np.abs(jj - 1.0))),
        "leaf_offset_raw": raw,
        "gauge_spread": spread,
        "action_gap": abs(act - lam) / lam,
        "multiplier_mean_residual": float(np.linalg.norm(resid - a0, axis=1).mean() / max(np.linalg.norm(rho, axis=1).mean(), 1e-300)),
    })
    return Chord(path, act, act, frame, res), a0


def stationarity_residual(body, frame, w, p=2.0):
    """Relative norm of the projected gradient of the ratio at ``w``."""
    N = w.shape[0]
    R, g = _Ratio(body, frame, N, p, 0.0)(w.ravel())
    F, dF, A, _, _ = _Ratio(body, frame, N, p, 0.0).parts(w)
    return float(np.linalg.norm(g) / max(np.linalg.norm(dF / A), 1e-300))


# ---------------------------------------------------------------------------
# public drivers
# ---------------------------------------------------------------------------
def solve(body, frame, cfg=None, start=None):
    """Capacity of ``body`` relative to R^{n,k} by minimizing the dual ratio.

    Parameters
    ----------
    body : Body
        Bounded convex body in R^{2n} meeting R^{n,k}.
    frame : Frame
    cfg : SolveConfig, optional
    start : ndarray, optional
        Velocity array of shape (M, 2n) with N divisible by M. It replaces
        the multistart stage.

    Returns
    -------
    SolveResult

    Raises
    ------
    DomainError
        If the body misses R^{n,k}.
    ConvergenceError
        If every start is degenerate or the final level does not settle.
    """
    cfg = (cfg or SolveConfig()).validate()
    if body.dim != frame.dim:
        raise SchemaError(f"body dimension {body.dim} does not match frame dimension {frame.dim}")
    t0 = time.perf_counter()
    nbody, z0 = _normalized_body(body, frame, cfg.seed)
    N = int(cfg.N)
    N0 = min(int(cfg.N0), N)
    diag = {"N": N, "N0": N0, "p": cfg.p, "z0": z0.tolist()}
    if start is None:
        coarse = _multistart(nbody, frame, cfg, N0)
        coarse.sort(key=lambda c: c[0])
        diag["coarse_values"] = [float(c[0]) for c in coarse]
        if not coarse or coarse[0][0] >= 1e6:
            raise ConvergenceError("every start has nonpositive action", best=None)
        cands = [c[1] for c in coarse[:cfg.keep] if c[0] < 1e6]
    else:
        start = np.asarray(start, float)
        if start.ndim != 2 or start.shape[1] != frame.dim or N % start.shape[0]:
            raise SchemaError("start must have shape (M, 2n) with N divisible by M")
        cands = [project_velocities(frame, start)]
    best = None
    fine = []
    for w in cands:
        v, wf, hist, its, status = _fine_run(nbody, frame, cfg, w, N)
        fine.append({"value": float(v), "history": [float(h) for h in hist], "iterations": its, "status": status})
        if best is None or v < best[0]:
            best = (v, wf, hist, status)
    lam, w, hist, status = best
    diag["fine"] = fine
    if not np.isfinite(lam) or lam >= 1e6:
        raise ConvergenceError("no start reached positive action", best=None)
    carrier, a0 = reconstruct_carrier(nbody, frame, w, lam, cfg.p, cfg.residual_tol)
    if np.any(z0):
        xs = carrier.path.samples + z0
        carrier = Chord(DiscretePath(xs, frame), carrier.action, carrier.return_time, frame, carrier.residuals)
    x = path_from_velocities(frame, w)
    A = action_samples(x)
    minimizer = DiscretePath(x / np.sqrt(A), frame)
    diag["stationarity"] = stationarity_residual(nbody, frame, w, cfg.p)
    diag["seconds"] = time.perf_counter() - t0
    last_drop = (hist[-2] - hist[-1]) / hist[-1] if len(hist) > 1 else 0.0
    diag["last_level_drop"] = float(last_drop)
    result = SolveResult(float(lam), minimizer, carrier, a0, z0, frame, diag)
    if status == 1 and last_drop > cfg.tol_rel:
        raise ConvergenceError(f"iteration cap reached with relative drop {last_drop:.2e}", best=float(lam),
                               result=result)
    return result


def capacity_p_consistency(body, frame, cfg=None, p_list=(2.0, 3.0, 4.0)):
    """Capacities from the dual functional at several exponents.

    Returns
    -------
    dict
        Map from p to capacity; the values agree for a correct solver.
    """
    cfg = cfg or SolveConfig()
    return {float(p): solve(body, frame, replace(cfg, p=float(p))).capacity for p in p_list}


@dataclass
class RefineResult:
    """Per-level results of a refinement ladder and a Richardson estimate."""

    levels: list
    values: list
    extrapolated: float
    error_estimate: float


def upsample_velocities(w, factor):
    """Velocities on a grid ``factor`` times finer describing the same polyline."""
    return np.repeat(np.asarray(w, float), int(factor), axis=0)


def refine(body, frame, cfg=None, ladder=(64, 128, 256, 512)):
    """Solve along increasing grid sizes, warm-starting each level.

    Returns
    -------
    RefineResult
        ``extrapolated`` assumes second order convergence in 1 / N.
    """
    cfg = cfg or SolveConfig()
    ladder = [int(n) for n in ladder]
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise SchemaError("ladder must be increasing")
    results = []
    w = None
    for N in ladder:
        c = replace(cfg, N=N, N0=min(cfg.N0, N))
        if w is None:
            r = solve(body, frame, c)
        else:
            r = solve(body, frame, c, start=w)
        results.append(r)
        w = -apply_J(np.diff(r.minimizer.samples, axis=0)) * N
    vals = [r.capacity for r in results]
    if len(vals) > 1:
        est = (vals[-2] - vals[-1]) / 3.0
    else:
        est = 0.0
    return RefineResult(results, vals, vals[-1] - est, abs(est))
