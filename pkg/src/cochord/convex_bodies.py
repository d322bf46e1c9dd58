"""Convex bodies as expression trees with support, gauge and Legendre evaluations.

Every node evaluates along the last axis of its input, so a whole batch of
directions is processed in one call. Evaluations return ``(value, grad)``
where ``grad`` is a subgradient: a supporting point for the support function
and an outer normal scaled by Euler's identity for the gauge.

The optional ``mu`` argument of :meth:`Body.support` returns a smooth
approximation whose kinks are rounded at relative width ``mu``. It is used only
by the solver's continuation stage; ``mu=0`` is always exact.
"""
from math import factorial, gamma, pi
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, linprog, minimize
from scipy.spatial import ConvexHull
from scipy.special import logsumexp, softmax

from .errors import DomainError, SchemaError

_TINY = 1e-300


class GaugeEval(NamedTuple):
    """Value of a 1-homogeneous convex function and one subgradient."""

    value: np.ndarray
    subgradient: np.ndarray


def _as_batch(w, dim):
    w = np.asarray(w, dtype=float)
    if w.ndim == 0 or w.shape[-1] != dim:
        raise SchemaError(f"expected vectors of length {dim}, got shape {w.shape}")
    return w


def _norm(v, mu=0.0):
    """Euclidean norm along the last axis, optionally smoothed at the origin."""
    r2 = np.sum(v * v, axis=-1)
    r = np.sqrt(r2 + mu * mu)
    g = v / np.maximum(r, _TINY)[..., None]
    return r, g


def _smooth_max(vals, grads, mu):
    """Maximum of stacked values ``vals[..., m]`` with matching ``grads[..., m, d]``.

    With ``mu > 0`` the log-sum-exp relaxation is used; otherwise the first
    maximizer is selected.
    """
    if mu > 0:
        v = mu * logsumexp(vals / mu, axis=-1)
        wts = softmax(vals / mu, axis=-1)
        return v, np.einsum("...m,...md->...d", wts, grads)
    i = np.argmax(vals, axis=-1)
    v = np.take_along_axis(vals, i[..., None], -1)[..., 0]
    g = np.take_along_axis(grads, i[..., None, None], -2)[..., 0, :]
    return v, g


class Body:
    """Base class of the body expression tree.

    Subclasses implement ``_support`` and, when a closed form exists,
    ``_gauge``, ``contains`` and ``_volume``.
    """

    dim = 0

    # -- evaluations ---------------------------------------------------------
    def support(self, w, mu=0.0):
        """Support function h(w) = sup_{x in body} <x, w> with a supporting point.

        Parameters
        ----------
        w : array_like, shape (..., dim)
        mu : float
            Relative smoothing width, 0 for the exact value.

        Returns
        -------
        GaugeEval
        """
        w = _as_batch(w, self.dim)
        return GaugeEval(*self._support(w, float(mu)))

    def gauge(self, z, mu=0.0):
        """Minkowski gauge j(z) = inf{t > 0 : z / t in body} with a subgradient.

        Parameters
        ----------
        z : array_like, shape (..., dim)
        mu : float
            Relative smoothing width, only honoured by polyhedral closed forms.

        Returns
        -------
        GaugeEval

        Raises
        ------
        DomainError
            If the origin is not an interior point.
        """
        z = _as_batch(z, self.dim)
        self.require_origin_interior()
        return GaugeEval(*self._gauge(z, float(mu)))

    def _gauge(self, z, mu):
        return _generic_gauge(self, z)

    def contains(self, z, tol=0.0):
        """Membership test along the last axis (closed body)."""
        z = _as_batch(z, self.dim)
        self.require_origin_interior()
        return self._gauge(z, 0.0)[0] <= 1.0 + tol

    def origin_interior(self):
        """Whether 0 is an interior point, tested by the minimum support on the sphere."""
        return _min_sphere_support(self) > 0

    def require_origin_interior(self):
        if not self._origin_ok():
            raise DomainError(f"{type(self).__name__}: the origin is not an interior point")

    def _origin_ok(self):
        cached = getattr(self, "_origin_cache", None)
        if cached is None:
            cached = bool(self.origin_interior())
            object.__setattr__(self, "_origin_cache", cached)
        return cached

    def _volume(self):
        raise DomainError(f"no exact volume for {type(self).__name__}")

    def bounding_box(self):
        """Axis-aligned bounding box from support values along the axes."""
        e = np.eye(self.dim)
        hi = self.support(e).value
        lo = -self.support(-e).value
        return lo, hi

    def is_symmetric(self, samples=256, seed=0, tol=1e-9):
        """Whether h(w) = h(-w) on random directions (central symmetry)."""
        u = np.random.default_rng(seed).normal(size=(samples, self.dim))
        a, b = self.support(u).value, self.support(-u).value
        return bool(np.all(np.abs(a - b) <= tol * (1 + np.abs(a))))

    def is_tau0_invariant(self, samples=256, seed=0, tol=1e-9):
        """Whether the body is invariant under (q, p) -> (q, -p)."""
        u = np.random.default_rng(seed).normal(size=(samples, self.dim))
        n = self.dim // 2
        v = u.copy()
        v[:, n:] *= -1
        a, b = self.support(u).value, self.support(v).value
        return bool(np.all(np.abs(a - b) <= tol * (1 + np.abs(a))))

    # operator sugar
    def __mul__(self, lam):
        return Scale(lam, self)

    __rmul__ = __mul__

    def __add__(self, shift):
        return Translate(shift, self)


def _min_sphere_support(body, samples=512, seed=12345):
    """Minimum of h over the unit sphere, refined locally from the best samples."""
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(samples, body.dim))
    u = np.vstack([np.eye(body.dim), -np.eye(body.dim), u])
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    h = body.support(u).value
    best = float(h.min())
    for i in np.argsort(h)[:3]:
        res = minimize(lambda y: body.support(y / np.linalg.norm(y)).value.item(), u[i],
                       method="Nelder-Mead", options=dict(xatol=1e-10, fatol=1e-12, maxiter=400))
        best = min(best, float(res.fun))
    return best


def _generic_gauge(body, z):
    """Gauge through the polar: j(z) = max{<z, y> : h(y) <= 1}."""
    flat = z.reshape(-1, body.dim)
    vals = np.empty(flat.shape[0])
    grads = np.empty_like(flat)
    for i, zi in enumerate(flat):
        nz = np.linalg.norm(zi)
        if nz == 0:
            vals[i] = 0.0
            grads[i] = 0.0
            continue
        y0 = zi / body.support(zi).value.item()
        cons = {"type": "ineq",
                "fun": lambda y: 1.0 - body.support(y).value.item(),
                "jac": lambda y: -body.support(y).subgradient}
        res = minimize(lambda y: (-zi @ y, -zi), y0, jac=True, method="SLSQP",
                       constraints=[cons], options=dict(ftol=1e-14, maxiter=500))
        y = res.x / max(body.support(res.x).value.item(), 1.0)
        vals[i] = zi @ y
        grads[i] = y
    return vals.reshape(z.shape[:-1]), grads.reshape(z.shape)


# ---------------------------------------------------------------------------
# leaves
# ---------------------------------------------------------------------------
class AxisEllipsoid(Body):
    """Axis-aligned ellipsoid sum_i x_i^2 / a_i^2 <= 1 in any dimension."""

    def __init__(self, semi_axes):
        a = np.asarray(semi_axes, dtype=float).ravel()
        if a.size == 0 or np.any(~np.isfinite(a)) or np.any(a <= 0):
            raise DomainError("semi-axes must be positive and finite")
        self.axes = a
        self.dim = a.size

    def _support(self, w, mu):
        r, g = _norm(w * self.axes, mu * float(self.axes.max()))
        return r, g * self.axes

    def _gauge(self, z, mu):
        r, g = _norm(z / self.axes)
        return r, g / self.axes

    def origin_interior(self):
        return True

    def _volume(self):
        d = self.dim
        return pi ** (d / 2) / gamma(d / 2 + 1) * float(np.prod(self.axes))


class Ellipsoid(AxisEllipsoid):
    """Symplectic ellipsoid sum_i (q_i^2 + p_i^2) / r_i^2 <= 1 in R^{2n}."""

    def __init__(self, radii):
        r = np.asarray(radii, dtype=float).ravel()
        if r.size == 0 or np.any(~np.isfinite(r)) or np.any(r <= 0):
            raise DomainError("radii must be positive and finite")
        self.radii = r
        super().__init__(np.concatenate([r, r]))

    def _volume(self):
        n = self.radii.size
        return pi ** n / factorial(n) * float(np.prod(self.radii ** 2))


class Ball(Body):
    """Euclidean ball of given center and radius."""

    def __init__(self, center, radius):
        c = np.asarray(center, dtype=float).ravel()
        if c.size == 0 or not np.isfinite(radius) or radius <= 0:
            raise DomainError("ball needs a nonempty center and a positive radius")
        self.center = c
        self.radius = float(radius)
        self.dim = c.size

    def _support(self, w, mu):
        r, g = _norm(w, mu)
        return self.radius * r + w @ self.center, self.radius * g + self.center

    def _gauge(self, z, mu):
        c, R = self.center, self.radius
        zz = np.sum(z * z, axis=-1)
        zc = z @ c
        disc = zc * zc + zz * (R * R - c @ c)
        s = np.where(zz > 0, (zc + np.sqrt(np.maximum(disc, 0))) / np.maximum(zz, _TINY), np.inf)
        val = np.where(zz > 0, 1.0 / s, 0.0)
        y = z * np.where(zz > 0, s, 0.0)[..., None]
        nrm = y - c
        den = np.sum(nrm * y, axis=-1)
        g = np.where((zz > 0)[..., None], nrm / np.maximum(den, _TINY)[..., None], 0.0)
        return val, g

    def contains(self, z, tol=0.0):
        z = _as_batch(z, self.dim)
        return np.linalg.norm(z - self.center, axis=-1) <= self.radius * (1 + tol)

    def origin_interior(self):
        return bool(np.linalg.norm(self.center) < self.radius)

    def _volume(self):
        d = self.dim
        return pi ** (d / 2) / gamma(d / 2 + 1) * self.radius ** d


class Box(Body):
    """Axis-aligned box prod_i [lo_i, hi_i]."""

    def __init__(self, lo, hi, intervals=None):
        lo = np.asarray(lo, dtype=float).ravel()
        hi = np.asarray(hi, dtype=float).ravel()
        if lo.shape != hi.shape or lo.size == 0 or np.any(~(lo < hi)):
            raise DomainError("box needs lo < hi componentwise")
        self.lo, self.hi = lo, hi
        self.dim = lo.size
        self.intervals = intervals

    @classmethod
    def from_intervals(cls, intervals):
        """Box prod_i (a_i, b_i) x (-c_i, d_i) in R^{2n} with q-block then p-block.

        Parameters
        ----------
        intervals : sequence of n quadruples (a_i, b_i, c_i, d_i)
        """
        iv = np.asarray(intervals, dtype=float)
        if iv.ndim != 2 or iv.shape[1] != 4 or iv.shape[0] == 0:
            raise SchemaError("box intervals must be a list of (a, b, c, d) quadruples")
        a, b, c, d = iv.T
        if np.any(a >= b) or np.any(c + d <= 0):
            raise DomainError("box intervals need a < b and -c < d")
        return cls(np.concatenate([a, -c]), np.concatenate([b, d]), intervals=iv)

    def _support(self, w, mu):
        if mu > 0:
            mid, rad = 0.5 * (self.hi + self.lo), 0.5 * (self.hi - self.lo)
            s = np.sqrt(w * w + mu * mu)
            return np.sum(mid * w + rad * s, axis=-1), mid + rad * w / s
        x = np.where(w > 0, self.hi, self.lo)
        return np.sum(x * w, axis=-1), x

    def _gauge(self, z, mu):
        cand = np.stack([z / self.hi, z / self.lo], axis=-1)  # (..., d, 2)
        vals = cand.reshape(*z.shape[:-1], 2 * self.dim)
        eye = np.eye(self.dim)
        grads = np.stack([eye / self.hi[:, None], eye / self.lo[:, None]], axis=1).reshape(2 * self.dim, self.dim)
        grads = np.broadcast_to(grads, (*z.shape[:-1], 2 * self.dim, self.dim))
        return _smooth_max(vals, grads, mu * float(np.max(1.0 / np.minimum(self.hi, -self.lo))))

    def contains(self, z, tol=0.0):
        z = _as_batch(z, self.dim)
        pad = tol * (self.hi - self.lo)
        return np.all((z >= self.lo - pad) & (z <= self.hi + pad), axis=-1)

    def origin_interior(self):
        return bool(np.all(self.lo < 0) and np.all(self.hi > 0))

    def _volume(self):
        return float(np.prod(self.hi - self.lo))


class Polydisc(Body):
    """Product of discs B^2(r_i) in the (q_i, p_i) planes of R^{2n}."""

    def __init__(self, radii):
        r = np.asarray(radii, dtype=float).ravel()
        if r.size == 0 or np.any(~np.isfinite(r)) or np.any(r <= 0):
            raise DomainError("radii must be positive and finite")
        self.radii = r
        self.dim = 2 * r.size

    def _planes(self, v):
        n = self.radii.size
        return np.stack([v[..., :n], v[..., n:]], axis=-1)  # (..., n, 2)

    def _unplanes(self, g):
        return np.concatenate([g[..., 0], g[..., 1]], axis=-1)

    def _support(self, w, mu):
        r, g = _norm(self._planes(w), mu)
        return np.sum(self.radii * r, axis=-1), self._unplanes(self.radii[:, None] * g)

    def _gauge(self, z, mu):
        n = self.radii.size
        r, g = _norm(self._planes(z))
        vals = r / self.radii
        gp = g / self.radii[:, None]  # (..., n, 2)
        grads = np.zeros((*z.shape[:-1], n, 2 * n))
        idx = np.arange(n)
        grads[..., idx, idx] = gp[..., 0]
        grads[..., idx, n + idx] = gp[..., 1]
        return _smooth_max(vals, grads, mu * float(np.max(1 / self.radii)) if mu > 0 else 0.0)

    def origin_interior(self):
        return True

    def _volume(self):
        return pi ** self.radii.size * float(np.prod(self.radii ** 2))


class VertexPolytope(Body):
    """Convex hull of a vertex list, optionally closed under x -> -x.

    Vertices are sorted lexicographically so that ties in the support
    function resolve to the lexicographically first maximizing vertex.
    """

    def __init__(self, vertices, symmetric=False):
        v = np.atleast_2d(np.asarray(vertices, dtype=float))
        if v.ndim != 2 or v.shape[0] == 0:
            raise SchemaError("vertices must be a nonempty list of points")
        self.given = v.copy()
        self.symmetric = bool(symmetric)
        if self.symmetric:
            v = np.vstack([v, -v])
        v = np.unique(v, axis=0)  # lexicographic order
        self.vertices = v
        self.dim = v.shape[1]
        self._scale = float(np.max(np.linalg.norm(v, axis=1)))

    def _support(self, w, mu):
        vals = w @ self.vertices.T
        if mu > 0:
            t = mu * self._scale
            return t * logsumexp(vals / t, axis=-1), softmax(vals / t, axis=-1) @ self.vertices
        i = np.argmax(vals, axis=-1)
        return np.take_along_axis(vals, i[..., None], -1)[..., 0], self.vertices[i]

    def _gauge(self, z, mu):
        # dual LP: max <z, y> subject to <v_i, y> <= 1
        flat = z.reshape(-1, self.dim)
        vals = np.empty(flat.shape[0])
        grads = np.empty_like(flat)
        ones = np.ones(self.vertices.shape[0])
        for i, zi in enumerate(flat):
            res = linprog(-zi, A_ub=self.vertices, b_ub=ones, bounds=[(None, None)] * self.dim, method="highs")
            if res.status != 0:
                raise DomainError("polytope gauge LP failed; is the origin interior?")
            vals[i] = -res.fun
            grads[i] = res.x
        return vals.reshape(z.shape[:-1]), grads.reshape(z.shape)

    def contains(self, z, tol=0.0):
        z = _as_batch(z, self.dim)
        return self._gauge(z, 0.0)[0] <= 1 + tol

    def origin_interior(self):
        v = self.vertices
        if np.linalg.matrix_rank(v) < self.dim:
            return False
        m = v.shape[0]
        # maximize t with sum l_i v_i = 0, sum l_i = 1, l_i >= t
        c = np.r_[np.zeros(m), -1.0]
        A_eq = np.vstack([np.c_[v.T, np.zeros(self.dim)], np.r_[np.ones(m), 0.0]])
        b_eq = np.r_[np.zeros(self.dim), 1.0]
        A_ub = np.c_[-np.eye(m), np.ones(m)]
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(m), A_eq=A_eq, b_eq=b_eq,
                      bounds=[(0, None)] * m + [(None, None)], method="highs")
        return bool(res.status == 0 and -res.fun > 1e-12)

    def _volume(self):
        return float(ConvexHull(self.vertices).volume)


# ---------------------------------------------------------------------------
# combinators
# ---------------------------------------------------------------------------
class Product(Body):
    """Symplectic product D_1 x D_2 with coordinates (q^(1), q^(2), p^(1), p^(2))."""

    def __init__(self, left, right):
        if left.dim % 2 or right.dim % 2:
            raise SchemaError("product factors must live in even dimensions")
        self.left, self.right = left, right
        self.n1, self.n2 = left.dim // 2, right.dim // 2
        self.dim = left.dim + right.dim

    def split(self, v):
        n1, n2 = self.n1, self.n2
        n = n1 + n2
        a = np.concatenate([v[..., :n1], v[..., n:n + n1]], axis=-1)
        b = np.concatenate([v[..., n1:n], v[..., n + n1:]], axis=-1)
        return a, b

    def join(self, a, b):
        n1 = self.n1
        return np.concatenate([a[..., :n1], b[..., :self.n2], a[..., n1:], b[..., self.n2:]], axis=-1)

    def _support(self, w, mu):
        a, b = self.split(w)
        ha, ga = self.left._support(a, mu)
        hb, gb = self.right._support(b, mu)
        return ha + hb, self.join(ga, gb)

    def _gauge(self, z, mu):
        a, b = self.split(z)
        ja, ga = self.left._gauge(a, mu)
        jb, gb = self.right._gauge(b, mu)
        grads = np.stack([self.join(ga, np.zeros_like(gb)), self.join(np.zeros_like(ga), gb)], axis=-2)
        return _smooth_max(np.stack([ja, jb], -1), grads, mu)

    def contains(self, z, tol=0.0):
        z = _as_batch(z, self.dim)
        a, b = self.split(z)
        return self.left.contains(a, tol) & self.right.contains(b, tol)

    def origin_interior(self):
        return self.left._origin_ok() and self.right._origin_ok()

    def require_origin_interior(self):
        self.left.require_origin_interior()
        self.right.require_origin_interior()

    def _volume(self):
        return volume(self.left)[0] * volume(self.right)[0]


class LagrangianProduct(Product):
    """Product Delta x Lambda of a body in R^n_q and a body in R^n_p."""

    def __init__(self, q_body, p_body):
        if q_body.dim != p_body.dim:
            raise SchemaError("Lagrangian product factors must have equal dimension")
        self.left, self.right = q_body, p_body
        self.dim = 2 * q_body.dim
        self.n1 = q_body.dim

    def split(self, v):
        return v[..., :self.n1], v[..., self.n1:]

    def join(self, a, b):
        return np.concatenate([a, b], axis=-1)


class Polar(Body):
    """Polar body {y : <x, y> <= 1 for x in K}; support and gauge swap roles."""

    def __init__(self, body):
        body.require_origin_interior()
        self.body = body
        self.dim = body.dim

    def _support(self, w, mu):
        return self.body._gauge(w, mu)

    def _gauge(self, z, mu):
        return self.body._support(z, mu)

    def contains(self, z, tol=0.0):
        z = _as_batch(z, self.dim)
        return self.body._support(z, 0.0)[0] <= 1 + tol

    def origin_interior(self):
        return True

    def _volume(self):
        if isinstance(self.body, Ball) and not np.any(self.body.center):
            return Ball(self.body.center, 1 / self.body.radius)._volume()
        if isinstance(self.body, AxisEllipsoid):
            return AxisEllipsoid(1 / self.body.axes)._volume()
        return super()._volume()


class PSum(Body):
    """Firey p-sum with support (h_D^p + h_K^p)^{1/p}."""

    def __init__(self, p, left, right):
        if not np.isfinite(p) or p < 1:
            raise DomainError("p-sum needs p >= 1")
        if left.dim != right.dim:
            raise SchemaError("p-sum operands must have equal dimension")
        if p > 1:
            left.require_origin_interior()
            right.require_origin_interior()
        self.p = float(p)
        self.left, self.right = left, right
        self.dim = left.dim

    def _support(self, w, mu):
        ha, ga = self.left._support(w, mu)
        hb, gb = self.right._support(w, mu)
        p = self.p
        if p == 1:
            return ha + hb, ga + gb
        ha, hb = np.maximum(ha, 0), np.maximum(hb, 0)
        h = (ha ** p + hb ** p) ** (1 / p)
        hs = np.maximum(h, _TINY) ** (p - 1)
        g = ((ha ** (p - 1))[..., None] * ga + (hb ** (p - 1))[..., None] * gb) / hs[..., None]
        return h, g


class Scale(Body):
    """Dilation lam * K with lam > 0."""

    def __init__(self, factor, body):
        if not np.isfinite(factor) or factor <= 0:
            raise DomainError("scale factor must be positive")
        self.factor = float(factor)
        self.body = body
        self.dim = body.dim

    def _support(self, w, mu):
        h, g = self.body._support(w, mu)
        return self.factor * h, self.factor * g

    def _gauge(self, z, mu):
        j, g = self.body._gauge(z, mu)
        return j / self.factor, g / self.factor

    def contains(self, z, tol=0.0):
        return self.body.contains(np.asarray(z, float) / self.factor, tol)

    def origin_interior(self):
        return self.body._origin_ok()

    def _volume(self):
        return self.factor ** self.dim * volume(self.body)[0]


class Translate(Body):
    """Translate K + s.

    Translates of boxes, balls and translates are folded into a single leaf
    so that gauges stay in closed form.
    """

    def __init__(self, shift, body):
        s = np.asarray(shift, dtype=float).ravel()
        if s.size != body.dim:
            raise SchemaError("shift dimension does not match the body")
        self.shift = s
        self.body = body
        self.dim = body.dim
        self._folded = _fold_translation(s, body)

    def _support(self, w, mu):
        if self._folded is not None:
            return self._folded._support(w, mu)
        h, g = self.body._support(w, mu)
        return h + w @ self.shift, g + self.shift

    def _gauge(self, z, mu):
        if self._folded is not None:
            return self._folded._gauge(z, mu)
        inner = self.body
        if not inner._origin_ok():
            return _generic_gauge(self, z)
        flat = z.reshape(-1, self.dim)
        vals = np.zeros(flat.shape[0])
        grads = np.zeros_like(flat)
        for i, zi in enumerate(flat):
            if not np.any(zi):
                continue
            phi = lambda t: inner._gauge(t * zi - self.shift, 0.0)[0] - 1.0
            hi = 1.0
            while phi(hi) < 0:
                hi *= 2.0
            t = brentq(phi, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
            y = t * zi
            nrm = inner._gauge(y - self.shift, 0.0)[1]
            vals[i] = 1.0 / t
            grads[i] = nrm / (nrm @ y)
        return vals.reshape(z.shape[:-1]), grads.reshape(z.shape)

    def contains(self, z, tol=0.0):
        if self._folded is not None:
            return self._folded.contains(z, tol)
        return self.body.contains(np.asarray(z, float) - self.shift, tol)

    def origin_interior(self):
        if self._folded is not None:
            return self._folded.origin_interior()
        inner = self.body
        if inner._origin_ok():
            return bool(inner._gauge(-self.shift, 0.0)[0] < 1.0)
        return super().origin_interior()

    def _volume(self):
        return volume(self.body)[0]


def _fold_translation(s, body):
    if isinstance(body, Translate):
        return Translate(s + body.shift, body.body)._folded
    if isinstance(body, Box):
        return Box(body.lo + s, body.hi + s)
    if isinstance(body, Ball):
        return Ball(body.center + s, body.radius)
    return None


class SymmDiff(Body):
    """Difference body K - K."""

    def __init__(self, body):
        self.body = body
        self.dim = body.dim

    def _support(self, w, mu):
        ha, ga = self.body._support(w, mu)
        hb, gb = self.body._support(-w, mu)
        return ha + hb, ga - gb


# ---------------------------------------------------------------------------
# module level operations
# ---------------------------------------------------------------------------
def support(body, w, mu=0.0):
    """Support function of ``body``; see :meth:`Body.support`."""
    return body.support(w, mu)


def gauge(body, z, mu=0.0):
    """Minkowski gauge of ``body``; see :meth:`Body.gauge`."""
    return body.gauge(z, mu)


def legendre_dual(body, w, mu=0.0):
    """Legendre transform of the squared gauge, H*(w) = (h(w) / 2)^2.

    Parameters
    ----------
    body : Body
    w : array_like, shape (..., dim)

    Returns
    -------
    GaugeEval
        Value and gradient (h / 2) * dh.
    """
    body.require_origin_interior()
    h, g = body.support(w, mu)
    return GaugeEval(0.25 * h * h, 0.5 * h[..., None] * g)


def _monte_carlo(body, seed, samples, batch=200_000, half=None):
    if samples < 1000:
        raise DomainError("Monte Carlo volume needs at least 1000 samples")
    lo, hi = body.bounding_box()
    if half is not None:
        if half > 0:
            lo[-1] = max(lo[-1], 0.0)
        else:
            hi[-1] = min(hi[-1], 0.0)
        if hi[-1] <= lo[-1]:
            return 0.0, 0.0
    box = float(np.prod(hi - lo))
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        z = lo + (hi - lo) * rng.random((m, body.dim))
        hits += int(np.count_nonzero(body.contains(z)))
        done += m
    frac = hits / samples
    return box * frac, box * np.sqrt(frac * (1 - frac) / samples)


def volume(body, mode="exact", seed=0, samples=1_000_000):
    """Euclidean volume.

    Parameters
    ----------
    body : Body
    mode : {'exact', 'monte_carlo'}
    seed : int
        Generator seed for Monte Carlo.
    samples : int
        Number of Monte Carlo samples, at least 1000.

    Returns
    -------
    value : float
    stderr : float
        Zero in exact mode.
    """
    if mode == "exact":
        return float(body._volume()), 0.0
    if mode == "monte_carlo":
        return _monte_carlo(body, seed, samples)
    raise SchemaError(f"unknown volume mode {mode!r}")


def _double_factorial(m):
    """m!! with the conventions (-1)!! = 0!! = 1."""
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def ball_cap_volume(n, a, R=1.0):
    """Volume of {x in B^{2n}(0, R) : x_{2n} <= -a} for 0 <= a < R.

    This is the smaller half of a ball whose center sits at height ``a`` above
    the hyperplane p_n = 0.
    """
    if not 0 <= a < R:
        raise DomainError("cap height must satisfy 0 <= a < R")
    r = np.sqrt(1 - (a / R) ** 2)
    th = np.arcsin(r)
    s = 0.0
    for j in range(n):
        s += _double_factorial(2 * n - 2 * j - 2) / _double_factorial(2 * n - 2 * j - 1) * np.sin(th) ** (2 * n - 2 * j - 1)
    return pi ** (n - 1) / factorial(n) * (th - np.cos(th) * s) * R ** (2 * n)


def volume_half(body, sign, mode="exact", seed=0, samples=1_000_000):
    """Volume of the part of ``body`` with sign * p_n >= 0.

    Parameters
    ----------
    body : Body
        Body in R^{2n}.
    sign : {+1, -1}
    mode, seed, samples
        As in :func:`volume`.

    Returns
    -------
    value : float
    stderr : float
    """
    if sign not in (1, -1):
        raise SchemaError("sign must be +1 or -1")
    if mode == "monte_carlo":
        return _monte_carlo(body, seed, samples, half=sign)
    if mode != "exact":
        raise SchemaError(f"unknown volume mode {mode!r}")
    if isinstance(body, Ball):
        n = body.dim // 2
        a = body.center[-1] * sign  # height of the center inside the kept side
        total = body._volume()
        if abs(a) >= body.radius:
            return (total if a > 0 else 0.0), 0.0
        cap = ball_cap_volume(n, abs(a), body.radius)
        return (total - cap if a >= 0 else cap), 0.0
    if isinstance(body, (AxisEllipsoid, Polydisc)):
        return 0.5 * body._volume(), 0.0
    if isinstance(body, Box):
        lo, hi = body.lo.copy(), body.hi.copy()
        if sign > 0:
            lo[-1] = max(lo[-1], 0.0)
        else:
            hi[-1] = min(hi[-1], 0.0)
        return float(np.prod(np.maximum(hi - lo, 0.0))), 0.0
    if isinstance(body, Scale):
        v, e = volume_half(body.body, sign, mode, seed, samples)
        f = body.factor ** body.dim
        return f * v, f * e
    if body.is_tau0_invariant():
        return 0.5 * volume(body)[0], 0.0
    raise DomainError(f"no exact half volume for {type(body).__name__}")


def mean_width_symmetrized(body, seed=0, samples=200_000):
    """Mean over uniform unit directions of the support of (K + (-K)) / 2.

    Parameters
    ----------
    body : Body
        Body in R^m for any m.
    seed : int
    samples : int
        At least 1000.

    Returns
    -------
    value : float
    stderr : float
    """
    if samples < 1000:
        raise DomainError("Monte Carlo mean width needs at least 1000 samples")
    u = np.random.default_rng(seed).normal(size=(samples, body.dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    h = 0.5 * (body.support(u).value + body.support(-u).value)
    return float(h.mean()), float(h.std(ddof=1) / np.sqrt(samples))
