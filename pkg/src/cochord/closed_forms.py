"""Exact capacity values for bodies with known closed forms.

Minima over empty index sets are +inf throughout, so one formula covers every
coisotropic index 0 <= k <= n. The index k = n gives the Hofer-Zehnder
capacity.
"""
from dataclasses import dataclass, field
from math import asin, inf, pi, sqrt

import numpy as np

from .convex_bodies import (AxisEllipsoid, Ball, Box, Ellipsoid, LagrangianProduct, Polar, Polydisc,
                            Product, PSum, Scale, Translate, VertexPolytope)
from .errors import DomainError, SchemaError
from .symplectic_core import Frame


@dataclass(frozen=True)
class ClosedFormResult:
    """Closed-form capacity with the formula used and the hypotheses checked.

    ``relation`` is ``'eq'`` for exact values and ``'ge'`` or ``'le'`` when only a
    bound is known.
    """

    value: float
    formula_id: str
    assumptions: tuple = ()
    relation: str = "eq"


def _min(vals):
    vals = list(vals)
    return min(vals) if vals else inf


def _positive(radii, n):
    r = np.asarray(radii, dtype=float).ravel()
    if r.size != n:
        raise SchemaError(f"expected {n} radii, got {r.size}")
    if np.any(~(r > 0)) or np.any(~np.isfinite(r)):
        raise DomainError("radii must be positive and finite")
    return r


def ellipsoid_capacity(frame, radii):
    """Capacity of E(r) = {sum (q_i^2 + p_i^2) / r_i^2 < 1}.

    Returns (pi / 2) min{2 min_{i<=k} r_i^2, min_{i>k} r_i^2}, which equals
    pi min r_i^2 at k = n.
    """
    r = _positive(radii, frame.n)
    k = frame.k
    v = 0.5 * pi * min(2 * _min(r[:k] ** 2), _min(r[k:] ** 2))
    return ClosedFormResult(v, "ellipsoid", ("radii > 0",))


def polydisc_capacity(frame, radii):
    """Capacity of the polydisc prod_i B^2(r_i); same value as the ellipsoid."""
    r = _positive(radii, frame.n)
    k = frame.k
    v = 0.5 * pi * min(2 * _min(r[:k] ** 2), _min(r[k:] ** 2))
    return ClosedFormResult(v, "polydisc", ("radii > 0",))


def offcenter_ball_capacity(frame, a, R=1.0):
    """Capacity of the ball of radius R centered at (0, .., 0, a), for k < n.

    Returns (arcsin(r) - r sqrt(1 - r^2)) R^2 with r = sqrt(1 - a^2 / R^2).
    """
    if frame.periodic:
        raise DomainError("the off-center formula needs k < n")
    if not R > 0 or not abs(a) < R:
        raise DomainError("need R > 0 and |a| < R")
    r = sqrt(1 - (a / R) ** 2)
    v = (asin(r) - r * sqrt(max(0.0, 1 - r * r))) * R * R
    return ClosedFormResult(v, "offcenter_ball", ("|a| < R", "k < n"))


def box_capacity(frame, intervals):
    """Capacity of prod_i (a_i, b_i) x (-c_i, d_i).

    Returns min{min_{i<=k} (b_i - a_i)(c_i + d_i), min_{i>k} (b_i - a_i) min(c_i, d_i)}.
    """
    iv = np.asarray(intervals, dtype=float)
    if iv.shape != (frame.n, 4):
        raise SchemaError(f"expected {frame.n} interval quadruples")
    a, b, c, d = iv.T
    if np.any(a >= b) or np.any(c <= 0) or np.any(d <= 0):
        raise DomainError("box intervals need a < b, c > 0 and d > 0")
    k = frame.k
    v = min(_min((b - a)[:k] * (c + d)[:k]), _min((b - a)[k:] * np.minimum(c, d)[k:]))
    return ClosedFormResult(float(v), "box", ("a < b", "c, d > 0"))


def product_indices(k, dims):
    """Coisotropic indices of the factors of a symplectic product.

    Uses l_0 = k, l_j = max(l_{j-1} - n_j, 0) and assigns min(n_i, l_{i-1}) to factor i.
    """
    out, left = [], k
    for ni in dims:
        out.append(min(ni, left))
        left = max(left - ni, 0)
    return out


def product_capacity(frame, factors):
    """Capacity of a symplectic product from the capacities of its factors.

    Parameters
    ----------
    frame : Frame
    factors : sequence of Body
        Factors in order, each with a closed form at every index.

    Returns
    -------
    ClosedFormResult
        Minimum over factors of the factor capacity at its assigned index.
    """
    dims = [f.dim // 2 for f in factors]
    if sum(dims) != frame.n:
        raise SchemaError("factor dimensions do not add up to n")
    vals = []
    for f, ni, ki in zip(factors, dims, product_indices(frame.k, dims)):
        vals.append(closed_form_capacity(f, Frame(ni, ki)).value)
    return ClosedFormResult(min(vals), "product", ("factors contain 0",))


def lagrangian_product_capacity(frame, delta):
    """Capacity of Delta x Delta° for a centrally symmetric Delta in R^n_q.

    Returns 2 for k < n and 4 at k = n.
    """
    if delta.dim != frame.n:
        raise SchemaError("Delta must live in R^n")
    if not delta.is_symmetric():
        raise DomainError("Delta must be centrally symmetric")
    delta.require_origin_interior()
    return ClosedFormResult(4.0 if frame.periodic else 2.0, "lagrangian_product",
                            ("Delta centrally symmetric", "0 interior"))


def known_constants(name, frame):
    """Documented capacities of the unbounded model domains U and W, both pi / 2."""
    if name not in ("U_capacity", "W_capacity"):
        raise SchemaError(f"unknown constant {name!r}")
    if frame.periodic:
        raise DomainError("constants are defined for k < n only")
    return ClosedFormResult(pi / 2, name, ("k < n",))


def _ball_capacity(body, frame):
    """Ball with any center: reduce to the off-center formula."""
    c, R = body.center, body.radius
    off = float(np.linalg.norm(c[frame.mask("JV0")]))
    if off >= R:
        raise DomainError("the ball does not meet R^{n,k}")
    if frame.periodic:
        return ClosedFormResult(pi * R * R, "ellipsoid", ("k = n",))
    res = offcenter_ball_capacity(frame, off, R)
    return res


def _is_polar_pair(q_body, p_body, samples=128, seed=3):
    if isinstance(p_body, Polar):
        return p_body.body is q_body or p_body.body == q_body
    u = np.random.default_rng(seed).normal(size=(samples, q_body.dim))
    try:
        a = p_body.support(u).value
        b = q_body.gauge(u).value
    except DomainError:
        return False
    return bool(np.allclose(a, b, rtol=1e-9, atol=1e-12))


def _lagrangian(body, frame):
    q, p = body.left, body.right
    if _is_polar_pair(q, p):
        return lagrangian_product_capacity(frame, q)
    if frame.n == 2 and isinstance(q, AxisEllipsoid) and isinstance(p, AxisEllipsoid) and not isinstance(q, Ellipsoid):
        if np.allclose(np.sort(q.axes), [1, 2]) and np.allclose(p.axes, [1, 1]) and q.axes[0] == 1:
            if frame.k == 0:
                return ClosedFormResult(2.0, "example_ellipse_disc")
            if frame.k == 2:
                return ClosedFormResult(4.0, "example_ellipse_disc")
            return ClosedFormResult(pi, "example_ellipse_disc", relation="ge")
    raise DomainError("no closed form for this Lagrangian product")


def closed_form_capacity(body, frame):
    """Dispatch to the closed form matching the structure of ``body``.

    Parameters
    ----------
    body : Body
    frame : Frame

    Returns
    -------
    ClosedFormResult

    Raises
    ------
    DomainError
        When no closed form applies.
    """
    if body.dim != frame.dim:
        raise SchemaError(f"body dimension {body.dim} does not match frame dimension {frame.dim}")
    if isinstance(body, Ellipsoid):
        return ellipsoid_capacity(frame, body.radii)
    if isinstance(body, AxisEllipsoid):
        n = frame.n
        if np.allclose(body.axes[:n], body.axes[n:]):
            return ellipsoid_capacity(frame, body.axes[:n])
        raise DomainError("no closed form for a non-symplectic ellipsoid")
    if isinstance(body, Polydisc):
        return polydisc_capacity(frame, body.radii)
    if isinstance(body, Box):
        n = frame.n
        iv = np.stack([body.lo[:n], body.hi[:n], -body.lo[n:], body.hi[n:]], axis=1)
        return box_capacity(frame, iv)
    if isinstance(body, Ball):
        return _ball_capacity(body, frame)
    if isinstance(body, Scale):
        r = closed_form_capacity(body.body, frame)
        return ClosedFormResult(body.factor ** 2 * r.value, r.formula_id, r.assumptions + ("conformality",), r.relation)
    if isinstance(body, Translate):
        s = body.shift
        if np.any(s[frame.mask("JV0")]):
            if isinstance(body.body, Ball):
                return _ball_capacity(Ball(body.body.center + s, body.body.radius), frame)
            raise DomainError("closed forms need translations inside R^{n,k}")
        r = closed_form_capacity(body.body, frame)
        return ClosedFormResult(r.value, r.formula_id, r.assumptions + ("translation in R^{n,k}",), r.relation)
    if isinstance(body, PSum):
        return _psum(body, frame)
    if isinstance(body, LagrangianProduct):
        return _lagrangian(body, frame)
    if isinstance(body, Product):
        return product_capacity(frame, _flatten_product(body))
    raise DomainError(f"no closed form for {type(body).__name__}")


def _homothety(body):
    """Write ``body`` as factor * base, with centered balls sharing one base."""
    f = 1.0
    while isinstance(body, Scale):
        f *= body.factor
        body = body.body
    if isinstance(body, Ball) and not np.any(body.center):
        return f * body.radius, ("ball", body.dim)
    return f, body


def _psum(body, frame):
    """p-sum of two dilates of one body, itself a dilate of that body."""
    fa, ba = _homothety(body.left)
    fb, bb = _homothety(body.right)
    if not (ba is bb or ba == bb):
        raise DomainError("no closed form for a p-sum of non-homothetic bodies")
    f = (fa ** body.p + fb ** body.p) ** (1 / body.p)
    base = Ball(np.zeros(ba[1]), 1.0) if isinstance(ba, tuple) else ba
    r = closed_form_capacity(Scale(f, base), frame)
    return ClosedFormResult(r.value, r.formula_id, r.assumptions + ("homothetic p-sum",), r.relation)


def _flatten_product(body):
    if isinstance(body, Product) and not isinstance(body, LagrangianProduct):
        return _flatten_product(body.left) + _flatten_product(body.right)
    return [body]


@dataclass(frozen=True)
class CatalogEntry:
    """A named body with a frame and its exact value or bound."""

    name: str
    body: object
    frame: Frame
    value: float
    relation: str = "eq"
    formula_id: str = ""
    tags: tuple = field(default_factory=tuple)


def ellipse_disc_example():
    """E^2(1, 2) x D^2(1): an ellipse in R^2_q times the unit disc in R^2_p."""
    return LagrangianProduct(AxisEllipsoid([1.0, 2.0]), AxisEllipsoid([1.0, 1.0]))


def cube_cross(n=2):
    """Cube [-1, 1]^n in R^n_q times its polar cross-polytope in R^n_p."""
    cube = Box(-np.ones(n), np.ones(n))
    cross = VertexPolytope(np.eye(n), symmetric=True)
    return LagrangianProduct(cube, cross)


def example_bodies_catalog():
    """Worked examples with exact values or one-sided bounds.

    Returns
    -------
    list of CatalogEntry
    """
    out = []
    ed = ellipse_disc_example()
    out.append(CatalogEntry("ellipse_disc_k0", ed, Frame(2, 0), 2.0, "eq", "example_ellipse_disc"))
    out.append(CatalogEntry("ellipse_disc_k2", ed, Frame(2, 2), 4.0, "eq", "example_ellipse_disc"))
    out.append(CatalogEntry("ellipse_disc_k1", ed, Frame(2, 1), pi, "ge", "example_ellipse_disc"))
    cc = cube_cross(2)
    for k in range(3):
        out.append(CatalogEntry(f"cube_cross_k{k}", cc, Frame(2, k), 4.0 if k == 2 else 2.0, "eq",
                                "lagrangian_product"))
    for n in (1, 2, 3):
        for k in range(n + 1):
            b = Ball(np.zeros(2 * n), 1.0)
            out.append(CatalogEntry(f"ball{n}_k{k}", b, Frame(n, k), pi if k == n else pi / 2, "eq",
                                    "ellipsoid"))
    for radii in ([1.0, 2.0], [1.0, sqrt(2)], [2.0, 1.0]):
        for k in range(3):
            f = Frame(2, k)
            out.append(CatalogEntry(f"ellipsoid{radii}_k{k}", Ellipsoid(radii), f,
                                    ellipsoid_capacity(f, radii).value, "eq", "ellipsoid"))
            out.append(CatalogEntry(f"polydisc{radii}_k{k}", Polydisc(radii), f,
                                    polydisc_capacity(f, radii).value, "eq", "polydisc"))
    for iv in ([(0, 2, 1, 3)], [(0, 1, 1, 1), (0, 2, 1, 3)], [(-1, 1, 1, 1), (-1, 1, 1, 1)]):
        n = len(iv)
        for k in range(n + 1):
            f = Frame(n, k)
            out.append(CatalogEntry(f"box{n}_{iv}_k{k}", Box.from_intervals(iv), f,
                                    box_capacity(f, iv).value, "eq", "box"))
    for n in (1, 2):
        for a in (-0.5, 0.0, 0.5):
            c = np.zeros(2 * n)
            c[-1] = a
            for k in range(n):
                f = Frame(n, k)
                out.append(CatalogEntry(f"offball{n}_a{a}_k{k}", Ball(c, 1.0), f,
                                        offcenter_ball_capacity(f, a).value, "eq", "offcenter_ball"))
    return out
