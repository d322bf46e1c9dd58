"""One entry point for capacities: closed form, explicit flow or dual solver."""
from dataclasses import dataclass, field
from math import inf, pi

import numpy as np

from .chord_flow import ball_chord, return_spectrum
from .closed_forms import closed_form_capacity
from .convex_bodies import AxisEllipsoid, Ball, Ellipsoid, Scale, Translate
from .dual_solver import SolveConfig, normalization_point, solve
from .errors import DomainError, SchemaError

METHODS = ("auto", "closed_form", "solver", "flow")


@dataclass
class CapacityResult:
    """Capacity value with provenance.

    ``method`` is one of 'closed-form', 'dual-solver' or 'flow'. ``bracket`` is a
    [lower, upper] interval known to contain the capacity (for the solver the
    lower end comes from the inscribed-ball bound).
    """

    value: float
    method: str
    bracket: tuple
    formula_id: str = ""
    carrier: object = None
    solve_result: object = None
    extra: dict = field(default_factory=dict)


def _flow_capacity(body, frame):
    if isinstance(body, Ellipsoid):
        entries = return_spectrum(frame, body.radii, 10 * pi * float(np.max(body.radii)) ** 2)
        v = entries[0].action
        return CapacityResult(v, "flow", (v, v), "return_spectrum")
    if isinstance(body, AxisEllipsoid) and np.allclose(body.axes[:frame.n], body.axes[frame.n:]):
        return _flow_capacity(Ellipsoid(body.axes[:frame.n]), frame)
    if isinstance(body, Ball):
        c = body.center
        off = float(np.linalg.norm(c[frame.mask("JV0")]))
        if frame.periodic or not np.any(c):
            return _flow_capacity(Ellipsoid(np.full(frame.n, body.radius)), frame)
        ch = ball_chord(frame, off, body.radius)
        return CapacityResult(ch.action, "flow", (ch.action, ch.action), "ball_chord", carrier=ch)
    if isinstance(body, Translate) and not np.any(body.shift[frame.mask("JV0")]):
        return _flow_capacity(body.body, frame)
    if isinstance(body, Scale):
        r = _flow_capacity(body.body, frame)
        f2 = body.factor ** 2
        return CapacityResult(f2 * r.value, "flow", (f2 * r.bracket[0], f2 * r.bracket[1]), r.formula_id)
    raise DomainError("the flow method supports ellipsoids and balls only")


def inscribed_radius(body, frame, seed=0):
    """Radius of a large ball centered in R^{n,k} inside the body, and its center."""
    from .convex_bodies import _min_sphere_support

    z0, _ = normalization_point(body, frame, seed=seed)
    r = _min_sphere_support(Translate(-z0, body))
    return max(r, 0.0), z0


def capacity(body, frame, method="auto", cfg=None):
    """Capacity of ``body`` relative to R^{n,k}.

    Parameters
    ----------
    body : Body
    frame : Frame
    method : {'auto', 'closed_form', 'solver', 'flow'}
        'auto' uses an exact closed form when one applies and the solver
        otherwise.
    cfg : SolveConfig, optional

    Returns
    -------
    CapacityResult
    """
    if method not in METHODS:
        raise SchemaError(f"unknown method {method!r}")
    if body.dim != frame.dim:
        raise SchemaError(f"body dimension {body.dim} does not match frame dimension {frame.dim}")
    if method in ("auto", "closed_form"):
        try:
            r = closed_form_capacity(body, frame)
        except DomainError:
            if method == "closed_form":
                raise
        else:
            if r.relation == "eq" or method == "closed_form":
                br = {"eq": (r.value, r.value), "ge": (r.value, inf), "le": (0.0, r.value)}[r.relation]
                return CapacityResult(r.value, "closed-form", br, r.formula_id, extra={"relation": r.relation})
    if method == "flow":
        return _flow_capacity(body, frame)
    res = solve(body, frame, cfg or SolveConfig())
    rad, _ = inscribed_radius(body, frame, seed=(cfg.seed if cfg else 0))
    lower = pi * rad * rad * (1.0 if frame.periodic else 0.5)
    return CapacityResult(res.capacity, "dual-solver", (min(lower, res.capacity), res.capacity), "dual_solver",
                          carrier=res.carrier, solve_result=res)
