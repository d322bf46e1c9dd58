"""JSON schemas, body serialization and job execution behind the command line."""
import csv
import io
import json
from dataclasses import asdict, replace
from functools import lru_cache
from importlib import resources
from math import pi

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match
from referencing import Registry, Resource

from . import bounds_inequalities as bi
from .capacity import capacity
from .chord_flow import ball_chord, return_spectrum
from .closed_forms import example_bodies_catalog, offcenter_ball_capacity
from .convex_bodies import (AxisEllipsoid, Ball, Box, Ellipsoid, LagrangianProduct, Polar, Polydisc, Product,
                            PSum, Scale, SymmDiff, Translate, VertexPolytope)
from .dual_solver import SolveConfig
from .errors import ConvergenceError, DomainError, SchemaError
from .symplectic_core import Frame

SCHEMAS = ("body.schema.json", "job.schema.json")


# ---------------------------------------------------------------------------
# schemas
# ---------------------------------------------------------------------------
def load_schema(name):
    """Parsed JSON schema shipped with the package."""
    return json.loads(resources.files("cochord").joinpath("schemas", name).read_text())


@lru_cache(maxsize=None)
def _validator(name):
    registry = Registry().with_resources(
        (f"cochord/{s}", Resource.from_contents(load_schema(s))) for s in SCHEMAS)
    return Draft202012Validator(load_schema(name), registry=registry)


def json_pointer(path):
    """RFC 6901 pointer for a sequence of keys and indices."""
    return "/" + "/".join(str(p).replace("~", "~0").replace("/", "~1") for p in path) if path else ""


def validate(doc, name):
    """Raise SchemaError naming the JSON pointer of the most relevant violation."""
    err = best_match(_validator(name).iter_errors(doc))
    if err is not None:
        raise SchemaError(f"{json_pointer(err.absolute_path) or '/'}: {err.message}")


# ---------------------------------------------------------------------------
# body documents
# ---------------------------------------------------------------------------
def fmt_real(x):
    """Decimal string with 17 significant digits, exact for binary64."""
    return format(float(x), ".17g")


def _vec(v):
    return [fmt_real(x) for x in np.asarray(v, float).ravel()]


def _mat(m):
    return [_vec(row) for row in np.asarray(m, float)]


def _real(x, where):
    try:
        return float(x)
    except (TypeError, ValueError):
        raise SchemaError(f"{where}: not a real number: {x!r}") from None


def _arr(v, where):
    return np.array([_real(x, f"{where}/{i}") for i, x in enumerate(v)], float)


def parse_body(doc, n=None):
    """Build a body from its JSON document.

    Parameters
    ----------
    doc : dict
        Document matching ``body.schema.json``.
    n : int, optional
        Half dimension used to expand the ball center shorthand {"a": x}
        when the shorthand does not carry its own ``n``.

    Returns
    -------
    Body

    Raises
    ------
    SchemaError
        On schema violations, with the JSON pointer of the offending node.
    """
    validate(doc, "body.schema.json")
    return _parse(doc, n, "")


def _parse(doc, n, at):
    (kind, v), = doc.items()
    at = f"{at}/{kind}"
    try:
        if kind == "ellipsoid":
            return Ellipsoid(_arr(v["radii"], at + "/radii"))
        if kind == "axis_ellipsoid":
            return AxisEllipsoid(_arr(v["semi_axes"], at + "/semi_axes"))
        if kind == "polydisc":
            return Polydisc(_arr(v["radii"], at + "/radii"))
        if kind == "box":
            if "intervals" in v:
                return Box.from_intervals([_arr(r, f"{at}/intervals/{i}") for i, r in enumerate(v["intervals"])])
            return Box(_arr(v["lo"], at + "/lo"), _arr(v["hi"], at + "/hi"))
        if kind == "ball":
            c = v["center"]
            if isinstance(c, dict):
                m = c.get("n", n)
                if m is None:
                    raise SchemaError(f"{at}/center: the shorthand needs n from the frame or the document")
                center = np.zeros(2 * m)
                center[-1] = _real(c["a"], at + "/center/a")
            else:
                center = _arr(c, at + "/center")
            return Ball(center, _real(v["radius"], at + "/radius"))
        if kind == "vertex_polytope":
            rows = [_arr(r, f"{at}/vertices/{i}") for i, r in enumerate(v["vertices"])]
            if len({r.size for r in rows}) != 1:
                raise SchemaError(f"{at}/vertices: rows differ in length")
            return VertexPolytope(np.array(rows), bool(v.get("symmetric", False)))
        if kind == "product":
            return Product(_parse(v["left"], None, at + "/left"), _parse(v["right"], None, at + "/right"))
        if kind == "lagrangian_product":
            return LagrangianProduct(_parse(v["q"], None, at + "/q"), _parse(v["p"], None, at + "/p"))
        if kind == "polar":
            return Polar(_parse(v["body"], n, at + "/body"))
        if kind == "symm_diff":
            return SymmDiff(_parse(v["body"], n, at + "/body"))
        if kind == "psum":
            return PSum(_real(v["p"], at + "/p"), _parse(v["left"], n, at + "/left"), _parse(v["right"], n, at + "/right"))
        if kind == "scale":
            return Scale(_real(v["factor"], at + "/factor"), _parse(v["body"], n, at + "/body"))
        if kind == "translate":
            return Translate(_arr(v["shift"], at + "/shift"), _parse(v["body"], n, at + "/body"))
    except SchemaError as e:
        if str(e).startswith("/"):
            raise
        raise SchemaError(f"{at}: {e}") from None
    raise SchemaError(f"{at}: unknown body kind")  # unreachable after validation


def body_to_json(body):
    """Canonical document of a body; reals become 17-digit decimal strings."""
    if isinstance(body, Ellipsoid):
        return {"ellipsoid": {"radii": _vec(body.radii)}}
    if isinstance(body, AxisEllipsoid):
        return {"axis_ellipsoid": {"semi_axes": _vec(body.axes)}}
    if isinstance(body, Polydisc):
        return {"polydisc": {"radii": _vec(body.radii)}}
    if isinstance(body, Box):
        if body.intervals is not None:
            return {"box": {"intervals": _mat(body.intervals)}}
        return {"box": {"lo": _vec(body.lo), "hi": _vec(body.hi)}}
    if isinstance(body, Ball):
        return {"ball": {"center": _vec(body.center), "radius": fmt_real(body.radius)}}
    if isinstance(body, VertexPolytope):
        return {"vertex_polytope": {"vertices": _mat(body.given), "symmetric": body.symmetric}}
    if isinstance(body, LagrangianProduct):
        return {"lagrangian_product": {"q": body_to_json(body.left), "p": body_to_json(body.right)}}
    if isinstance(body, Product):
        return {"product": {"left": body_to_json(body.left), "right": body_to_json(body.right)}}
    if isinstance(body, Polar):
        return {"polar": {"body": body_to_json(body.body)}}
    if isinstance(body, SymmDiff):
        return {"symm_diff": {"body": body_to_json(body.body)}}
    if isinstance(body, PSum):
        return {"psum": {"p": fmt_real(body.p), "left": body_to_json(body.left), "right": body_to_json(body.right)}}
    if isinstance(body, Scale):
        return {"scale": {"factor": fmt_real(body.factor), "body": body_to_json(body.body)}}
    if isinstance(body, Translate):
        return {"translate": {"shift": _vec(body.shift), "body": body_to_json(body.body)}}
    raise SchemaError(f"no JSON form for {type(body).__name__}")


def dumps(doc):
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def body_schema_roundtrip(doc, n=None):
    """Parse and serialize again; the identity on canonical documents."""
    return body_to_json(parse_body(doc, n))


# ---------------------------------------------------------------------------
# result encoding
# ---------------------------------------------------------------------------
def encode(obj):
    """Recursively turn reals into 17-digit strings and arrays into lists."""
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt_real(obj)
    return obj


def samples_csv(samples, n):
    """CSV of path samples with columns q1..qn, p1..pn."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)])
    for row in np.asarray(samples, float):
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def _chord_doc(chord):
    s = chord.path.samples
    return {"action": chord.action, "return_time": chord.return_time, "num_samples": int(s.shape[0]),
            "start": s[0], "end": s[-1], "residuals": dict(sorted(chord.residuals.items()))}


# ---------------------------------------------------------------------------
# jobs
# ---------------------------------------------------------------------------
def solve_config(job):
    """SolveConfig from the optional ``solver`` block of a job."""
    s = dict(job.get("solver", {}))
    cfg = SolveConfig()
    if "N" in s and "N0" not in s:
        s["N0"] = min(cfg.N0, s["N"])
    return replace(cfg, **s).validate()


def _frame(job):
    if "frame" not in job:
        raise SchemaError("/frame: required for this command")
    return Frame(job["frame"]["n"], job["frame"]["k"])


def _body(job, key="body", n=None):
    if key not in job:
        raise SchemaError(f"/{key}: required for this command")
    try:
        return parse_body(job[key], n)
    except SchemaError as e:
        raise SchemaError(f"/{key}{e}" if str(e).startswith("/") else f"/{key}: {e}") from None


def run(job):
    """Execute a job document.

    Parameters
    ----------
    job : dict
        Document matching ``job.schema.json``.

    Returns
    -------
    payload : dict
        Encoded JSON result.
    csv_text : str or None
        Table for the ``csv`` output, when the command produces one.

    Raises
    ------
    SchemaError, DomainError, ConvergenceError
    """
    validate(job, "job.schema.json")
    cmd = job["command"]
    return _COMMANDS[cmd](job)


def _run_capacity(job):
    frame = _frame(job)
    body = _body(job, n=frame.n)
    method = job.get("method", "auto")
    cfg = solve_config(job)
    r = capacity(body, frame, method=method, cfg=cfg)
    doc = {"command": "capacity", "frame": {"n": frame.n, "k": frame.k}, "body": body_to_json(body),
           "value": r.value, "method": r.method, "bracket": list(r.bracket), "formula_id": r.formula_id,
           "carrier": _chord_doc(r.carrier) if r.carrier is not None else None}
    if r.solve_result is not None:
        d = r.solve_result.diagnostics
        doc["diagnostics"] = {key: d[key] for key in ("N", "N0", "p", "coarse_values", "stationarity",
                                                       "last_level_drop", "z0") if key in d}
    table = samples_csv(r.carrier.path.samples, frame.n) if r.carrier is not None else None
    return encode(doc), table


def _run_spectrum(job):
    frame = _frame(job)
    body = _body(job, n=frame.n)
    if isinstance(body, Ellipsoid):
        radii = body.radii
    elif isinstance(body, Ball) and not np.any(body.center):
        radii = np.full(frame.n, body.radius)
    else:
        raise DomainError("the spectrum command needs an ellipsoid or a centered ball")
    cutoff = job.get("spectrum", {}).get("cutoff", 2 * pi * float(np.max(radii)) ** 2)
    entries = return_spectrum(frame, radii, cutoff)
    doc = {"command": "spectrum", "frame": {"n": frame.n, "k": frame.k}, "radii": radii, "cutoff": cutoff,
           "entries": [{"action": e.action, "generators": [list(g) for g in e.generators]} for e in entries]}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["action", "class", "j", "m"])
    for e in entries:
        for cls, j, m in e.generators:
            w.writerow([repr(float(e.action)), cls, j, m])
    return encode(doc), buf.getvalue()


def _run_chord(job):
    frame = _frame(job)
    body = _body(job, n=frame.n)
    if not isinstance(body, Ball):
        raise DomainError("the chord command needs a ball")
    if frame.periodic:
        raise DomainError("the chord command needs k < n")
    # the explicit chord lives in the (q_n, p_n) plane
    if np.any(body.center[:-1][frame.mask("JV0")[:-1]]):
        raise DomainError("the chord command needs the center offset along the last momentum axis")
    a = float(body.center[-1])
    shift = body.center.copy()
    shift[-1] = 0.0
    ch = ball_chord(frame, a, body.radius)
    samples = ch.path.samples + shift
    exact = offcenter_ball_capacity(frame, a, body.radius).value
    doc = {"command": "chord", "frame": {"n": frame.n, "k": frame.k}, "body": body_to_json(body),
           "a": a, "radius": body.radius, "action": ch.action, "closed_form": exact,
           "residuals": dict(sorted(ch.residuals.items())), "num_samples": int(samples.shape[0])}
    return encode(doc), samples_csv(samples, frame.n)


def _run_check(job):
    spec = job.get("check")
    if spec is None:
        raise SchemaError("/check: required for the check command")
    name = spec["name"]
    method = job.get("method", "auto")
    cfg = solve_config(job)
    if name == "mean_width":
        delta = _body(job)
        lam = _body(spec, "other")
        reports = [bi.mean_width_bound(delta, lam, method, cfg)]
    elif name == "k_monotonicity":
        frame = _frame(job)
        reports = bi.k_monotonicity_check(_body(job, n=frame.n), frame.n, method, cfg)
    else:
        frame = _frame(job)
        D = _body(job, n=frame.n)
        if name == "j_norm":
            reports = [bi.j_norm_upper_bound(D, frame, method, cfg, symmetrize=spec.get("symmetrize", False))]
        elif name == "brunn_minkowski":
            reports = [bi.brunn_minkowski_check(D, _body(spec, "other", frame.n), spec.get("p", 1.0), frame,
                                                method, cfg)]
        elif name == "sandwich":
            reports = list(bi.sandwich_check(D, frame, method, cfg))
        elif name == "inscribed_ball":
            reports = [bi.inscribed_ball_lower_bound(D, frame, method, cfg)]
        elif name == "viterbo":
            reports = [bi.viterbo_ratio(D, frame, method, cfg, spec.get("volume_mode", "exact"), cfg.seed)]
        else:  # dk_derivative
            d = bi.dk_derivative(D, _body(spec, "other", frame.n), frame, cfg=cfg, method=method)
            doc = {"command": "check", "name": name, "holds": d.holds, "monotone": d.monotone, **asdict(d)}
            return encode(doc), None
    doc = {"command": "check", "name": name, "holds": all(r.holds for r in reports),
           "reports": [r.to_dict() for r in reports]}
    return encode(doc), bi.reports_to_csv(reports)


CORPUS_TOL = 0.02


def corpus_rows(method="solver", cfg=None, names=None):
    """Compare every catalog entry with the chosen method.

    Returns
    -------
    list of dict
        Keys name, formula_id, n, k, relation, expected, computed, rel_error, ok.
    """
    rows = []
    for e in example_bodies_catalog():
        if names and e.name not in names:
            continue
        got = capacity(e.body, e.frame, method=method, cfg=cfg).value
        rel = (got - e.value) / e.value
        ok = abs(rel) < CORPUS_TOL if e.relation == "eq" else rel > -CORPUS_TOL
        rows.append({"name": e.name, "formula_id": e.formula_id, "n": e.frame.n, "k": e.frame.k,
                     "relation": e.relation, "expected": e.value, "computed": got, "rel_error": rel, "ok": ok})
    return rows


def _run_corpus(job):
    cfg = solve_config(job)
    rows = corpus_rows(job.get("method", "solver"), cfg, job.get("corpus", {}).get("names"))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["name", "formula_id", "n", "k", "relation", "expected", "computed", "rel_error", "ok"]
    w.writerow(cols)
    for r in rows:
        w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
    doc = {"command": "corpus", "rows": rows, "all_ok": all(r["ok"] for r in rows)}
    return encode(doc), buf.getvalue()


_COMMANDS = {"capacity": _run_capacity, "spectrum": _run_spectrum, "chord": _run_chord,
             "check": _run_check, "corpus": _run_corpus}


def failure_payload(err):
    """Encoded document describing an error, with the best bound when known."""
    doc = {"error": type(err).__name__, "message": str(err), "exit_code": err.exit_code}
    if isinstance(err, ConvergenceError) and err.best is not None:
        doc["best_upper_bound"] = err.best
    return encode(doc)
