import json
import subprocess
import sys
from math import pi

import numpy as np
import pytest

from cochord.cli import main
from cochord.cli_io import body_schema_roundtrip, body_to_json, dumps, fmt_real, parse_body, run, validate
from cochord.closed_forms import offcenter_ball_capacity
from cochord.convex_bodies import Ball
from cochord.errors import SchemaError
from cochord.symplectic_core import Frame

ELL = {"ellipsoid": {"radii": [1, 2]}}
DOCS = [
    ELL,
    {"axis_ellipsoid": {"semi_axes": [1, 2, 1, 1]}},
    {"box": {"intervals": [[0, 2, 1, 3], [-1, 1, 0.5, 0.25]]}},
    {"box": {"lo": [-1, -1], "hi": [1, 2]}},
    {"polydisc": {"radii": [1, 0.1]}},
    {"ball": {"center": [0, 0, 0, 0.5], "radius": 1}},
    {"vertex_polytope": {"vertices": [[1, 0], [0, 1]], "symmetric": True}},
    {"product": {"left": {"ball": {"center": [0, 0], "radius": 1}}, "right": ELL}},
    {"lagrangian_product": {"q": {"box": {"lo": [-1, -1], "hi": [1, 1]}},
                            "p": {"vertex_polytope": {"vertices": [[1, 0], [0, 1]], "symmetric": True}}}},
    {"polar": {"body": ELL}},
    {"symm_diff": {"body": {"ball": {"center": [0.25, 0], "radius": 1}}}},
    {"psum": {"p": 2, "left": ELL, "right": {"ball": {"center": [0, 0, 0, 0], "radius": 1}}}},
    {"scale": {"factor": 0.1, "body": ELL}},
    {"translate": {"shift": [0.1, 0, 0.3, 0], "body": ELL}},
]


@pytest.mark.parametrize("doc", DOCS, ids=lambda d: next(iter(d)))
def test_roundtrip_every_variant(doc):
    canon = body_schema_roundtrip(doc)
    again = body_schema_roundtrip(canon)
    assert dumps(again) == dumps(canon)
    # the reals survive bit for bit
    b1, b2 = parse_body(doc), parse_body(canon)
    w = np.random.default_rng(0).normal(size=(20, b1.dim))
    assert np.array_equal(b1.support(w).value, b2.support(w).value)


def test_decimal_strings():
    assert fmt_real(0.1) == "0.10000000000000001"
    assert float(fmt_real(np.pi)) == np.pi
    canon = body_schema_roundtrip(ELL)
    assert canon == {"ellipsoid": {"radii": ["1", "2"]}}


def test_ball_center_shorthand():
    b = parse_body({"ball": {"center": {"a": 0.5}, "radius": 1}}, n=2)
    assert np.array_equal(b.center, [0, 0, 0, 0.5])
    b = parse_body({"ball": {"center": {"a": -0.25, "n": 1}, "radius": 1}})
    assert np.array_equal(b.center, [0, -0.25])
    with pytest.raises(SchemaError, match="/ball/center"):
        parse_body({"ball": {"center": {"a": 0.5}, "radius": 1}})
    assert body_to_json(b) == {"ball": {"center": ["0", "-0.25"], "radius": "1"}}


@pytest.mark.parametrize("doc,pointer", [
    ({"ellipsoid": {"radii": [1, "x"]}}, "/ellipsoid/radii/1"),
    ({"ellipsoid": {"radius": [1]}}, "/ellipsoid"),
    ({"psum": {"p": 2, "left": ELL, "right": {"cube": {}}}}, "/psum/right"),
    ({"scale": {"factor": 2, "body": ELL, "extra": 1}}, "/scale"),
])
def test_schema_errors_name_pointer(doc, pointer):
    with pytest.raises(SchemaError) as info:
        parse_body(doc)
    assert str(info.value).startswith(pointer)


def test_job_schema_rejects_unknown_fields():
    with pytest.raises(SchemaError, match="colour"):
        validate({"command": "capacity", "colour": 1}, "job.schema.json")


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_capacity_closed_form(tmp_path, capsys):
    body = write(tmp_path, "b.json", {"ellipsoid": {"radii": [1, 1]}})
    assert main(["capacity", "--body", body, "--n", "2", "--k", "1", "--method", "closed_form"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert float(out["value"]) == pytest.approx(pi / 2, rel=1e-15) and out["method"] == "closed-form"


def test_capacity_solver_and_determinism(tmp_path):
    body = write(tmp_path, "b.json", {"ellipsoid": {"radii": [1, 1]}})
    outs = []
    for i in range(2):
        out, csvp = tmp_path / f"o{i}.json", tmp_path / f"c{i}.csv"
        args = ["capacity", "--body", body, "--n", "2", "--k", "1", "--method", "solver", "--N", "256",
                "--restarts", "3", "--seed", "5", "--out", str(out), "--csv", str(csvp)]
        assert main(args) == 0
        outs.append((out.read_bytes(), csvp.read_bytes()))
    assert outs[0] == outs[1]
    doc = json.loads(outs[0][0])
    assert doc["method"] == "dual-solver"
    assert float(doc["value"]) == pytest.approx(pi / 2, rel=1e-2)
    lo, hi = map(float, doc["bracket"])
    assert lo <= pi / 2 <= hi * (1 + 1e-12)
    assert outs[0][1].decode().splitlines()[0] == "q1,q2,p1,p2"


def test_job_file_and_overrides(tmp_path, capsys):
    job = write(tmp_path, "j.json", {"command": "capacity", "body": ELL, "frame": {"n": 2, "k": 0},
                                     "method": "closed_form"})
    assert main(["--job", job]) == 0
    assert float(json.loads(capsys.readouterr().out)["value"]) == pytest.approx(pi / 2)
    assert main(["--job", job, "--k", "2"]) == 0
    assert float(json.loads(capsys.readouterr().out)["value"]) == pytest.approx(pi)


def test_exit_codes(tmp_path, capsys):
    bad = write(tmp_path, "bad.json", {"ellipsoid": {"radii": "no"}})
    assert main(["capacity", "--body", bad, "--n", "1", "--k", "0"]) == 2
    assert "/body/ellipsoid/radii" in capsys.readouterr().err
    garbled = tmp_path / "g.json"
    garbled.write_text("{not json")
    assert main(["capacity", "--body", str(garbled), "--n", "1", "--k", "0"]) == 2
    far = write(tmp_path, "far.json", {"ball": {"center": [0, 3], "radius": 1}})
    assert main(["capacity", "--body", far, "--n", "1", "--k", "0", "--method", "solver"]) == 3
    capsys.readouterr()
    job = write(tmp_path, "slow.json", {"command": "capacity", "frame": {"n": 1, "k": 0}, "method": "solver",
                                        "body": {"box": {"lo": [-1, -0.3], "hi": [0.5, 1]}},
                                        "solver": {"N": 64, "max_iters": 2, "restarts": 1, "tol_rel": 1e-9}})
    assert main(["--job", job]) == 4
    doc = json.loads(capsys.readouterr().out)
    assert doc["exit_code"] == 4 and float(doc["best_upper_bound"]) > 0
    with pytest.raises(SystemExit) as info:
        main(["capacity", "--n", "x"])
    assert info.value.code == 2


def test_spectrum_and_chord(tmp_path, capsys):
    body = write(tmp_path, "b.json", {"ellipsoid": {"radii": [1, 1]}})
    csvp = tmp_path / "s.csv"
    assert main(["spectrum", "--body", body, "--n", "2", "--k", "1", "--csv", str(csvp)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert float(doc["entries"][0]["action"]) == pytest.approx(pi / 2)
    assert csvp.read_text().splitlines()[1].startswith(repr(pi / 2))
    ball = write(tmp_path, "ball.json", {"ball": {"center": {"a": 0.5}, "radius": 1}})
    assert main(["chord", "--body", ball, "--n", "2", "--k", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    exact = offcenter_ball_capacity(Frame(2, 1), 0.5).value
    assert abs(float(doc["action"]) - exact) <= 1e-10


def test_check_commands(tmp_path):
    payload, table = run({"command": "check", "body": {"ball": {"center": [0, 0, 0, 0], "radius": 1}},
                          "frame": {"n": 2, "k": 1}, "check": {"name": "sandwich"}})
    assert payload["holds"] is True and len(payload["reports"]) == 2
    assert table.splitlines()[0] == "formula_id,lhs,rhs,slack,holds"
    payload, _ = run({"command": "check", "body": ELL, "frame": {"n": 2, "k": 1}, "check": {"name": "j_norm"}})
    assert payload["holds"] is True
    payload, _ = run({"command": "check", "body": ELL, "frame": {"n": 2, "k": 1}, "check": {"name": "viterbo"}})
    assert payload["holds"] is True


def test_corpus_subset():
    names = ["ball1_k0", "offball1_a0.5_k0", "box1_[(0, 2, 1, 3)]_k0"]
    payload, table = run({"command": "corpus", "method": "solver", "corpus": {"names": names},
                          "solver": {"N": 128, "restarts": 2}})
    assert len(payload["rows"]) == 3 and payload["all_ok"] is True
    assert all(abs(float(r["rel_error"])) < 0.02 for r in payload["rows"])
    assert table.splitlines()[0].startswith("name,formula_id")


def test_module_entry_point(tmp_path):
    body = write(tmp_path, "b.json", {"ball": {"center": [0, 0], "radius": 2}})
    out = subprocess.run([sys.executable, "-m", "cochord", "capacity", "--body", body, "--n", "1", "--k", "0"],
                         capture_output=True, text=True, check=True).stdout
    assert float(json.loads(out)["value"]) == pytest.approx(2 * pi)
