"""Command line entry point: ``cochord <command> [options]``."""
import argparse
import json
import sys

from .cli_io import dumps, failure_payload, run
from .errors import CochordError, SchemaError

COMMANDS = ("capacity", "spectrum", "chord", "check", "corpus")
CHECKS = ("j_norm", "brunn_minkowski", "dk_derivative", "sandwich", "k_monotonicity",
          "inscribed_ball", "viterbo", "mean_width")


def build_parser():
    ap = argparse.ArgumentParser(prog="cochord", description="Coisotropic capacities of convex bodies.")
    ap.add_argument("command", nargs="?", choices=COMMANDS, help="defaults to the command of --job")
    ap.add_argument("--job", help="JSON job file; other flags override its fields")
    ap.add_argument("--body", help="JSON body file")
    ap.add_argument("--other", help="JSON file with the second body of a check")
    ap.add_argument("--n", type=int, help="half dimension")
    ap.add_argument("--k", type=int, help="number of momentum directions in the subspace")
    ap.add_argument("--method", choices=("auto", "closed_form", "solver", "flow"))
    ap.add_argument("--check", choices=CHECKS, help="inequality for the check command")
    ap.add_argument("--N", type=int, help="fine grid size")
    ap.add_argument("--p", type=float, help="exponent of the dual functional")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--restarts", type=int)
    ap.add_argument("--tol", type=float, help="relative solver tolerance")
    ap.add_argument("--cutoff", type=float, help="action cutoff for the spectrum command")
    ap.add_argument("--out", help="JSON output file, stdout when omitted")
    ap.add_argument("--csv", help="CSV output file")
    return ap


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise SchemaError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from None


def job_from_args(args):
    """Merge a job file with command line overrides."""
    job = _read_json(args.job) if args.job else {}
    if not isinstance(job, dict):
        raise SchemaError("/: a job must be a JSON object")
    if args.command:
        job["command"] = args.command
    if "command" not in job:
        raise SchemaError("/command: give a command or a job file that names one")
    if args.body:
        job["body"] = _read_json(args.body)
    if args.n is not None or args.k is not None:
        frame = dict(job.get("frame", {}))
        if args.n is not None:
            frame["n"] = args.n
        if args.k is not None:
            frame["k"] = args.k
        job["frame"] = frame
    if args.method:
        job["method"] = args.method
    solver = dict(job.get("solver", {}))
    for flag, key in (("N", "N"), ("p", "p"), ("seed", "seed"), ("restarts", "restarts"), ("tol", "tol_rel")):
        val = getattr(args, flag)
        if val is not None:
            solver[key] = val
    if solver:
        job["solver"] = solver
    if args.check or args.other:
        check = dict(job.get("check", {}))
        if args.check:
            check["name"] = args.check
        if args.other:
            check["other"] = _read_json(args.other)
        job["check"] = check
    if args.cutoff is not None:
        job["spectrum"] = {**job.get("spectrum", {}), "cutoff": args.cutoff}
    for key in ("out", "csv"):
        if getattr(args, key):
            job[key] = getattr(args, key)
    return job


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    """Run one job and return its exit code.

    Exit codes: 0 success, 2 schema error, 3 domain error, 4 convergence
    failure (the best upper bound is still written).
    """
    args = build_parser().parse_args(argv)
    job = {}
    try:
        job = job_from_args(args)
        payload, table = run(job)
    except CochordError as e:
        print(f"cochord: error: {e}", file=sys.stderr)
        _emit(dumps(failure_payload(e)), job.get("out"))
        return e.exit_code
    _emit(dumps(payload), job.get("out"))
    if job.get("csv") and table is not None:
        with open(job["csv"], "w") as fh:
            fh.write(table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
