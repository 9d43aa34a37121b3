"""Command line entry point: ``conerisk <subcommand> ...``.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure or failed
experiment check, 3 violated bound hypothesis.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime
import io
import json
import math
import os
import platform
import shlex
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from conerisk import bounds as B
from conerisk.core import ConeSpec, IntervalPartition, is_nondecreasing, parse_sequence
from conerisk.errors import (
    ConeRiskError,
    HypothesisViolated,
    InvalidInputError,
    NonConvergence,
)
from conerisk.partition import min_dpi2_curve, min_spi2_curve, min_vpi_curve
from conerisk.projection import monotone_projection, project_cone, pava
from conerisk.simulation import (
    NOISES,
    assouad_checks,
    build_assouad,
    generate,
    risk_mc,
    verify_bound,
)
from conerisk.statdim import delta_exact_estimate, delta_level_count, delta_monte_carlo
from conerisk.variation import d_pi, s_pi, v_pi

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_HYPOTHESIS = 0, 1, 2, 3

FORMULA_ALIASES = {
    "R": "R", "RD": "R_D", "R_D": "R_D", "RS": "R_S", "R_S": "R_S", "RZ": "R_Z",
    "R_Z": "R_Z", "AMON": "AMON", "HH": "HH", "ZEN": "ZEN", "MISS": "MISS",
    "LOWER_OVAL": "LOWER_OVAL", "LOWER_FANI": "LOWER_FANI", "LOCAL_SUP": "LOCAL_SUP",
}
VERIFIABLE = ("R", "R_D", "R_S", "AMON", "HH", "ZEN", "MISS")


# ---------------------------------------------------------------------------
# serialization

def _fmt(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise NonConvergence(f"non-finite number {x!r} in output")
    text = format(x, ".17g")
    return "0" if text == "-0" else text


def to_json(obj) -> str:
    """Compact JSON with floats written to 17 significant digits."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, IntervalPartition):
        return to_json(list(obj.block_lengths))
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return _fmt(value)
    if value is None:
        return ""
    return str(value)


def to_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


@dataclass
class RunManifest:
    """Provenance embedded in experiment outputs so they can be replayed."""

    command: str
    seed: Optional[int]
    versions: str = ""
    timestamp: Optional[str] = None
    outputs: list[str] = field(default_factory=list)

    @classmethod
    def create(cls, argv: list[str], seed: Optional[int]) -> "RunManifest":
        from conerisk import __version__
        versions = (f"conerisk {__version__}; numpy {np.__version__}; "
                    f"python {platform.python_version()}")
        # wall-clock time would break byte-identical reruns; honor SOURCE_DATE_EPOCH only
        stamp = None
        epoch = os.environ.get("SOURCE_DATE_EPOCH")
        if epoch:
            try:
                stamp = datetime.datetime.fromtimestamp(
                    int(epoch), tz=datetime.timezone.utc).isoformat()
            except ValueError:
                stamp = None
        return cls(shlex.join(["conerisk", *argv]), seed, versions, stamp)

    def to_dict(self) -> dict:
        return {"command": self.command, "seed": self.seed, "versions": self.versions,
                "timestamp": self.timestamp, "outputs": list(self.outputs)}


# ---------------------------------------------------------------------------
# argument helpers

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(name):
    def parse(text):
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number") from None
        if not (math.isfinite(value) and value > 0):
            raise argparse.ArgumentTypeError(f"{name} must be > 0 (got {text})")
        return value
    return parse


def _nonneg_float(name):
    def parse(text):
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number") from None
        if not (math.isfinite(value) and value >= 0):
            raise argparse.ArgumentTypeError(f"{name} must be >= 0 (got {text})")
        return value
    return parse


def _int_at_least(name, low):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if value < low:
            raise argparse.ArgumentTypeError(f"{name} must be >= {low} (got {text})")
        return value
    return parse


def _cone(text):
    try:
        return ConeSpec.parse(text)
    except InvalidInputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _param(text):
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), _coerce(raw.strip())


def _coerce(raw: str):
    for conv in (int, float):
        try:
            return conv(raw)
        except ValueError:
            pass
    return raw


def _read_sequence(path: Optional[str]) -> np.ndarray:
    if path is None or path == "-":
        text = sys.stdin.read()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    return parse_sequence(text)


def _emit(text: str, out: Optional[str]) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _theta_from(args) -> np.ndarray:
    if getattr(args, "family", None):
        return generate(args.family, args.n, **dict(args.param or []))
    return _read_sequence(getattr(args, "input", None))


# ---------------------------------------------------------------------------
# subcommands

def cmd_project(args, argv) -> int:
    y = _read_sequence(args.input)
    if args.cone.is_isotonic and args.method == "pava":
        result = pava(y)
    else:
        method = "active_set" if args.method == "pava" else args.method
        result = project_cone(y, args.cone, tol=args.tol, max_iter=args.max_iter, method=method)
    if args.csv:
        _emit(to_csv(["index", "fitted"], [[i + 1, v] for i, v in enumerate(result.fitted)]),
              args.out)
    else:
        _emit(to_json(result.fitted), args.out)
    print(f"residualGap={_fmt(result.residual_gap)} iterations={result.iterations}",
          file=sys.stderr)
    if not result.converged:
        print("error: projection did not converge", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_variation(args, argv) -> int:
    theta = _read_sequence(args.input)
    pi = IntervalPartition.parse(args.partition)
    report = {"v_pi": v_pi(theta, pi) if is_nondecreasing(theta) else None,
              "d_pi": d_pi(theta, pi),
              "s_pi": s_pi(theta, pi) if is_nondecreasing(theta) else None}
    if report["v_pi"] is None:
        print("note: v_pi and s_pi need a nondecreasing sequence", file=sys.stderr)
    _emit(to_json(report), args.out)
    return EXIT_OK


def cmd_partition_curve(args, argv) -> int:
    theta = _read_sequence(args.input)
    if args.functional == "v2":
        curve = min_vpi_curve(theta, args.max_blocks)
        values = [v * v for v in curve.values]
    elif args.functional == "d2":
        curve = min_dpi2_curve(theta, args.max_blocks)
        values = list(curve.values)
    else:
        curve = min_spi2_curve(theta, args.max_blocks)
        values = list(curve.values)
    rows = [[m, value, str(curve.witness(m))] for m, value in enumerate(values, start=1)]
    if args.json:
        _emit(to_json([{"m": m, "value": v, "witness": curve.witness(m)} for m, v, _ in rows]),
              args.out)
    else:
        _emit(to_csv(["m", "value", "witness"], rows), args.out)
    return EXIT_OK


def compute_bound(formula: str, theta: np.ndarray, sigma: float, cone: ConeSpec,
                  c1: float = 1.0, c2: float = 1.0, c: float = 1.0) -> B.BoundReport:
    """Evaluates one named bound at theta."""
    if formula == "R":
        return B.bound_R(theta, sigma)
    if formula == "R_D":
        return B.bound_R_D(theta, sigma)
    if formula == "R_S":
        return B.bound_R_S(monotone_projection(theta), sigma)
    if formula == "R_Z":
        return B.bound_RZ(theta, sigma)
    if formula == "AMON":
        return B.bound_amon(theta, sigma)
    if formula == "HH":
        return B.bound_hh(theta, sigma)
    if formula == "ZEN":
        return B.bound_general_cone(theta, cone, sigma)
    if formula == "MISS":
        return B.bound_miss(theta, sigma)
    if formula == "LOWER_OVAL":
        return B.lower_bound_values(theta, sigma, "uniform_increments", c1, c2)
    if formula == "LOWER_FANI":
        return B.lower_bound_values(theta, sigma, "piecewise_constant", c1, c2)
    if formula == "LOCAL_SUP":
        value = B.local_sup_bound(theta, sigma, c)
        return B.BoundReport(value=value, formula="LOCAL_SUP", sigma=sigma, n=theta.size,
                             params={"c": c}, digest=B.sequence_digest(theta))
    raise InvalidInputError(f"unknown formula {formula!r}")


def cmd_bounds(args, argv) -> int:
    theta = _read_sequence(args.input)
    names = [f.strip().upper() for f in args.formula.split(",") if f.strip()]
    if names == ["ALL"]:
        if is_nondecreasing(theta):
            names = ["R", "R_D", "R_S", "R_Z", "AMON", "HH", "ZEN", "LOCAL_SUP"]
        else:
            names = ["R_S", "MISS"]
    reports = []
    for name in names:
        if name not in FORMULA_ALIASES:
            raise InvalidInputError(
                f"unknown formula {name!r}; choose from all, {', '.join(sorted(FORMULA_ALIASES))}")
        rep = compute_bound(FORMULA_ALIASES[name], theta, args.sigma, args.cone,
                            args.c1, args.c2, args.c)
        reports.append(rep.to_dict())
    _emit(to_json(reports[0] if len(reports) == 1 else reports), args.out)
    return EXIT_OK


def cmd_statdim(args, argv) -> int:
    if args.method == "exact":
        if not args.cone.is_isotonic:
            raise InvalidInputError("method exact is only available for the isotonic cone")
        est = delta_exact_estimate(args.n)
    elif args.method == "levels":
        if not args.cone.is_isotonic:
            raise InvalidInputError("method levels is only available for the isotonic cone")
        est = delta_level_count(args.n, args.reps, args.seed)
    else:
        est = delta_monte_carlo(args.cone, args.n, args.reps, args.seed)
    out = est.to_dict()
    out["manifest"] = RunManifest.create(argv, args.seed).to_dict()
    _emit(to_json(out), args.out)
    return EXIT_OK


def _sim_label(args) -> str:
    return args.family if args.family else "input"


def cmd_simulate_risk(args, argv) -> int:
    theta = _theta_from(args)
    est = risk_mc(theta, args.cone, args.sigma, args.reps, args.seed, args.target, args.noise)
    if args.csv:
        _emit(to_csv(["family", "n", "sigma", "reps", "seed", "meanRisk", "stderr"],
                     [[_sim_label(args), theta.size, args.sigma, est.reps, est.seed,
                       est.mean_risk, est.stderr]]), args.out)
    else:
        out = {"n": theta.size, "sigma": args.sigma, **est.to_dict(),
               "manifest": RunManifest.create(argv, args.seed).to_dict()}
        _emit(to_json(out), args.out)
    return EXIT_OK


def cmd_simulate_verify(args, argv) -> int:
    theta = _theta_from(args)
    formula = FORMULA_ALIASES.get(args.formula.upper())
    if formula not in VERIFIABLE:
        raise InvalidInputError(f"formula must be one of {', '.join(VERIFIABLE)}")
    bound = compute_bound(formula, theta, args.sigma, args.cone)
    res = verify_bound(theta, args.cone, args.sigma, bound, args.reps, args.seed, args.noise)
    if args.csv:
        _emit(to_csv(CSV_HEADER, [_verify_row(_sim_label(args), theta.size, args.sigma, res)]),
              args.out)
    else:
        out = res.to_dict()
        out["manifest"] = RunManifest.create(argv, args.seed).to_dict()
        _emit(to_json(out), args.out)
    return EXIT_OK if res.holds else EXIT_NUMERIC


def cmd_simulate_assouad(args, argv) -> int:
    theta = _theta_from(args)
    family = build_assouad(theta, args.sigma, args.c1, args.c2)
    report = assouad_checks(family, pairs=args.pairs, seed=args.seed)
    out = {"family": family.describe(), **report.to_dict(),
           "R": B.bound_R(theta, args.sigma).value,
           "manifest": RunManifest.create(argv, args.seed).to_dict()}
    _emit(to_json(out), args.out)
    return EXIT_OK if report.ok else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# experiment suite

CSV_HEADER = ["family", "n", "sigma", "reps", "seed", "formula", "meanRisk", "stderr",
              "bound", "holds", "slack"]

DEFAULT_CONFIG = """\
[experiment.constant]
family = constant
n = 1, 50, 200
sigma = 0.5, 1
reps = 400
seed = 11
formulas = R, R_D, AMON, HH, ZEN

[experiment.two_level]
family = two_level
n = 50, 200
sigma = 0.5, 1
reps = 400
seed = 12
formulas = R, R_D, AMON

[experiment.levels5]
family = piecewise_constant
params = k=5
n = 50, 200
sigma = 0.5, 1
reps = 400
seed = 13
formulas = R, R_D, AMON

[experiment.linear]
family = linear
n = 50, 200
sigma = 0.5, 1
reps = 400
seed = 14
formulas = R, R_D, HH, ZEN

[experiment.cumulative]
family = cumulative
params = a=3
n = 50, 200
sigma = 0.5, 1
reps = 400
seed = 15
formulas = R, R_D

[experiment.linear_uniform_noise]
family = linear
n = 50, 200
sigma = 1
reps = 400
seed = 16
noise = uniform
formulas = R_D

[experiment.misspecified]
family = nonincreasing
n = 50, 200
sigma = 0.5, 1
reps = 400
seed = 17
formulas = R_S, MISS

[experiment.bump]
family = bump
n = 50, 200
sigma = 1
reps = 400
seed = 18
formulas = R_S
"""


def _split_list(raw: str) -> list[str]:
    return [p.strip() for p in raw.replace(";", ",").split(",") if p.strip()]


@dataclass
class Experiment:
    name: str
    family: str
    ns: list[int]
    sigmas: list[float]
    reps: int
    seed: int
    formulas: list[str]
    params: dict
    cone: ConeSpec
    noise: str


def parse_config(text: str) -> list[Experiment]:
    """Reads ``[experiment.NAME]`` sections of an INI file.

    Keys: family, n, sigma (comma lists), reps, seed, formulas (comma list),
    params (``key=value`` pairs separated by spaces or semicolons), cone, noise.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise InvalidInputError(f"malformed config: {exc}") from exc
    experiments = []
    for section in parser.sections():
        if not section.startswith("experiment."):
            raise InvalidInputError(f"unexpected config section [{section}]")
        sec = parser[section]
        name = section.split(".", 1)[1]
        try:
            formulas = [FORMULA_ALIASES[f.upper()] for f in _split_list(sec.get("formulas", "R"))]
        except KeyError as exc:
            raise InvalidInputError(f"[{section}] unknown formula {exc.args[0]}") from None
        bad = [f for f in formulas if f not in VERIFIABLE]
        if bad:
            raise InvalidInputError(f"[{section}] formulas {bad} cannot be checked by simulation")
        params = {}
        for item in sec.get("params", "").replace(";", " ").split():
            key, value = _param(item)
            params[key] = value
        noise = sec.get("noise", "gaussian")
        if noise not in NOISES:
            raise InvalidInputError(f"[{section}] unknown noise {noise!r}")
        if not sec.get("family"):
            raise InvalidInputError(f"[{section}] needs a family")
        try:
            ns = [int(v) for v in _split_list(sec.get("n", ""))]
            sigmas = [float(v) for v in _split_list(sec.get("sigma", "1"))]
            reps = int(sec.get("reps", "1000"))
            seed = int(sec.get("seed", "0"))
        except ValueError as exc:
            raise InvalidInputError(f"[{section}] {exc}") from exc
        if not ns or any(n < 1 for n in ns):
            raise InvalidInputError(f"[{section}] needs n values >= 1")
        if any(not (math.isfinite(s) and s > 0) for s in sigmas):
            raise InvalidInputError(f"[{section}] sigma values must be > 0")
        if reps < 2:
            raise InvalidInputError(f"[{section}] reps must be >= 2")
        experiments.append(Experiment(name, sec["family"], ns, sigmas, reps, seed, formulas,
                                      params, ConeSpec.parse(sec.get("cone", "isotonic")), noise))
    return experiments


def _verify_row(label, n, sigma, res) -> list:
    est = res.estimate
    return [label, n, sigma, est.reps, est.seed, res.bound.formula, est.mean_risk, est.stderr,
            res.bound.value, res.holds, res.slack]


def report_suite(config_path: Optional[str], out_dir: str, argv: Optional[list[str]] = None) -> int:
    """Runs every experiment in the config and writes CSVs plus ``summary.json``.

    Returns 0 when every bound holds, 2 when any check fails or errors.
    """
    text = DEFAULT_CONFIG if config_path is None else Path(config_path).read_text()
    experiments = parse_config(text)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest.create(argv or [], None)
    violations, errors, counts = [], [], {}
    for exp in experiments:
        rows = []
        for n in exp.ns:
            for sigma in exp.sigmas:
                try:
                    theta = generate(exp.family, n, **exp.params)
                    for formula in exp.formulas:
                        bound = compute_bound(formula, theta, sigma, exp.cone)
                        res = verify_bound(theta, exp.cone, sigma, bound, exp.reps, exp.seed,
                                           exp.noise)
                        row = _verify_row(exp.family, n, sigma, res)
                        rows.append(row)
                        if not res.holds:
                            violations.append({"experiment": exp.name,
                                               **dict(zip(CSV_HEADER, row))})
                except ConeRiskError as exc:
                    errors.append({"experiment": exp.name, "n": n, "sigma": sigma,
                                   "error": str(exc)})
        path = out / f"{exp.name}.csv"
        path.write_text(to_csv(CSV_HEADER, rows))
        manifest.outputs.append(str(path))
        counts[exp.name] = len(rows)
    summary_path = out / "summary.json"
    manifest.outputs.append(str(summary_path))
    summary = {"experiments": counts, "violations": violations, "errors": errors,
               "manifest": manifest.to_dict()}
    summary_path.write_text(to_json(summary) + "\n")
    return EXIT_NUMERIC if violations or errors else EXIT_OK


def cmd_report(args, argv) -> int:
    code = report_suite(args.config, args.out, argv)
    summary = json.loads((Path(args.out) / "summary.json").read_text())
    print(f"{sum(summary['experiments'].values())} checks, {len(summary['violations'])} "
          f"violations, {len(summary['errors'])} errors; summary in "
          f"{Path(args.out) / 'summary.json'}", file=sys.stderr)
    return code


# ---------------------------------------------------------------------------
# parser

def _add_sim_source(p) -> None:
    p.add_argument("input", nargs="?", help="sequence file (default: stdin) when --family is absent")
    p.add_argument("--family", help="generate theta from a named family instead of reading it")
    p.add_argument("--n", type=_int_at_least("n", 1), default=100, help="length for --family")
    p.add_argument("--param", type=_param, action="append",
                   help="family parameter key=value (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="conerisk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("project", help="least squares projection onto a cone")
    p.add_argument("input", nargs="?", help="sequence file (default: stdin)")
    p.add_argument("--cone", type=_cone, default=ConeSpec.isotonic())
    p.add_argument("--tol", type=_positive_float("tol"), default=1e-10)
    p.add_argument("--max-iter", type=_int_at_least("max-iter", 1), default=None)
    p.add_argument("--method", choices=("pava", "active_set", "dykstra"), default="pava",
                   help="pava (isotonic only; falls back to active_set), active_set or dykstra")
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("variation", help="V_pi, D_pi and S_pi for a partition")
    p.add_argument("input", nargs="?")
    p.add_argument("--partition", required=True, help="block lengths n1,n2,...")
    p.add_argument("--out")
    p.set_defaults(func=cmd_variation)

    p = sub.add_parser("partition-curve", help="best variation for every block count")
    p.add_argument("input", nargs="?")
    p.add_argument("--functional", choices=("v2", "d2", "s2"), required=True)
    p.add_argument("--max-blocks", type=_int_at_least("max-blocks", 1), default=None)
    p.add_argument("--json", action="store_true", help="JSON instead of CSV rows")
    p.add_argument("--out")
    p.set_defaults(func=cmd_partition_curve)

    p = sub.add_parser("bounds", help="evaluate risk bounds at a sequence")
    p.add_argument("input", nargs="?")
    p.add_argument("--sigma", type=_positive_float("sigma"), required=True)
    p.add_argument("--formula", default="all",
                   help="all or a comma list of R,RD,RS,RZ,AMON,HH,ZEN,MISS,"
                        "LOWER_OVAL,LOWER_FANI,LOCAL_SUP")
    p.add_argument("--cone", type=_cone, default=ConeSpec.isotonic())
    p.add_argument("--c1", type=_positive_float("c1"), default=1.0)
    p.add_argument("--c2", type=_positive_float("c2"), default=1.0)
    p.add_argument("--c", type=_positive_float("c"), default=1.0,
                   help="neighbourhood constant for LOCAL_SUP")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("statdim", help="statistical dimension of a cone")
    p.add_argument("--cone", type=_cone, default=ConeSpec.isotonic())
    p.add_argument("--n", type=_int_at_least("n", 1), required=True)
    p.add_argument("--reps", type=_int_at_least("reps", 2), default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("mc", "levels", "exact"), default="mc")
    p.add_argument("--out")
    p.set_defaults(func=cmd_statdim)

    p = sub.add_parser("simulate", help="Monte Carlo experiments")
    sim = p.add_subparsers(dest="sim_command", required=True, parser_class=_Parser)

    q = sim.add_parser("risk", help="estimate the LSE risk")
    _add_sim_source(q)
    q.add_argument("--cone", type=_cone, default=ConeSpec.isotonic())
    q.add_argument("--sigma", type=_nonneg_float("sigma"), default=1.0)
    q.add_argument("--reps", type=_int_at_least("reps", 2), default=1000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--target", choices=("truth", "monotone_projection"), default="truth")
    q.add_argument("--noise", choices=NOISES, default="gaussian")
    q.add_argument("--csv", action="store_true")
    q.add_argument("--out")
    q.set_defaults(func=cmd_simulate_risk)

    q = sim.add_parser("verify", help="check a bound against simulated risk")
    _add_sim_source(q)
    q.add_argument("--cone", type=_cone, default=ConeSpec.isotonic())
    q.add_argument("--sigma", type=_positive_float("sigma"), default=1.0)
    q.add_argument("--formula", default="R", help=", ".join(VERIFIABLE))
    q.add_argument("--reps", type=_int_at_least("reps", 2), default=1000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--noise", choices=NOISES, default="gaussian")
    q.add_argument("--csv", action="store_true")
    q.add_argument("--out")
    q.set_defaults(func=cmd_simulate_verify)

    q = sim.add_parser("assouad", help="build and check the hypercube family")
    _add_sim_source(q)
    q.add_argument("--sigma", type=_positive_float("sigma"), default=1.0)
    q.add_argument("--c1", type=_positive_float("c1"), default=1.0)
    q.add_argument("--c2", type=_positive_float("c2"), default=1.0)
    q.add_argument("--pairs", type=_int_at_least("pairs", 1), default=500)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_simulate_assouad)

    p = sub.add_parser("report", help="run an experiment suite from a config file")
    p.add_argument("--config", help="INI file with [experiment.NAME] sections "
                                    "(default: built-in suite)")
    p.add_argument("--out", default="conerisk-report", help="output directory")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except HypothesisViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


run = main
