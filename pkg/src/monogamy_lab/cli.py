"""Command-line entry point.

Exit codes: 0 success, 1 audit failure, 2 usage error, 3 I/O error.
Precedence: command-line flags > ``--config`` JSON file > built-in defaults.
"""
import argparse
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import audit
from .model import InitialPairState
from .roof import RoofConfig

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

TRAJECTORY_HEADER = ("kappa_t", "c2_c1c2", "c2_r1r2", "c2_c1r2", "c2_c2r1",
                     "block_tangle", "c2_c1r1", "residual_m", "in_plateau")

DEFAULTS = {
    "alpha": 1.0 / math.sqrt(10.0),
    "alpha_sweep": None,
    "tmax": 5.0,
    "tcount": 256,
    "spacing": "log",
    "seed": 0,
    "restarts": 16,
    "out": None,
    "format": None,
    "resolution": 64,
    "trials": 10000,
    "three_pair": False,
    "eq10_tcount": 5,
}
COMMAND_DEFAULTS = {
    "trajectory": {"format": "csv"},
    "sweep": {"format": "csv", "alpha_sweep": "0.01:0.99:99"},
    "extremum": {"format": "json"},
    "audit": {"format": "json", "alpha_sweep": "0.01:0.99:99"},
    "eq10": {"format": "json", "alpha": 1.0 / math.sqrt(2.0), "tcount": 5, "spacing": "linear"},
    "violations": {"format": "json"},
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    alpha: Optional[float]
    alpha_sweep: Optional[tuple]
    tmax: float
    tcount: int
    spacing: str
    seed: int
    restarts: int
    out: Optional[str]
    format: str
    resolution: int
    trials: int
    three_pair: bool
    eq10_tcount: int

    @property
    def roof(self) -> RoofConfig:
        return RoofConfig(restarts=self.restarts, seed=self.seed)

    def kappa_grid(self, count=None, spacing=None):
        return audit.kappa_grid(self.tmax, count or self.tcount, spacing or self.spacing)

    def alphas(self):
        if self.alpha_sweep is None:
            return np.array([self.alpha])
        lo, hi, n = self.alpha_sweep
        return np.round(np.linspace(lo, hi, n), 12)


def _parse_sweep(text):
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(":")
    if len(parts) != 3:
        raise UsageError(f"alpha sweep must be min:max:count, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"alpha sweep must be min:max:count, got {text!r}") from None
    if not (0.0 < lo <= hi < 1.0) or n < 1 or (n > 1 and hi == lo):
        raise UsageError("alpha sweep needs 0 < min < max < 1 and count >= 1")
    return lo, hi, n


def build_config(command, cli_values, file_values=None) -> RunConfig:
    merged = dict(DEFAULTS)
    merged.update(COMMAND_DEFAULTS.get(command, {}))
    file_values = dict(file_values or {})
    unknown = set(file_values) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    merged.update(file_values)
    if "alpha" in cli_values and "alpha_sweep" not in cli_values:
        merged["alpha_sweep"] = None
    if "alpha_sweep" in cli_values and "alpha" not in cli_values:
        merged["alpha"] = None
    merged.update(cli_values)

    try:
        tmax = float(merged["tmax"])
        tcount = int(merged["tcount"])
        seed = int(merged["seed"])
        restarts = int(merged["restarts"])
        resolution = int(merged["resolution"])
        trials = int(merged["trials"])
        eq10_tcount = int(merged["eq10_tcount"])
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if tcount < 2 or not tmax > 0 or not math.isfinite(tmax):
        raise UsageError("need --tcount >= 2 and a finite --tmax > 0")
    if seed < 0:
        raise UsageError("--seed must be an unsigned integer")
    if restarts < 1 or trials < 1 or eq10_tcount < 2:
        raise UsageError("--restarts, --trials must be >= 1 and --eq10-tcount must be >= 2")
    if resolution < 32:
        raise UsageError("--resolution must be >= 32")
    if merged["spacing"] not in ("linear", "log"):
        raise UsageError("--spacing must be linear or log")
    if merged["format"] not in ("csv", "json"):
        raise UsageError("--format must be csv or json")
    sweep = _parse_sweep(merged["alpha_sweep"]) if merged["alpha_sweep"] is not None else None
    alpha = merged["alpha"]
    if alpha is not None:
        try:
            alpha = float(alpha)
        except (TypeError, ValueError):
            raise UsageError(f"--alpha must be a number, got {alpha!r}") from None
        if not 0.0 < alpha < 1.0:
            raise UsageError("--alpha must lie in (0, 1)")
    if sweep is None and alpha is None:
        raise UsageError("give --alpha or --alpha-sweep")
    if command in ("trajectory", "eq10") and alpha is None:
        raise UsageError(f"{command} needs a scalar --alpha")
    return RunConfig(command, alpha, sweep, tmax, tcount, merged["spacing"], seed, restarts,
                     merged["out"], merged["format"], resolution, trials,
                     bool(merged["three_pair"]), eq10_tcount)


# ---------------------------------------------------------------------------
# Formatting
# ---------------------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.12g}"


def _round(obj):
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return None
        return float(f"{v:.12g}")
    return obj


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def to_json(obj) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Commands: each returns (text, exit_code)
# ---------------------------------------------------------------------------

def cmd_trajectory(cfg: RunConfig):
    init = InitialPairState.from_alpha(cfg.alpha)
    rows = []
    for rec in audit.trajectory(init, cfg.kappa_grid()):
        p = rec.pairwise
        rows.append((rec.kappa_t, p.c1c2, p.r1r2, p.c1r2, p.c2r1, rec.block_tangle,
                     rec.within_pair_c1r1, rec.residual_m, rec.in_plateau))
    if cfg.format == "csv":
        return to_csv(TRAJECTORY_HEADER, rows), EXIT_OK
    return to_json({"alpha": cfg.alpha,
                    "rows": [dict(zip(TRAJECTORY_HEADER, r)) for r in rows]}), EXIT_OK


def cmd_sweep(cfg: RunConfig):
    ev = audit.evaluate_grid(cfg.alphas(), cfg.kappa_grid())
    cols = (ev.alpha.real, ev.kappa_t, ev.numeric["residual_m"])
    rows = list(zip(*cols))
    header = ("alpha", "kappa_t", "residual_m")
    if cfg.format == "csv":
        return to_csv(header, rows), EXIT_OK
    return to_json({"rows": [dict(zip(header, r)) for r in rows]}), EXIT_OK


def cmd_extremum(cfg: RunConfig):
    res = audit.extremum_search(cfg.resolution, refine=True, tmax=cfg.tmax)
    header = ("alpha", "kappa_t", "residual_m")
    row = (res.alpha, res.kappa_t, res.residual_m)
    if cfg.format == "csv":
        return to_csv(header, [row]), EXIT_OK
    return to_json({**dict(zip(header, row)), "coarse": list(res.coarse),
                    "resolution": cfg.resolution}), EXIT_OK


def _merge_checks(reports):
    merged = {}
    order = []
    for rep in reports:
        for chk in rep["checks"]:
            name = chk["name"]
            if name not in merged:
                merged[name] = dict(chk)
                order.append(name)
                continue
            m = merged[name]
            m["max_defect"] = max(m["max_defect"], chk["max_defect"])
            m["min_slack"] = min(m["min_slack"], chk["min_slack"])
            rank = {"pass": 0, "inconclusive": 1, "fail": 2}
            if rank[chk["verdict"]] > rank[m["verdict"]]:
                m["verdict"] = chk["verdict"]
    return [merged[n] for n in order]


def audit_report(cfg: RunConfig) -> dict:
    grid = cfg.kappa_grid()
    reports = [audit.monogamy_audit(InitialPairState.from_alpha(a), grid) for a in cfg.alphas()]
    checks = _merge_checks(reports)
    ext = audit.extremum_search(cfg.resolution, refine=True)
    target = (13.0 * math.sqrt(13.0) - 19.0) / 34.0
    defect = max(abs(ext.kappa_t - math.log(2.0)), abs(ext.residual_m - target))
    checks.append({"name": "extremum", "max_defect": defect, "min_slack": 0.0,
                   "verdict": "pass" if defect <= 1e-6 else "fail"})
    report = {"seed": cfg.seed, "alphas": len(cfg.alphas()), "points_per_alpha": len(grid)}
    if cfg.three_pair:
        a = cfg.alpha if cfg.alpha is not None else 1.0 / math.sqrt(2.0)
        eq10 = audit.eq10_audit(InitialPairState.from_alpha(a),
                                cfg.kappa_grid(cfg.eq10_tcount, "linear"), cfg.roof)
        checks.extend(eq10["checks"])
        report["eq10"] = eq10
    report["checks"] = checks
    return report


def cmd_audit(cfg: RunConfig):
    report = audit_report(cfg)
    code = EXIT_FAIL if any(c["verdict"] == "fail" for c in report["checks"]) else EXIT_OK
    if cfg.format == "csv":
        header = ("name", "max_defect", "min_slack", "verdict")
        return to_csv(header, [[c[h] for h in header] for c in report["checks"]]), code
    return to_json(report), code


def cmd_eq10(cfg: RunConfig):
    init = InitialPairState.from_alpha(cfg.alpha)
    rep = audit.eq10_audit(init, cfg.kappa_grid(), cfg.roof)
    if cfg.format == "csv":
        header = ("kappa_t", "cavity_roof", "reservoir_roof", "roof_sum", "bound", "verdict")
        return to_csv(header, [[p[h] for h in header] for p in rep["points"]]), EXIT_OK
    return to_json(rep), EXIT_OK


def cmd_violations(cfg: RunConfig):
    rep = audit.rank_violation_search(cfg.seed, cfg.trials, roof_config=cfg.roof)
    if cfg.format == "csv":
        header = ("index", "family", "slack", "block_tangle", "pairwise_sum", "rank")
        return to_csv(header, [[v[h] for h in header] for v in rep["violations"]]), EXIT_OK
    return to_json(rep), EXIT_OK


COMMANDS = {
    "trajectory": cmd_trajectory,
    "sweep": cmd_sweep,
    "extremum": cmd_extremum,
    "audit": cmd_audit,
    "eq10": cmd_eq10,
    "violations": cmd_violations,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def make_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file with default values")
    common.add_argument("--alpha", type=float, help="initial amplitude |alpha| in (0, 1)")
    common.add_argument("--alpha-sweep", dest="alpha_sweep", help="min:max:count")
    common.add_argument("--tmax", type=float, help="largest kappa*t on the grid")
    common.add_argument("--tcount", type=int, help="number of kappa*t grid points")
    common.add_argument("--spacing", choices=("linear", "log"))
    common.add_argument("--seed", type=int)
    common.add_argument("--restarts", type=int, help="roof optimizer restarts per size")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))

    parser = _Parser(prog="monogamy-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("trajectory", parents=[common], argument_default=argparse.SUPPRESS, help="measures along kappa*t at fixed alpha")
    sub.add_parser("sweep", parents=[common], argument_default=argparse.SUPPRESS, help="residual entanglement over (alpha, kappa*t)")
    p = sub.add_parser("extremum", parents=[common], argument_default=argparse.SUPPRESS, help="maximum of the residual entanglement")
    p.add_argument("--resolution", type=int)
    p = sub.add_parser("audit", parents=[common], argument_default=argparse.SUPPRESS, help="monogamy audits; exit 1 on failure")
    p.add_argument("--resolution", type=int)
    p.add_argument("--three-pair", dest="three_pair", action="store_true")
    p.add_argument("--eq10-tcount", dest="eq10_tcount", type=int)
    sub.add_parser("eq10", parents=[common], argument_default=argparse.SUPPRESS, help="three-pair three-tangle bound")
    p = sub.add_parser("violations", parents=[common], argument_default=argparse.SUPPRESS, help="higher-rank monogamy violations")
    p.add_argument("--trials", type=int)
    return parser


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def main(argv=None) -> int:
    parser = make_parser()
    try:
        ns = vars(parser.parse_args(argv))
        command = ns.pop("command", None)
        if command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        file_values = _load_config(ns.pop("config")) if "config" in ns else None
        cfg = build_config(command, ns, file_values)
        text, code = COMMANDS[command](cfg)
    except UsageError as exc:
        print(f"monogamy-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"monogamy-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"monogamy-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
