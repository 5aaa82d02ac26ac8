"""Command-line experiment runner.

    pathspin analytic --gamma 0.7071067811865476 --theta-range 0:pi:pi/180 --out a.csv
    pathspin sample   --n 1000000 --seed 42 --theta pi/4 --out s.csv
    pathspin sweep    --gamma 0.7071067811865476 --gamma 0.5 --out sweep.csv
    pathspin nchv     --out nchv.csv
    pathspin hvm      --n 1000000 --seed 7 --out hvm.csv

Every flag can also be supplied through ``--config file.json`` using the
same names (``gamma`` may be a list, ``theta`` a number or list,
``theta_range`` a "start:stop:step" string or a 3-element list). Flags win
over file values. CSV output is accompanied by a JSON mirror next to it.

Exit codes: 0 success, 1 contract violation found by ``--check``, 2 usage error.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import nchv
from .errors import PathSpinError
from .interferometer import BeamSplitterParams, Channel, SourceParams, run_pipeline
from .observables import SpinAxis
from .statistics import (
    SampleConfig,
    conditional_fluctuation,
    contextuality_gap,
    estimate,
    fluctuation_gap,
    qm_table,
    sample,
    subensemble_mean_analytic,
    whole_ensemble_mean,
)

MODES = ("analytic", "sample", "sweep", "nchv", "hvm")

ANALYTIC_COLUMNS = ("r", "gamma", "delta", "theta", "mean_sg1", "mean_sg2", "whole_mean",
                    "cond_mean_sg1", "cond_mean_sg2", "fluct_sg1", "fluct_sg2")
COLUMNS = {
    "analytic": ANALYTIC_COLUMNS,
    "sample": ANALYTIC_COLUMNS + ("n", "seed", "n_sg1_up", "n_sg1_down", "n_sg2_up",
                                  "n_sg2_down", "se_mean_sg1", "se_mean_sg2", "se_whole"),
    "sweep": ("r", "gamma_a", "gamma_b", "theta", "mean_sg1_a", "mean_sg1_b", "mean_sg2_a",
              "mean_sg2_b", "whole_mean_a", "whole_mean_b", "gap_sg1", "gap_sg2",
              "fluct_sg1_a", "fluct_sg1_b", "fluct_gap_sg1"),
    "nchv": ("r", "gammas", "thetas", "S", "feasible", "l1_distance", "certificate"),
    "hvm": ("model", "r", "gamma", "delta", "theta", "n", "seed", "mean_sg1", "mean_sg2",
            "whole_mean", "se_mean_sg1", "se_mean_sg2", "se_whole", "qm_mean_sg1",
            "qm_mean_sg2", "qm_whole_mean", "z_sg1", "z_sg2"),
}

CHECK_TOL = 1e-12


class UsageError(Exception):
    pass


class ContractViolation(Exception):
    pass


# --------------------------------------------------------------------------
# parsing helpers

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def parse_real(text) -> float:
    """Float, or a small arithmetic expression in ``pi`` such as ``3*pi/4``."""
    if isinstance(text, (int, float)):
        return float(text)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "sqrt":
            return math.sqrt(ev(node.args[0]))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return float(ev(ast.parse(str(text).strip(), mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError, TypeError) as exc:
        raise UsageError(f"cannot parse number {text!r}: {exc}") from None


def parse_range(spec) -> list[float]:
    """Inclusive ``start:stop:step`` grid."""
    parts = spec.split(":") if isinstance(spec, str) else list(spec)
    if len(parts) != 3:
        raise UsageError(f"range must be start:stop:step, got {spec!r}")
    start, stop, step = (parse_real(p) for p in parts)
    if step <= 0:
        raise UsageError("range step must be positive")
    count = math.floor((stop - start) / step + 1e-9) + 1
    if count < 1:
        raise UsageError(f"range {spec!r} is empty")
    return [start + k * step for k in range(count)]


@dataclass
class ExperimentConfig:
    mode: str
    r: float = 0.5
    gammas: list[float] = field(default_factory=list)
    thetas: list[float] = field(default_factory=list)
    n: int = 100_000
    seed: int = 0
    chunk: int = 1 << 16
    out: str | None = None
    format: str = "csv"
    check: bool = False

    def validate(self) -> None:
        if self.mode not in MODES:
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.format!r}")
        if not self.thetas:
            raise UsageError("no theta values given")
        if not self.gammas:
            raise UsageError("no gamma values given")
        if self.mode == "sweep" and len(self.gammas) != 2:
            raise UsageError("sweep compares exactly two gamma settings")
        try:
            SourceParams(self.r)
            for g in self.gammas:
                BeamSplitterParams.from_gamma(g)
            for t in self.thetas:
                SpinAxis(t)
            SampleConfig(self.n, self.seed, self.chunk)
        except PathSpinError as exc:
            raise UsageError(str(exc)) from None


def _defaults(mode: str) -> dict:
    if mode == "nchv":
        gs, ts = nchv.chsh_optimal_settings()
        return {"gammas": [g.gamma for g in gs], "thetas": [t.theta for t in ts]}
    if mode in ("sweep", "hvm"):
        gammas = [1 / math.sqrt(2), 0.5]
    else:
        gammas = [1 / math.sqrt(2)]
    thetas = [0.0, math.pi / 4] if mode == "hvm" else parse_range("0:pi:pi/180")
    if mode == "sample":
        thetas = [math.pi / 4]
    return {"gammas": gammas, "thetas": thetas}


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        values.update(raw)
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "mode")}
    if not args.check:
        flags.pop("check", None)
    if not args.degrees:
        flags.pop("degrees", None)
    values.update(flags)

    unknown = set(values) - {"mode", "r", "gamma", "theta", "theta_range", "n", "seed",
                             "chunk", "out", "format", "check", "degrees"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")

    mode = args.mode
    degrees = bool(values.get("degrees", False))
    scale = math.pi / 180 if degrees else 1.0

    thetas: list[float] = []
    if "theta" in values:
        th = values["theta"]
        thetas = [parse_real(t) * scale for t in (th if isinstance(th, list) else [th])]
    if "theta_range" in values:
        thetas = [t * scale for t in parse_range(values["theta_range"])]
    gammas = values.get("gamma", [])
    gammas = [parse_real(g) for g in (gammas if isinstance(gammas, list) else [gammas])]

    defaults = _defaults(mode)
    try:
        cfg = ExperimentConfig(
            mode=mode,
            r=parse_real(values.get("r", 0.5)),
            gammas=gammas or defaults["gammas"],
            thetas=thetas or defaults["thetas"],
            n=int(values.get("n", 100_000)),
            seed=int(values.get("seed", 0)),
            chunk=int(values.get("chunk", 1 << 16)),
            out=values.get("out"),
            format=values.get("format", "csv"),
            check=bool(values.get("check", False)),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    cfg.validate()
    return cfg


# --------------------------------------------------------------------------
# experiments

def _analytic_row(src, bs, theta) -> dict:
    st = estimate(qm_table(bs, theta, src))
    return {
        "r": src.r, "gamma": bs.gamma, "delta": bs.delta, "theta": theta,
        "mean_sg1": st.mean_sg1, "mean_sg2": st.mean_sg2,
        "whole_mean": whole_ensemble_mean(src, theta),
        "cond_mean_sg1": st.cond_mean_sg1, "cond_mean_sg2": st.cond_mean_sg2,
        "fluct_sg1": st.fluct_sg1, "fluct_sg2": st.fluct_sg2,
    }


def run_analytic(cfg: ExperimentConfig) -> list[dict]:
    src = SourceParams(cfg.r)
    return [_analytic_row(src, BeamSplitterParams.from_gamma(g), t)
            for g in cfg.gammas for t in cfg.thetas]


def run_sample(cfg: ExperimentConfig) -> list[dict]:
    src = SourceParams(cfg.r)
    rows = []
    for stream, (g, t) in enumerate((g, t) for g in cfg.gammas for t in cfg.thetas):
        bs = BeamSplitterParams.from_gamma(g)
        counts = sample(run_pipeline(src, bs), t, SampleConfig(cfg.n, cfg.seed, cfg.chunk, stream))
        st = estimate(counts)
        (n1u, n1d), (n2u, n2d) = counts.table.tolist()
        rows.append({
            "r": src.r, "gamma": bs.gamma, "delta": bs.delta, "theta": t,
            "mean_sg1": st.mean_sg1, "mean_sg2": st.mean_sg2, "whole_mean": st.whole_mean,
            "cond_mean_sg1": st.cond_mean_sg1, "cond_mean_sg2": st.cond_mean_sg2,
            "fluct_sg1": st.fluct_sg1, "fluct_sg2": st.fluct_sg2,
            "n": cfg.n, "seed": cfg.seed,
            "n_sg1_up": n1u, "n_sg1_down": n1d, "n_sg2_up": n2u, "n_sg2_down": n2d,
            "se_mean_sg1": st.se_mean_sg1, "se_mean_sg2": st.se_mean_sg2, "se_whole": st.se_whole,
        })
    return rows


def run_sweep(cfg: ExperimentConfig) -> list[dict]:
    src = SourceParams(cfg.r)
    a, b = (BeamSplitterParams.from_gamma(g) for g in cfg.gammas)
    rows = []
    for t in cfg.thetas:
        sa, sb = estimate(qm_table(a, t, src)), estimate(qm_table(b, t, src))
        try:
            fa = conditional_fluctuation(a, t, Channel.SG1, src)
            fb = conditional_fluctuation(b, t, Channel.SG1, src)
            fgap = fluctuation_gap(a, b, t, Channel.SG1, src)
        except PathSpinError:
            fa = fb = fgap = None
        rows.append({
            "r": src.r, "gamma_a": a.gamma, "gamma_b": b.gamma, "theta": t,
            "mean_sg1_a": sa.mean_sg1, "mean_sg1_b": sb.mean_sg1,
            "mean_sg2_a": sa.mean_sg2, "mean_sg2_b": sb.mean_sg2,
            "whole_mean_a": sa.whole_mean, "whole_mean_b": sb.whole_mean,
            "gap_sg1": contextuality_gap(a, b, t, Channel.SG1, src),
            "gap_sg2": contextuality_gap(a, b, t, Channel.SG2, src),
            "fluct_sg1_a": fa, "fluct_sg1_b": fb, "fluct_gap_sg1": fgap,
        })
    return rows


def run_nchv(cfg: ExperimentConfig) -> list[dict]:
    src = SourceParams(cfg.r)
    ctx = nchv.ContextSet(tuple(BeamSplitterParams.from_gamma(g) for g in cfg.gammas),
                          tuple(SpinAxis(t) for t in cfg.thetas), src)
    prob = nchv.build_strategy_problem(ctx)
    res = nchv.nchv_feasible(prob)
    e = prob.correlators()
    s_best = 0.0
    if e.shape[0] >= 2 and e.shape[1] >= 2:
        for (i1, i2) in _pairs(e.shape[0]):
            for (j1, j2) in _pairs(e.shape[1]):
                es = (e[i1, j1], e[i1, j2], e[i2, j1], e[i2, j2])
                s_best = max(s_best, max(abs(float(np.dot(sg, es))) for sg in nchv.CHSH_SIGNS))
    return [{
        "r": src.r,
        "gammas": ";".join(format(g, ".17g") for g in cfg.gammas),
        "thetas": ";".join(format(t, ".17g") for t in cfg.thetas),
        "S": s_best,
        "feasible": res.feasible,
        "l1_distance": res.distance,
        "certificate": res.certificate.describe() if res.certificate else "",
        "_weights": res.weights,
    }]


def _pairs(k):
    return [(i, j) for i in range(k) for j in range(i + 1, k)]


def run_hvm(cfg: ExperimentConfig) -> list[dict]:
    src = SourceParams(cfg.r)
    contexts = [BeamSplitterParams.from_gamma(g) for g in cfg.gammas]
    models = [nchv.contextual_model(src)]
    try:
        models.append(nchv.minimax_noncontextual_model(contexts, src))
    except PathSpinError:
        models.append(nchv.noncontextual_model(contexts[0], src))
    rows = []
    stream = 0
    for model in models:
        for bs in contexts:
            for t in cfg.thetas:
                counts = nchv.simulate_lambda_mu(model, bs, t,
                                                 SampleConfig(cfg.n, cfg.seed, cfg.chunk, stream))
                stream += 1
                st = estimate(counts)
                q1 = subensemble_mean_analytic(bs, t, Channel.SG1, src)
                q2 = subensemble_mean_analytic(bs, t, Channel.SG2, src)
                rows.append({
                    "model": model.name, "r": src.r, "gamma": bs.gamma, "delta": bs.delta,
                    "theta": t, "n": cfg.n, "seed": cfg.seed,
                    "mean_sg1": st.mean_sg1, "mean_sg2": st.mean_sg2, "whole_mean": st.whole_mean,
                    "se_mean_sg1": st.se_mean_sg1, "se_mean_sg2": st.se_mean_sg2,
                    "se_whole": st.se_whole,
                    "qm_mean_sg1": q1, "qm_mean_sg2": q2,
                    "qm_whole_mean": whole_ensemble_mean(src, t),
                    "z_sg1": _z(st.mean_sg1 - q1, st.se_mean_sg1),
                    "z_sg2": _z(st.mean_sg2 - q2, st.se_mean_sg2),
                    "_counts": counts,
                })
    return rows


def _z(diff, se):
    if se is None:
        return None
    if se == 0:
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return diff / se


RUNNERS = {"analytic": run_analytic, "sample": run_sample, "sweep": run_sweep,
           "nchv": run_nchv, "hvm": run_hvm}


# --------------------------------------------------------------------------
# contract checks

def check_rows(mode: str, rows: list[dict], cfg: ExperimentConfig) -> None:
    """Re-verify additivity and normalization on every row; raise ContractViolation."""
    src = SourceParams(cfg.r)
    for k, row in enumerate(rows):
        if mode in ("analytic", "sample"):
            bs = BeamSplitterParams(row["gamma"], row["delta"])
            if mode == "analytic":
                total = float(qm_table(bs, row["theta"], src).table.sum())
                if abs(total - 1.0) > CHECK_TOL:
                    raise ContractViolation(f"row {k}: probabilities sum to {total!r}")
                if abs(row["mean_sg1"] + row["mean_sg2"] - row["whole_mean"]) > CHECK_TOL:
                    raise ContractViolation(f"row {k}: subensemble means do not add to the whole")
            else:
                c = [row["n_sg1_up"], row["n_sg1_down"], row["n_sg2_up"], row["n_sg2_down"]]
                if sum(c) != row["n"]:
                    raise ContractViolation(f"row {k}: counts sum to {sum(c)}, expected {row['n']}")
                d1, d2 = c[0] - c[1], c[2] - c[3]
                n = row["n"]
                if (row["mean_sg1"], row["mean_sg2"], row["whole_mean"]) != (d1 / n, d2 / n, (d1 + d2) / n):
                    raise ContractViolation(f"row {k}: sampled means do not match the counts")
        elif mode == "sweep":
            for suffix in ("a", "b"):
                if abs(row[f"mean_sg1_{suffix}"] + row[f"mean_sg2_{suffix}"]
                       - row[f"whole_mean_{suffix}"]) > CHECK_TOL:
                    raise ContractViolation(f"row {k}: additivity fails in context {suffix}")
            if abs(row["whole_mean_a"] - row["whole_mean_b"]) > CHECK_TOL:
                raise ContractViolation(f"row {k}: whole-ensemble mean depends on the context")
        elif mode == "nchv":
            w = row["_weights"]
            if np.any(w < -1e-12) or abs(float(w.sum()) - 1.0) > 1e-9:
                raise ContractViolation(f"row {k}: strategy weights are not a distribution")
        elif mode == "hvm":
            counts = row["_counts"]
            if int(counts.table.sum()) != row["n"]:
                raise ContractViolation(f"row {k}: counts do not sum to n")


# --------------------------------------------------------------------------
# output

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def to_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def to_json(rows: list[dict], columns, mode: str) -> str:
    payload = {"mode": mode, "columns": list(columns),
               "rows": [{c: _json_value(row.get(c)) for c in columns} for row in rows]}
    return json.dumps(payload, indent=1) + "\n"


def emit(rows: list[dict], mode: str, fmt: str = "csv", out: str | None = None) -> list[Path]:
    """Write rows; CSV output also writes a JSON mirror with the same stem."""
    columns = COLUMNS[mode]
    text = to_csv(rows, columns) if fmt == "csv" else to_json(rows, columns, mode)
    if out is None:
        sys.stdout.write(text)
        return []
    path = Path(out)
    written = [path]
    path.write_text(text)
    if fmt == "csv":
        mirror = path.with_suffix(".json")
        mirror.write_text(to_json(rows, columns, mode))
        written.append(mirror)
    return written


# --------------------------------------------------------------------------
# entry point

def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--out", help="output path (stdout when omitted)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int)
    common.add_argument("--n", type=int, help="number of particles for sampling modes")
    common.add_argument("--chunk", type=int, help="sampling chunk size")
    common.add_argument("--gamma", action="append", help="BS2 reflection amplitude (repeatable)")
    common.add_argument("--theta", action="append", help="spin angle (repeatable)")
    common.add_argument("--theta-range", dest="theta_range", help="start:stop:step, inclusive")
    common.add_argument("--r", help="BS1 reflectivity")
    common.add_argument("--check", action="store_true", default=None,
                        help="verify additivity and normalization on every row")
    common.add_argument("--degrees", action="store_true", default=None,
                        help="angles are given in degrees")

    parser = argparse.ArgumentParser(prog="pathspin", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="mode", required=True)
    helps = {
        "analytic": "exact subensemble statistics",
        "sample": "Monte Carlo detector counts",
        "sweep": "compare two BS2 contexts over theta",
        "nchv": "noncontextual polytope test",
        "hvm": "simulate lambda-mu hidden-variable models",
    }
    for mode in MODES:
        sub.add_parser(mode, parents=[common], help=helps[mode])
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = build_config(args)
    except UsageError as exc:
        print(f"pathspin: error: {exc}", file=sys.stderr)
        return 2

    try:
        rows = RUNNERS[cfg.mode](cfg)
        if cfg.check:
            check_rows(cfg.mode, rows, cfg)
    except ContractViolation as exc:
        print(f"pathspin: contract violation: {exc}", file=sys.stderr)
        return 1
    except PathSpinError as exc:
        print(f"pathspin: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    try:
        written = emit(rows, cfg.mode, cfg.format, cfg.out)
    except OSError as exc:
        print(f"pathspin: cannot write output: {exc}", file=sys.stderr)
        return 1
    if written and cfg.mode == "nchv":
        row = rows[0]
        verdict = "feasible" if row["feasible"] else "infeasible"
        print(f"{verdict}  S={row['S']:.6f}  l1_distance={row['l1_distance']:.6g}  {row['certificate']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
