"""Command line batch runner: one subcommand per experiment, seeded and file based."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field, fields

from . import automata, decode, entropy_lab, rac
from .density import binary_entropy
from .errors import BadConfig, BoundViolated, QfaLabError

SUBCOMMANDS = (
    "facts",
    "lemma-mix",
    "trajectory",
    "rac-verify",
    "rac-optimize",
    "rac-bound",
    "decode-bounds",
    "geometric",
)
RANDOMIZED = {"facts", "lemma-mix", "rac-optimize", "decode-bounds"}
DEFAULT_TOL = 1e-9
DEFAULT_TRIALS = 200


@dataclass
class ExperimentConfig:
    subcommand: str
    n: int | None = None
    m: int | None = None
    p: float | None = None
    dim: int | None = None
    trials: int = DEFAULT_TRIALS
    seed: int | None = None
    tol: float = DEFAULT_TOL
    objective: str = rac.WORST
    format: str = "json"
    out: str | None = None
    code: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentReport:
    config: dict
    result: dict
    verdict: str
    duration_ms: float
    rows: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"config": self.config, "result": self.result, "verdict": self.verdict, "duration_ms": self.duration_ms}

    def payload(self) -> str:
        """Everything except the wall-clock time, serialized canonically."""
        d = self.to_dict()
        del d["duration_ms"]
        return json.dumps(d, sort_keys=True)


def _need(cfg: ExperimentConfig, name: str, lo=None, hi=None):
    value = getattr(cfg, name)
    if value is None:
        raise BadConfig(f"{cfg.subcommand} needs --{name}")
    if (lo is not None and value < lo) or (hi is not None and value > hi):
        raise BadConfig(f"--{name} must lie in [{lo}, {hi}], got {value}")
    return value


def resolve(cfg: ExperimentConfig) -> ExperimentConfig:
    """Validate a config for its subcommand and fill defaults in place."""
    if cfg.subcommand not in SUBCOMMANDS:
        raise BadConfig(f"unknown subcommand {cfg.subcommand!r}")
    if cfg.format not in ("json", "csv"):
        raise BadConfig("--format must be json or csv")
    if cfg.objective not in (rac.WORST, rac.AVERAGE):
        raise BadConfig("--objective must be worst or avg")
    if not (cfg.tol >= 0 and math.isfinite(cfg.tol)):
        raise BadConfig("--tol must be a nonnegative number")
    if cfg.trials < 1:
        raise BadConfig("--trials must be positive")
    if cfg.subcommand in RANDOMIZED and cfg.seed is None:
        raise BadConfig(f"{cfg.subcommand} is randomized and needs --seed")
    sub = cfg.subcommand
    if sub in ("facts", "lemma-mix"):
        if cfg.dim is None:
            cfg.dim = 2
        _need(cfg, "dim", 1, 16)
    elif sub == "trajectory":
        if cfg.n is None:
            cfg.n = 4
        if cfg.p is None:
            cfg.p = 1.0
        _need(cfg, "n", 0, 8)
        if not 0.5 < cfg.p <= 1.0:
            raise BadConfig("--p must lie in (1/2, 1]")
    elif sub == "rac-verify":
        if cfg.code is None:
            _need(cfg, "n", 1, 3)
            cfg.m = 1
    elif sub == "rac-optimize":
        _need(cfg, "n", 1, 6)
        _need(cfg, "m", 1, 3)
    elif sub == "rac-bound":
        _need(cfg, "n", 1)
        _need(cfg, "m", 0)
        _need(cfg, "p", 0.5, 1.0)
    elif sub == "geometric":
        if cfg.n is None:
            cfg.n = 8
        _need(cfg, "n", 1, 12)
    return cfg


def _suffix_rows(code: rac.RandomAccessCode, p_min: float, tol: float) -> list[dict]:
    rows = []
    for k in range(code.n + 1):
        for y in rac.bitstrings(k):
            s, bound, _ = rac.suffix_mixture_entropy(code, y, p_min)
            rows.append({"suffix": y, "entropy": s, "bound": bound, "holds": s >= bound - max(tol, 1e-6)})
    return rows


def _rac_result(code: rac.RandomAccessCode, tol: float) -> tuple[dict, list, bool]:
    check = rac.verify_rac(code)
    p_eff = min(max(check.p_min, 0.5), 1.0)
    holds, required = rac.rac_bound_check(code.n, code.m, p_eff)
    rows = _suffix_rows(code, check.p_min, tol)
    result = {
        "n": code.n,
        "m": code.m,
        "p_min": check.p_min,
        "p_avg": check.p_avg,
        "required_m": required,
        "bound_holds": holds,
        "suffix_claims_hold": all(r["holds"] for r in rows),
        "per_pair": check.per_pair.tolist(),
    }
    return result, rows, holds and result["suffix_claims_hold"]


def _run(cfg: ExperimentConfig) -> tuple[dict, list, bool]:
    sub, tol = cfg.subcommand, cfg.tol
    if sub == "facts":
        rep = entropy_lab.fact_suite(cfg.dim, cfg.trials, cfg.seed)
        ok = rep.max_entropy_excess <= tol and rep.max_unitary_gap <= tol and rep.min_measurement_gain >= -tol
        result = {k: v for k, v in rep.to_dict().items() if k != "rows"}
        return result, rep.rows, ok
    if sub == "lemma-mix":
        rep = entropy_lab.lemma_mix_sweep(cfg.dim, cfg.trials, cfg.seed)
        result = {k: v for k, v in rep.to_dict().items() if k != "rows"}
        return result, rep.rows, rep.worst_margin >= -tol
    if sub == "trajectory":
        qfa = automata.prefix_qfa_for_ln(cfg.n)
        traj = entropy_lab.average_state_trajectory(qfa, cfg.n + 1)
        rate = 1.0 - binary_entropy(cfg.p)
        rows = [{"k": k, "entropy": s, "bound": rate * k, "halted_mass": h}
                for (k, s), h in zip(traj.points, traj.halted_mass)]
        grows = all(r["entropy"] >= r["bound"] - max(tol, entropy_lab.GROWTH_TOL) for r in rows)
        recognized, counterexample = automata.recognizes(qfa, cfg.n, cfg.p)
        result = {
            "states": qfa.dim,
            "points": [[k, s] for k, s in traj.points],
            "discrimination": [[k, d] for k, d in traj.discrimination],
            "growth_holds": grows,
            "recognizes": recognized,
            "counterexample": counterexample,
        }
        return result, rows, grows and recognized
    if sub in ("rac-verify", "rac-optimize"):
        if sub == "rac-verify":
            if cfg.code is not None:
                try:
                    with open(cfg.code) as fh:
                        code = rac.code_from_json(json.load(fh))
                except (OSError, json.JSONDecodeError, KeyError) as exc:
                    raise BadConfig(f"cannot read code from {cfg.code}: {exc}") from exc
                cfg.n, cfg.m = code.n, code.m
            else:
                code = rac.pauli_code(cfg.n)
            extra = {}
        else:
            found = rac.seesaw_search(cfg.n, cfg.m, cfg.objective, cfg.seed)
            code = found.code
            extra = {"restart": found.restart, "iterations": len(found.history), "code": rac.code_to_json(code)}
        result, rows, ok = _rac_result(code, tol)
        result.update(extra)
        return result, rows, ok
    if sub == "rac-bound":
        holds, required = rac.rac_bound_check(cfg.n, cfg.m, cfg.p)
        result = {"n": cfg.n, "m": cfg.m, "p": cfg.p, "required_m": required, "holds": holds}
        return result, [result], holds
    if sub == "decode-bounds":
        rep = decode.theorem_sweep(cfg.trials, cfg.seed)
        ok = rep.worst_lower_margin >= -tol and rep.worst_upper_margin >= -tol
        result = {k: v for k, v in rep.to_dict().items() if k != "rows"}
        return result, rep.rows, ok
    if sub == "geometric":
        table = decode.geometric_table(cfg.n)
        for row in table:
            k = row["n"]
            row["success_formula"] = (k + 1) * 2.0**-k
            row["information_formula"] = 2.0 - 2.0 ** -(k - 1)
            row["matches"] = (abs(row["success"] - row["success_formula"]) <= max(tol, 1e-12)
                              and abs(row["mutual_information"] - row["information_formula"]) <= max(tol, 1e-12))
        ok = all(
            r["matches"] and r["map_lower"] - tol <= r["success"] <= r["cap_upper"] + tol and r["chi"] < 2.0
            for r in table
        )
        result = dict(table[-1])
        result["table"] = table
        return result, table, ok
    raise BadConfig(f"unknown subcommand {sub!r}")


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    cfg = resolve(ExperimentConfig(**config.to_dict()))
    start = time.perf_counter()
    result, rows, ok = _run(cfg)
    elapsed = (time.perf_counter() - start) * 1000.0
    return ExperimentReport(cfg.to_dict(), result, "pass" if ok else "fail", round(elapsed, 3), rows)


def raise_for_verdict(report: ExperimentReport) -> None:
    if report.verdict != "pass":
        raise BoundViolated(f"{report.config['subcommand']}: a checked inequality failed", report)


def render(report: ExperimentReport, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    rows = report.rows or [report.result]
    names = list(dict.fromkeys(k for r in rows for k in r))
    writer = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfalab", description="Entropy and code-size experiments for quantum finite automata.")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--n", type=int)
    parser.add_argument("--m", type=int)
    parser.add_argument("--p", type=float)
    parser.add_argument("--dim", type=int)
    parser.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL)
    parser.add_argument("--objective", choices=(rac.WORST, rac.AVERAGE), default=rac.WORST)
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--out", help="write the report here instead of standard output")
    parser.add_argument("--code", help="JSON code file for rac-verify")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    names = {f.name for f in fields(ExperimentConfig)}
    return ExperimentConfig(**{k: v for k, v in vars(args).items() if k in names})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = run_experiment(config_from_args(args))
    except QfaLabError as exc:
        print(f"qfalab: {exc}", file=sys.stderr)
        return 2
    text = render(report, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.verdict == "pass" else 1


if __name__ == "__main__":
    sys.exit(main())
