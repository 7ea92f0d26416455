"""Batch experiment runner.

Verbs:
  run           one horizon, several seeds -> per-seed trace files + results.csv
  sweep         grid over horizons x seeds -> the same, one CSV for the grid
  audit         empirical privacy estimate on a neighboring stream pair
  check-stream  exhaustive property checks (range/monotone/submodular) on a stream
  slope         log-log regression of mean regret over a results CSV

All verbs read a JSON config (--config), write into --out, and exit 0 on
success, 2 on a malformed config, 3 on a violated precondition.  Configs are
versioned and unknown keys are rejected, so sweep typos fail fast.  Reruns of
the same config produce byte-identical CSVs: cells are computed independently
(possibly across --workers processes) and merged in sorted (T, seed) order
with repr-exact floats.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .audit import (AuditConfig, audit_bandit_delta, bandit_mechanism,
                    distinguishing_pair, estimate_epsilon,
                    full_info_mechanism)
from .bandit import VARIANTS, BanditConfig, calibrate_gamma, run_bandit
from .continuous import BoxDomain, calibrate_K, dr_stream_from_coverage, run_dr
from .full_info import run_full_info
from .functions import (check_monotone, check_submodular, check_unit_range,
                        oracle_from_json)
from .hedge import calibrate_eta_bandit, calibrate_eta_full_info
from .offline import MAX_BRUTE_EVALS, ONE_MINUS_INV_E, regret_report
from .streams import (FunctionStream, StreamSpec, canonical_dumps,
                      generate_stream, load_stream, neighboring_stream)

SCHEMA_VERSION = 1
ALGORITHMS = ("full_info", "bandit:interval", "bandit:presampled",
              "bandit:naive", "continuous")
CSV_COLUMNS = ("T", "seed", "eps", "delta", "gamma", "eta", "payoff",
               "opt_value", "regret_1e", "oracle_kind", "explore_count")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3


class ConfigError(Exception):
    """Malformed configuration (schema version, types, unknown keys)."""


# ---------------------------------------------------------------------------
# Config plumbing.  Every reader carries a JSON path so error messages point
# at the offending field.
# ---------------------------------------------------------------------------


def _load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return obj


def _check_keys(obj: dict, required: set, optional: set, path: str) -> None:
    stray = sorted(set(obj) - required - optional)
    if stray:
        raise ConfigError(f"{path}: unknown keys {stray}")
    missing = sorted(required - set(obj))
    if missing:
        raise ConfigError(f"{path}: missing keys {missing}")


def _check_schema_version(obj: dict, path: str) -> None:
    v = obj.get("schema_version")
    if v != SCHEMA_VERSION:
        raise ConfigError(
            f"{path}.schema_version: expected {SCHEMA_VERSION}, got {v!r}")


def _as_number(obj: dict, key: str, path: str):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {v!r}")
    return v


def _as_int(obj: dict, key: str, path: str) -> int:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {v!r}")
    return v


def _as_int_list(obj: dict, key: str, path: str) -> list[int]:
    v = obj[key]
    if (not isinstance(v, list) or not v
            or any(isinstance(x, bool) or not isinstance(x, int) for x in v)):
        raise ConfigError(
            f"{path}.{key}: expected a nonempty list of integers, got {v!r}")
    return list(v)


def _as_choice(obj: dict, key: str, path: str, choices: tuple) -> str:
    v = obj[key]
    if v not in choices:
        raise ConfigError(
            f"{path}.{key}: expected one of {list(choices)}, got {v!r}")
    return v


def _stream_ref(obj: dict, path: str) -> dict:
    """Validate a stream reference: {"file": path} or an inline StreamSpec."""
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object, got {obj!r}")
    if "file" in obj:
        _check_keys(obj, {"file"}, set(), path)
        if not isinstance(obj["file"], str):
            raise ConfigError(f"{path}.file: expected a path string")
        return {"file": obj["file"]}
    try:
        StreamSpec.from_json(obj)
    except ValueError as e:
        raise ConfigError(f"{path}: {e}") from e
    return {"spec": obj}


def _materialize_stream(ref: dict) -> FunctionStream:
    if "file" in ref:
        return load_stream(ref["file"])
    return generate_stream(StreamSpec.from_json(ref["spec"]))


# ---------------------------------------------------------------------------
# run / sweep
# ---------------------------------------------------------------------------


@dataclass
class ExperimentPlan:
    algorithm: str
    stream: dict                  # validated stream reference
    k: int
    eps: float
    delta: float
    seeds: list[int]
    horizons: list[int]
    gamma: float | None = None
    eta: float | None = None
    K: int | None = None
    optimizer: str = "private_ftl"
    noise_delta: float = 1e-6
    oracle: str = "auto"
    raw: dict = field(default_factory=dict, repr=False)


def parse_experiment_config(obj: dict, sweep: bool,
                            seed_base: int = 0) -> ExperimentPlan:
    path = "config"
    required = {"schema_version", "algorithm", "stream", "k", "eps", "delta",
                "seeds"}
    optional = {"horizons", "gamma", "eta", "K", "optimizer", "noise_delta",
                "oracle"}
    _check_keys(obj, required, optional, path)
    _check_schema_version(obj, path)
    algorithm = _as_choice(obj, "algorithm", path, ALGORITHMS)
    stream = _stream_ref(obj["stream"], f"{path}.stream")
    k = _as_int(obj, "k", path)
    eps = float(_as_number(obj, "eps", path))
    delta = float(_as_number(obj, "delta", path))
    seeds = [s + seed_base for s in _as_int_list(obj, "seeds", path)]
    if len(set(seeds)) != len(seeds):
        raise ConfigError(f"{path}.seeds: duplicate seeds")

    if "horizons" in obj:
        horizons = _as_int_list(obj, "horizons", path)
    elif "spec" in stream:
        horizons = [int(stream["spec"]["horizon"])]
    else:
        horizons = [len(_materialize_stream(stream))]
    if sweep and len(horizons) < 1:
        raise ConfigError(f"{path}.horizons: sweep needs at least one horizon")
    if not sweep and len(horizons) != 1:
        raise ConfigError(
            f"{path}.horizons: run takes a single horizon "
            f"(got {len(horizons)}); use the sweep verb for grids")
    if len(set(horizons)) != len(horizons):
        raise ConfigError(f"{path}.horizons: duplicate horizons")

    is_bandit = algorithm.startswith("bandit:")
    plan = ExperimentPlan(algorithm=algorithm, stream=stream, k=k, eps=eps,
                          delta=delta, seeds=seeds, horizons=horizons, raw=obj)
    if "gamma" in obj:
        if not is_bandit:
            raise ConfigError(f"{path}.gamma: only bandit algorithms take gamma")
        plan.gamma = float(_as_number(obj, "gamma", path))
    if "eta" in obj:
        if algorithm == "continuous":
            raise ConfigError(f"{path}.eta: the continuous algorithm has no eta")
        plan.eta = float(_as_number(obj, "eta", path))
    if "K" in obj:
        if algorithm != "continuous":
            raise ConfigError(f"{path}.K: only the continuous algorithm takes K")
        plan.K = _as_int(obj, "K", path)
    if "optimizer" in obj:
        if algorithm != "continuous":
            raise ConfigError(
                f"{path}.optimizer: only the continuous algorithm takes it")
        plan.optimizer = _as_choice(obj, "optimizer", path,
                                    ("private_ftl", "ftl"))
    if "noise_delta" in obj:
        if algorithm != "continuous":
            raise ConfigError(
                f"{path}.noise_delta: only the continuous algorithm takes it")
        plan.noise_delta = float(_as_number(obj, "noise_delta", path))
    if "oracle" in obj:
        if algorithm == "continuous":
            raise ConfigError(
                f"{path}.oracle: continuous runs always use the box-top optimum")
        plan.oracle = _as_choice(obj, "oracle", path,
                                 ("auto", "exact", "greedy"))

    # File-backed streams cannot be stretched to other horizons.
    if "file" in stream:
        T = len(_materialize_stream(stream))
        bad = [h for h in horizons if h != T]
        if bad:
            raise ConfigError(
                f"{path}.horizons: stream file has T={T}; cannot run horizons "
                f"{bad} (use an inline spec for sweeps)")
    return plan


def _cell_payloads(plan: ExperimentPlan, out_dir: str) -> list[dict]:
    cells = []
    for T in plan.horizons:
        for seed in plan.seeds:
            stream = dict(plan.stream)
            if "spec" in stream:
                spec = StreamSpec.from_json(stream["spec"])
                # Fresh stream per seed: offsetting the StreamSpec seed keeps
                # every (config, seed) cell reproducible in isolation.
                spec = dataclasses.replace(spec, horizon=T,
                                           seed=spec.seed + seed)
                stream = {"spec": spec.to_json()}
            cells.append({
                "algorithm": plan.algorithm, "stream": stream, "k": plan.k,
                "eps": plan.eps, "delta": plan.delta, "gamma": plan.gamma,
                "eta": plan.eta, "K": plan.K, "optimizer": plan.optimizer,
                "noise_delta": plan.noise_delta, "oracle": plan.oracle,
                "T": T, "seed": seed, "out_dir": out_dir,
            })
    return cells


def _resolve_oracle(kind: str, n: int, k: int, T: int) -> str:
    if kind != "auto":
        return kind
    evals = sum(math.comb(n, j) for j in range(0, min(k, n) + 1)) * T
    return "exact" if evals <= MAX_BRUTE_EVALS else "greedy"


def _run_cell(payload: dict) -> dict:
    """One (T, seed) cell; top-level so worker processes can import it."""
    algorithm = payload["algorithm"]
    T, seed = payload["T"], payload["seed"]
    stream = _materialize_stream(payload["stream"])
    out_dir = Path(payload["out_dir"])
    slug = algorithm.replace(":", "-")
    trace_path = out_dir / f"trace_{slug}_T{T}_seed{seed}.jsonl"

    if algorithm == "continuous":
        oracles = dr_stream_from_coverage(stream)
        domain = BoxDomain.unit(len(stream.ground.items))
        trace = run_dr(oracles, domain, eps=payload["eps"], K=payload["K"],
                       optimizer=payload["optimizer"], seed=seed,
                       noise_delta=payload["noise_delta"])
        trace.to_jsonl(trace_path)
        payoff = float(trace.values.sum())
        top = float((1.0 - np.prod(1.0 - stream.matrix, axis=1)).sum())
        return {"T": T, "seed": seed, "eps": payload["eps"],
                "delta": payload["noise_delta"], "gamma": None, "eta": None,
                "payoff": payoff, "opt_value": top,
                "regret_1e": ONE_MINUS_INV_E * top - payoff,
                "oracle_kind": "box_top", "explore_count": None}

    if algorithm == "full_info":
        trace = run_full_info(stream, k=payload["k"], eps=payload["eps"],
                              delta=payload["delta"], seed=seed,
                              eta=payload["eta"])
    else:
        variant = algorithm.split(":", 1)[1]
        cfg = BanditConfig(variant=variant, k=payload["k"],
                           eps=payload["eps"], delta=payload["delta"],
                           gamma=payload["gamma"], eta=payload["eta"],
                           horizon=T, seed=seed)
        trace = run_bandit(stream, cfg)
    trace.to_jsonl(trace_path)
    oracle = _resolve_oracle(payload["oracle"], len(stream.ground.items),
                             payload["k"], T)
    report = regret_report(trace, stream, k=payload["k"], oracle=oracle)
    p = trace.params
    return {"T": T, "seed": seed, "eps": p["eps"], "delta": p["delta"],
            "gamma": p["gamma"], "eta": p["eta"], "payoff": report.payoff,
            "opt_value": report.opt_value, "regret_1e": report.regret_1e,
            "oracle_kind": report.oracle_kind,
            "explore_count": trace.explore_count}


def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_results_csv(path, rows) -> None:
    rows = sorted(rows, key=lambda r: (r["T"], r["seed"]))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_format_cell(row[c]) for c in CSV_COLUMNS])


def _effective_params(plan: ExperimentPlan, n: int) -> dict:
    """The calibrated parameters each horizon will actually run with."""
    out = {}
    for T in plan.horizons:
        entry: dict = {}
        if plan.algorithm == "full_info":
            entry["eta"] = (plan.eta if plan.eta is not None else
                            calibrate_eta_full_info(plan.eps, plan.delta,
                                                    plan.k, T))
            entry["gamma"] = None
        elif plan.algorithm.startswith("bandit:"):
            variant = plan.algorithm.split(":", 1)[1]
            gamma = (plan.gamma if plan.gamma is not None else
                     calibrate_gamma(plan.k, n, T))
            entry["gamma"] = gamma
            if plan.eta is not None:
                entry["eta"] = plan.eta
            elif variant == "presampled":
                entry["eta"] = "per-seed (set from the realized explore count)"
            elif variant == "naive":
                # every round is an update round, so the full-feedback budget applies
                entry["eta"] = calibrate_eta_full_info(plan.eps, plan.delta,
                                                       plan.k, T)
            else:
                entry["eta"] = calibrate_eta_bandit(plan.eps, plan.delta,
                                                    plan.k, T, gamma)
        else:
            K = plan.K if plan.K is not None else calibrate_K(T)
            entry["K"] = K
            entry["eps_per_optimizer"] = plan.eps / K
        out[str(T)] = entry
    return out


def run_experiment(config: dict, out_dir, workers: int = 1,
                   seed_base: int = 0, sweep: bool = False) -> Path:
    """Execute a run/sweep config; returns the CSV path."""
    plan = parse_experiment_config(config, sweep=sweep, seed_base=seed_base)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payloads = _cell_payloads(plan, str(out))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, payloads))
    else:
        rows = [_run_cell(p) for p in payloads]
    csv_path = out / "results.csv"
    write_results_csv(csv_path, rows)

    n = len(_materialize_stream(payloads[0]["stream"]).ground.items)
    report = {
        "schema_version": SCHEMA_VERSION,
        "algorithm": plan.algorithm,
        "k": plan.k, "eps": plan.eps, "delta": plan.delta,
        "seeds": plan.seeds, "horizons": plan.horizons,
        "effective": _effective_params(plan, n),
        "columns": list(CSV_COLUMNS),
        "csv": csv_path.name,
        "config": plan.raw,
    }
    (out / "report.json").write_text(canonical_dumps(report) + "\n",
                                     encoding="utf-8")
    return csv_path


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------


def _build_pair(obj, path: str) -> tuple[FunctionStream, FunctionStream]:
    if not isinstance(obj, dict) or "type" not in obj:
        raise ConfigError(f"{path}: expected an object with a 'type' key")
    kind = obj["type"]
    if kind == "identical":
        _check_keys(obj, {"type", "stream"}, set(), path)
        stream = _materialize_stream(_stream_ref(obj["stream"], f"{path}.stream"))
        return stream, stream
    if kind == "replace_round":
        _check_keys(obj, {"type", "stream", "round", "replacement"}, set(), path)
        stream = _materialize_stream(_stream_ref(obj["stream"], f"{path}.stream"))
        t = _as_int(obj, "round", path)
        try:
            replacement = oracle_from_json(obj["replacement"])
        except (ValueError, KeyError, TypeError) as e:
            raise ConfigError(f"{path}.replacement: {e}") from e
        return stream, neighboring_stream(stream, t, replacement)
    if kind == "distinguishing":
        _check_keys(obj, {"type"}, {"n", "horizon", "p_hi", "p_lo"}, path)
        kwargs = {}
        for key in ("n", "horizon"):
            if key in obj:
                kwargs[key] = _as_int(obj, key, path)
        for key in ("p_hi", "p_lo"):
            if key in obj:
                kwargs[key] = float(_as_number(obj, key, path))
        return distinguishing_pair(**kwargs)
    raise ConfigError(
        f"{path}.type: expected identical, replace_round, or distinguishing, "
        f"got {kind!r}")


def run_audit(config: dict, out_dir=None, seed_base: int = 0):
    path = "config"
    required = {"schema_version", "kind", "algorithm", "k", "eps", "delta",
                "pair", "n_trials"}
    optional = {"gamma", "eta", "eta_multiplier", "granularity", "alpha",
                "seed", "n_bootstrap"}
    _check_keys(config, required, optional, path)
    _check_schema_version(config, path)
    kind = _as_choice(config, "kind", path, ("epsilon", "bandit_delta"))
    algorithm = _as_choice(config, "algorithm", path, ALGORITHMS)
    if algorithm == "continuous":
        raise ConfigError(
            f"{path}.algorithm: the audit counts discrete outputs; "
            f"continuous runs are not auditable here")
    k = _as_int(config, "k", path)
    eps = float(_as_number(config, "eps", path))
    delta = float(_as_number(config, "delta", path))
    stream, neighbor = _build_pair(config["pair"], f"{path}.pair")
    T = stream.horizon
    n = len(stream.ground.items)

    eta = float(_as_number(config, "eta", path)) if "eta" in config else None
    gamma = (float(_as_number(config, "gamma", path))
             if "gamma" in config else None)
    if "eta_multiplier" in config:
        if eta is not None:
            raise ConfigError(
                f"{path}.eta_multiplier: give either eta or eta_multiplier")
        mult = float(_as_number(config, "eta_multiplier", path))
        if algorithm == "full_info":
            eta = mult * calibrate_eta_full_info(eps, delta, k, T)
        elif algorithm == "bandit:presampled":
            raise ConfigError(
                f"{path}.eta_multiplier: the presampled variant sets eta "
                f"per seed; pass an explicit eta instead")
        else:
            g = gamma if gamma is not None else calibrate_gamma(k, n, T)
            eta = mult * calibrate_eta_bandit(eps, delta, k, T, g)

    if algorithm == "full_info":
        if kind == "bandit_delta":
            raise ConfigError(
                f"{path}.kind: bandit_delta needs a bandit algorithm")
        if gamma is not None:
            raise ConfigError(f"{path}.gamma: full_info takes no gamma")
        mechanism = full_info_mechanism(k, eps=eps, delta=delta, eta=eta)
    else:
        variant = algorithm.split(":", 1)[1]
        mechanism = bandit_mechanism(variant, k, eps=eps, delta=delta,
                                     gamma=gamma, eta=eta)

    audit_cfg = AuditConfig(
        mechanism=mechanism, stream=stream, neighbor=neighbor,
        n_trials=_as_int(config, "n_trials", path),
        granularity=(_as_choice(config, "granularity", path,
                                ("auto", "full", "per_round"))
                     if "granularity" in config else "auto"),
        alpha=(float(_as_number(config, "alpha", path))
               if "alpha" in config else 0.5),
        seed=(_as_int(config, "seed", path) if "seed" in config else 0) + seed_base,
        n_bootstrap=(_as_int(config, "n_bootstrap", path)
                     if "n_bootstrap" in config else 50),
    )
    report = (estimate_epsilon(audit_cfg) if kind == "epsilon"
              else audit_bandit_delta(audit_cfg))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "audit.json").write_text(report.to_json() + "\n",
                                        encoding="utf-8")
    return report


# ---------------------------------------------------------------------------
# check-stream
# ---------------------------------------------------------------------------

_CHECKS = (("unit_range", check_unit_range),
           ("monotone", check_monotone),
           ("submodular", check_submodular))


def check_stream(stream: FunctionStream) -> list[dict]:
    """All property violations, one record per (round, check)."""
    violations = []
    for t, fn in enumerate(stream.rounds):
        for name, checker in _CHECKS:
            ok, witness = checker(fn, stream.ground)
            if not ok:
                violations.append({"round": t + 1, "check": name,
                                   "witness": repr(witness)})
    return violations


def run_check_stream(config: dict, out_dir=None) -> list[dict]:
    path = "config"
    if set(config) == {"ground", "rounds"}:      # a saved stream file directly
        stream = FunctionStream.from_json(config)
    else:
        _check_keys(config, {"schema_version", "stream"}, set(), path)
        _check_schema_version(config, path)
        stream = _materialize_stream(_stream_ref(config["stream"],
                                                 f"{path}.stream"))
    violations = check_stream(stream)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "check.json").write_text(
            canonical_dumps({"horizon": stream.horizon,
                             "violations": violations}) + "\n",
            encoding="utf-8")
    return violations


# ---------------------------------------------------------------------------
# slope
# ---------------------------------------------------------------------------


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    n_points: int
    excluded: list

    def to_json(self) -> str:
        return canonical_dumps({
            "slope": self.slope, "intercept": self.intercept,
            "stderr": self.stderr, "ci95": [self.ci_low, self.ci_high],
            "n_points": self.n_points, "excluded": self.excluded,
        })


def loglog_slope(points, confidence: float = 0.95) -> SlopeFit:
    """OLS slope of ln(mean regret) against ln(T), with a t-based CI.

    ``points`` is a list of (T, mean_regret) pairs; nonpositive means carry
    no information on the power law and are excluded with a warning.  Four
    positive points are the minimum for a meaningful residual estimate.
    """
    pts = [(float(T), float(r)) for T, r in points]
    kept = [(T, r) for T, r in pts if r > 0.0]
    dropped = [(T, r) for T, r in pts if r <= 0.0]
    if dropped:
        warnings.warn(
            f"excluded {len(dropped)} nonpositive mean-regret point(s): "
            f"{dropped}", stacklevel=2)
    if len(kept) < 4:
        raise ValueError(
            f"loglog_slope needs at least 4 positive (T, regret) points, "
            f"got {len(kept)}")
    x = np.log([T for T, _ in kept])
    y = np.log([r for _, r in kept])
    fit = stats.linregress(x, y)
    tq = float(stats.t.ppf(0.5 + confidence / 2.0, len(kept) - 2))
    return SlopeFit(slope=float(fit.slope), intercept=float(fit.intercept),
                    stderr=float(fit.stderr),
                    ci_low=float(fit.slope - tq * fit.stderr),
                    ci_high=float(fit.slope + tq * fit.stderr),
                    n_points=len(kept), excluded=dropped)


def slope_from_csv(csv_path, column: str = "regret_1e") -> SlopeFit:
    """Group a results CSV by T, average the column, regress on ln T."""
    groups: dict[int, list[float]] = {}
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise ConfigError(f"{csv_path}: no column {column!r}")
        for row in reader:
            groups.setdefault(int(row["T"]), []).append(float(row[column]))
    points = [(T, float(np.mean(vals))) for T, vals in sorted(groups.items())]
    return loglog_slope(points)


def run_slope(config_path, out_dir=None) -> SlopeFit:
    config_path = str(config_path)
    if config_path.endswith(".csv"):
        csv_path, column = config_path, "regret_1e"
    else:
        obj = _load_json(config_path)
        _check_keys(obj, {"schema_version", "csv"}, {"column"}, "config")
        _check_schema_version(obj, "config")
        csv_path = obj["csv"]
        column = obj.get("column", "regret_1e")
        if not isinstance(column, str):
            raise ConfigError(f"config.column: expected a string")
    fit = slope_from_csv(csv_path, column)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "slope.json").write_text(fit.to_json() + "\n", encoding="utf-8")
    return fit


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpsubmax",
        description="Differentially private online submodular maximization: "
                    "experiment runner")
    sub = parser.add_subparsers(dest="verb", required=True)
    help_lines = {
        "run": "one horizon, several seeds",
        "sweep": "grid over horizons and seeds",
        "audit": "empirical privacy estimate on a neighboring stream pair",
        "check-stream": "exhaustive range/monotone/submodular checks",
        "slope": "log-log regret regression over a results CSV",
    }
    for verb, text in help_lines.items():
        p = sub.add_parser(verb, help=text)
        p.add_argument("--config", required=True, help="JSON config path"
                       + (" (or a results CSV)" if verb == "slope" else ""))
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel worker processes")
        p.add_argument("--seed-base", type=int, default=0,
                       help="offset added to every seed in the config")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.verb in ("run", "sweep"):
            if args.out is None:
                raise ConfigError(f"{args.verb} requires --out")
            config = _load_json(args.config)
            csv_path = run_experiment(config, args.out, workers=args.workers,
                                      seed_base=args.seed_base,
                                      sweep=args.verb == "sweep")
            print(f"wrote {csv_path}")
        elif args.verb == "audit":
            config = _load_json(args.config)
            report = run_audit(config, args.out, seed_base=args.seed_base)
            print(report.to_json())
        elif args.verb == "check-stream":
            config = _load_json(args.config)
            violations = run_check_stream(config, args.out)
            if violations:
                for v in violations:
                    print(f"round {v['round']}: {v['check']} violated, "
                          f"witness {v['witness']}", file=sys.stderr)
                return EXIT_PRECONDITION
            print("stream ok")
        else:
            fit = run_slope(args.config, args.out)
            print(f"slope {fit.slope:.4f} "
                  f"ci95 [{fit.ci_low:.4f}, {fit.ci_high:.4f}] "
                  f"({fit.n_points} points)")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as e:
        print(f"config error: invalid JSON: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        print(f"precondition error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
