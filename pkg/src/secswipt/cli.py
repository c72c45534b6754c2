"""Experiment harness: single runs, sweeps, bound verification and figure data.

Verbs
  run       run a (possibly swept) experiment into an artifact directory
  verify    run the validation suites, exit 0 iff all pass
  dims      print (scalar variables, linear constraints, quadratic constraints)
  plotdata  turn an artifact directory into figure-ready CSVs

Exit codes: 0 ok, 1 a check failed, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import algorithms as al
from . import metrics as mt
from . import validation as val
from .model import (ConfigError, NetworkConfig, config_from_mapping, dbm_to_watt, dump_config,
                    generate_channels, load_config)

EXIT_OK, EXIT_CHECK, EXIT_RUNTIME = 0, 1, 2
MODES = ("secrecy", "secrecy-noeve", "see", "verify", "dims")
AXES = ("none", "M", "e_min_dbm", "eps0", "eps1")
WORKERS_ENV = "SECSWIPT_WORKERS"


class ArtifactError(FileNotFoundError):
    pass


@dataclass
class ExperimentSpec:
    mode: str = "secrecy"
    config: str | None = None  # path of a key = value file; defaults if None
    axis: str = "none"
    values: list = field(default_factory=list)
    trials: int = 20
    outdir: str = "runs/out"
    seed_base: int = 0
    overrides: dict = field(default_factory=dict)  # extra config keys, same syntax as files
    max_iter: int = 100
    qos_rule: str = "auto"  # auto: 0.1 bit for M <= 4, 0.5 bit otherwise; config: cfg.r_qos

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.axis not in AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if self.axis != "none" and not self.values:
            raise ValueError("sweep values must be non-empty")
        if self.trials < 1:
            raise ValueError("trial count must be >= 1")
        if self.qos_rule not in ("auto", "config"):
            raise ValueError("qos_rule must be 'auto' or 'config'")

    def base_config(self) -> NetworkConfig:
        cfg = load_config(self.config) if self.config else NetworkConfig()
        return config_from_mapping(self.overrides, cfg) if self.overrides else cfg

    def points(self) -> list:
        return [None] if self.axis == "none" else list(self.values)


def point_config(cfg: NetworkConfig, axis: str, value) -> NetworkConfig:
    if axis == "none":
        return cfg
    if axis == "M":
        return cfg.replace(M=int(value))
    if axis == "e_min_dbm":
        return cfg.replace(e_min=dbm_to_watt(float(value)))
    return cfg.replace(**{axis: float(value)})


def qos_target(cfg: NetworkConfig, rule: str) -> float:
    """Per-UE secrecy-rate floor of the energy-efficiency problem, nats/s/Hz."""
    if rule == "config":
        return cfg.r_qos
    return (0.1 if cfg.M <= 4 else 0.5) * math.log(2.0)


def config_hash(cfg: NetworkConfig) -> str:
    return hashlib.sha256(dump_config(cfg).encode()).hexdigest()[:16]


def _point_tag(axis, value) -> str:
    return "single" if axis == "none" else f"{axis}={value}"


# --------------------------------------------------------------------------
# trials


def run_trial(mode: str, cfg: NetworkConfig, seed: int, max_iter: int = 100,
              qos_rule: str = "auto") -> dict:
    """One seeded run. Returns a JSON-ready record (status ok | outage | failed).

    An energy target that no beamformer can meet, or an initialization that
    finds no feasible point, is an outage with objective 0.
    """
    cs = generate_channels(cfg, seed)
    rec = {"seed": seed, "mode": mode, "status": "ok", "reason": "", "objective_bits": 0.0,
           "iterations": 0, "seconds": 0.0}
    opts = al.RunOptions(max_iter=max_iter)
    if mode == "see":
        opts.r_qos = qos_target(cfg, qos_rule)
    t0 = time.perf_counter()
    try:
        if np.any(al.eh_infeasible(cs, cfg)):
            raise al.InitializationError("energy target unreachable", shortfall=math.inf)
        run = {"secrecy": al.run_secrecy, "secrecy-noeve": al.run_secrecy_noeve,
               "see": al.run_see}[mode]
        tr = run(cs, cfg, opts)
    except al.InitializationError as e:
        rec.update(status="outage", reason=str(e))
        rec["seconds"] = time.perf_counter() - t0
        return rec
    except (al.SolverFailure, mt.NonpositiveDenominatorError, ArithmeticError) as e:
        rec.update(status="failed", reason=f"{type(e).__name__}: {e}")
        rec["seconds"] = time.perf_counter() - t0
        return rec
    rec["seconds"] = time.perf_counter() - t0
    rec.update(objective_bits=tr.final / mt.LN2, iterations=tr.iterations, reason=tr.reason,
               monotone=tr.monotone(), audit_ok=tr.audit.ok, trace=tr.to_dict())
    if mode == "see":
        d = al.see_decomposition(tr, cs, cfg)
        rec["decomposition"] = {k: np.asarray(v).tolist() for k, v in d.items()}
        rec["see_recomputed"] = mt.see_values(cs, tr.x, tr.ts, cfg).tolist()
        rec["r_qos"] = opts.r_qos
    if not tr.audit.ok:
        rec.update(status="failed", reason=f"audit: {tr.audit}")
    return rec


def _trial_job(args):
    mode, cfg_dict, seed, max_iter, qos_rule = args
    return run_trial(mode, NetworkConfig(**cfg_dict), seed, max_iter, qos_rule)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _map(jobs):
    n = _workers()
    if n == 1 or len(jobs) == 1:
        return [_trial_job(j) for j in jobs]
    with ProcessPoolExecutor(n) as pool:
        return list(pool.map(_trial_job, jobs))


# --------------------------------------------------------------------------
# experiments


def _versions() -> dict:
    import clarabel
    import scipy
    return {"secswipt": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "clarabel": getattr(clarabel, "__version__", "unknown")}


def aggregate(records: list) -> dict:
    """Mean and standard error over ok and outage trials (outage counts as 0)."""
    used = [r for r in records if r["status"] in ("ok", "outage")]
    vals = np.array([r["objective_bits"] for r in used])
    its = [r["iterations"] for r in records if r["status"] == "ok"]
    n = len(vals)
    return {"n_trials": len(records), "n_ok": sum(r["status"] == "ok" for r in records),
            "n_outage": sum(r["status"] == "outage" for r in records),
            "n_failed": sum(r["status"] == "failed" for r in records),
            "mean": float(vals.mean()) if n else math.nan,
            "stderr": float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan,
            "mean_iterations": float(np.mean(its)) if its else math.nan}


AGG_COLUMNS = ("axis_value", "n_trials", "n_ok", "n_outage", "n_failed", "mean", "stderr",
               "mean_iterations")


def _unit(mode: str) -> str:
    return "bits_per_joule_per_hz" if mode == "see" else "bits_per_s_per_hz"


def run_experiment(spec: ExperimentSpec) -> Path:
    """Run every (sweep point, trial) and write the artifact directory.

    Layout: manifest.json, aggregate.csv, trials.csv, convergence.csv and
    traces/<point>_seed<k>.json.
    """
    if spec.mode not in ("secrecy", "secrecy-noeve", "see"):
        raise ValueError(f"mode {spec.mode!r} is not an experiment mode")
    out = Path(spec.outdir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    base = spec.base_config()
    seeds = [spec.seed_base + t for t in range(spec.trials)]
    points = spec.points()
    cfgs = [point_config(base, spec.axis, v) for v in points]
    jobs = [(spec.mode, c.to_dict(), s, spec.max_iter, spec.qos_rule) for c in cfgs for s in seeds]
    results = _map(jobs)

    files = []
    per_point = {}
    for (v, c), i in zip(zip(points, cfgs), range(len(points))):
        recs = results[i * len(seeds):(i + 1) * len(seeds)]
        per_point[_point_tag(spec.axis, v)] = (v, c, recs)
        for r in recs:
            name = f"traces/{_point_tag(spec.axis, v)}_seed{r['seed']}.json"
            (out / name).write_text(json.dumps(r))
            files.append(name)

    with open(out / "aggregate.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([spec.axis if spec.axis != "none" else "point"]
                   + [f"{c}_{_unit(spec.mode)}" if c in ("mean", "stderr") else c for c in AGG_COLUMNS[1:]])
        for tag, (v, c, recs) in per_point.items():
            a = aggregate(recs)
            w.writerow([tag if v is None else v] + [repr(a[k]) for k in AGG_COLUMNS[1:]])
    files.append("aggregate.csv")

    with open(out / "trials.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["point", "seed", "status", f"objective_{_unit(spec.mode)}", "iterations",
                    "seconds", "reason"])
        for tag, (v, c, recs) in per_point.items():
            for r in recs:
                w.writerow([tag, r["seed"], r["status"], repr(r["objective_bits"]), r["iterations"],
                            f"{r['seconds']:.3f}", r["reason"]])
    files.append("trials.csv")

    first = next((r for _, _, recs in per_point.values() for r in recs if r["status"] == "ok"), None)
    with open(out / "convergence.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", f"objective_{_unit(spec.mode)}", "mu"])
        if first is not None:
            for rec in first["trace"]["records"]:
                w.writerow([rec["iter"], repr(rec["true_obj"] / mt.LN2), repr(rec["mu"])])
    files.append("convergence.csv")

    failed = [{"point": tag, "seed": r["seed"], "status": r["status"], "reason": r["reason"]}
              for tag, (_, _, recs) in per_point.items() for r in recs if r["status"] != "ok"]
    manifest = {"spec": asdict(spec), "config_hash": config_hash(base),
                "point_config_hashes": {t: config_hash(c) for t, (_, c, _) in per_point.items()},
                "seeds": seeds, "versions": _versions(), "files": sorted(files),
                "convergence_trial": None if first is None else first["seed"],
                "failed_trials": failed,
                "all_failed": all(r["status"] == "failed" for r in results)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return out


def load_manifest(artifact_dir) -> dict:
    p = Path(artifact_dir) / "manifest.json"
    if not p.exists():
        raise ArtifactError(f"no manifest in {artifact_dir}")
    return json.loads(p.read_text())


# --------------------------------------------------------------------------
# figure data

_FIGURE = {("secrecy", "M"): "rate-vs-M", ("secrecy", "e_min_dbm"): "rate-vs-e_min",
           ("secrecy", "eps0"): "rate-vs-eps0", ("secrecy", "eps1"): "rate-vs-eps1",
           ("secrecy-noeve", "M"): "rate-noeve-vs-M", ("secrecy-noeve", "e_min_dbm"): "rate-noeve-vs-e_min",
           ("see", "M"): "SEE-vs-M", ("see", "e_min_dbm"): "SEE-vs-e_min",
           ("see", "eps0"): "SEE-vs-eps0", ("see", "eps1"): "SEE-vs-eps1"}


def emit_plot_data(artifact_dir) -> list:
    """Write figure-ready CSVs into <artifact>/plots and register them in the manifest."""
    out = Path(artifact_dir)
    man = load_manifest(out)
    spec = man["spec"]
    mode, axis = spec["mode"], spec["axis"]
    for name in ("aggregate.csv", "convergence.csv"):
        if not (out / name).exists():
            raise ArtifactError(f"missing {name} in {artifact_dir}")
    plots = out / "plots"
    plots.mkdir(exist_ok=True)
    written = []

    with open(out / "convergence.csv") as fh:
        rows = list(csv.DictReader(fh))
    name = "plots/convergence.csv"
    with open(out / name, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", f"objective_{_unit(mode)}"])
        for r in rows:
            w.writerow([r["iter"], r[f"objective_{_unit(mode)}"]])
    written.append(name)

    fig = _FIGURE.get((mode, axis))
    if fig:
        with open(out / "aggregate.csv") as fh:
            rows = list(csv.reader(fh))
        name = f"plots/{fig}.csv"
        with open(out / name, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([axis, f"mean_{_unit(mode)}", "stderr", "trials_used", "mean_iterations"])
            for r in rows[1:]:
                used = int(r[2]) + int(r[3])
                w.writerow([r[0], r[5], r[6], used, r[7]])
        written.append(name)

    if mode == "see":
        name = "plots/SEE-decomposition.csv"
        with open(out / name, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["point", "seed", "cell", "numerator_sum_secrecy_bits_per_s_per_hz",
                        "denominator_power_w", "see_bits_per_joule_per_hz",
                        "see_recomputed_bits_per_joule_per_hz"])
            for f in sorted(f for f in man["files"] if f.startswith("traces/")):
                rec = json.loads((out / f).read_text())
                if rec["status"] != "ok":
                    continue
                d = rec["decomposition"]
                point = Path(f).stem.rsplit("_seed", 1)[0]
                for k, (n, dd, s) in enumerate(zip(d["numerator"], d["denominator"], d["see"])):
                    w.writerow([point, rec["seed"], k, repr(n / mt.LN2), repr(dd), repr(s / mt.LN2),
                                repr(rec["see_recomputed"][k] / mt.LN2)])
        written.append(name)

    man["files"] = sorted(set(man["files"]) | set(written))
    (out / "manifest.json").write_text(json.dumps(man, indent=2))
    return [out / w for w in written]


# --------------------------------------------------------------------------
# verification


def verify(cfg: NetworkConfig, n_expansions: int = 100, n_samples: int = 1000,
           n_appendix: int = 10_000, inner_seeds=range(3), seed: int = 0) -> list:
    reports = val.certify_bounds(cfg, n_expansions, n_samples, n_appendix, seed)
    reports += val.certify_inner(cfg, inner_seeds, n_samples, seed)
    return reports


# --------------------------------------------------------------------------
# command line


def _parse_values(text: str | None) -> list:
    if not text:
        return []
    return [float(v) if any(c in v for c in ".eE") else int(v) for v in text.split(",") if v.strip()]


def _parse_overrides(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ValueError(f"override {item!r} must be key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="secswipt", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--config", help="key = value scenario file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")

    p = sub.add_parser("run", help="run an experiment")
    common(p)
    p.add_argument("--mode", default="secrecy", choices=MODES[:3])
    p.add_argument("--axis", default="none", choices=AXES)
    p.add_argument("--values", help="comma-separated sweep values")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--out", default="runs/out")
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--qos-rule", default="auto", choices=("auto", "config"))
    p.add_argument("--plotdata", action="store_true", help="also emit figure CSVs")

    p = sub.add_parser("verify", help="run the bound and inner-approximation checks")
    common(p)
    p.add_argument("--expansions", type=int, default=100)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--appendix-samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", help="write the report summary here")

    p = sub.add_parser("dims", help="print problem dimensions")
    common(p)

    p = sub.add_parser("plotdata", help="emit figure CSVs for an artifact directory")
    p.add_argument("artifact")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "plotdata":
            for f in emit_plot_data(args.artifact):
                print(f)
            return EXIT_OK
        spec_cfg = ExperimentSpec(config=args.config, overrides=_parse_overrides(args.set))
        cfg = spec_cfg.base_config()
        if args.verb == "dims":
            print(*al.problem_dimensions(cfg))
            return EXIT_OK
        if args.verb == "verify":
            reports = verify(cfg, args.expansions, args.samples, args.appendix_samples,
                             seed=args.seed)
            text = val.summarize(reports)
            if args.json:
                Path(args.json).write_text(text)
            for r in reports:
                print(f"{'PASS' if r.passed else 'FAIL'} {r.name} samples={r.samples} "
                      f"max_violation={r.max_violation:.3e} tol={r.tol:.0e}")
            return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK
        spec = ExperimentSpec(mode=args.mode, config=args.config, axis=args.axis,
                              values=_parse_values(args.values), trials=args.trials,
                              outdir=args.out, seed_base=args.seed_base,
                              overrides=_parse_overrides(args.set), max_iter=args.max_iter,
                              qos_rule=args.qos_rule)
        out = run_experiment(spec)
        if args.plotdata:
            emit_plot_data(out)
        man = load_manifest(out)
        with open(out / "aggregate.csv") as fh:
            sys.stdout.write(fh.read())
        print(f"artifacts: {out}")
        return EXIT_RUNTIME if man["all_failed"] else EXIT_OK
    except (ConfigError, ArtifactError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
