"""Iteration counts and run times of the three loops on the reference scenario.

    python scripts/convergence_study.py --trials 20
"""

import argparse
import statistics
from pathlib import Path

from secswipt import cli
from secswipt.algorithms import problem_dimensions
from secswipt.model import load_config

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--config", default=str(ROOT / "configs" / "paper.cfg"))
    args = ap.parse_args()
    cfg = load_config(args.config)
    print("dimensions (variables, linear, quadratic):", problem_dimensions(cfg))
    for mode in ("secrecy", "secrecy-noeve", "see"):
        recs = [cli.run_trial(mode, cfg, seed) for seed in range(args.trials)]
        for r in recs:
            print(f"{mode} seed {r['seed']}: {r['status']} {r['iterations']} iterations, "
                  f"{r['objective_bits']:.4f}, {r['seconds']:.1f}s, monotone={r['monotone']}")
        ok = [r for r in recs if r["status"] == "ok"]
        if ok:
            its = [r["iterations"] for r in ok]
            print(f"== {mode}: {len(ok)}/{len(recs)} ok, median {statistics.median(its)} / "
                  f"max {max(its)} iterations, mean objective "
                  f"{statistics.mean(r['objective_bits'] for r in recs):.4f}")


if __name__ == "__main__":
    main()
