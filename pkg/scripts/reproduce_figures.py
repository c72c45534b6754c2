"""Run every sweep behind the rate and energy-efficiency figures and emit plot CSVs.

    python scripts/reproduce_figures.py --trials 20 --out runs

Each sweep lands in its own artifact directory under --out; set
SECSWIPT_WORKERS to spread trials over processes.
"""

import argparse
from pathlib import Path

from secswipt import cli

ROOT = Path(__file__).resolve().parents[1]
PAPER = str(ROOT / "configs" / "paper.cfg")
PERFECT = str(ROOT / "configs" / "perfect_csi.cfg")

SWEEPS = [
    # name, mode, config, axis, values
    ("rate_vs_M", "secrecy", PAPER, "M", [4, 5, 6]),
    ("rate_vs_M_perfect", "secrecy", PERFECT, "M", [4, 5, 6]),
    ("rate_vs_emin", "secrecy", PAPER, "e_min_dbm", [-25, -20, -15, -10, -5, 0]),
    ("rate_vs_emin_perfect", "secrecy", PERFECT, "e_min_dbm", [-25, -20, -15, -10, -5, 0]),
    ("rate_vs_eps0", "secrecy", PAPER, "eps0", [0.001, 0.005, 0.01, 0.02]),
    ("rate_vs_eps1", "secrecy", PAPER, "eps1", [0.0005, 0.001, 0.002, 0.005]),
    ("rate_noeve_vs_M", "secrecy-noeve", PAPER, "M", [4, 5, 6]),
    ("see_vs_M", "see", PAPER, "M", [4, 5, 6]),
    ("see_vs_M_perfect", "see", PERFECT, "M", [4, 5, 6]),
    ("see_vs_emin", "see", PAPER, "e_min_dbm", [-25, -20, -15, -10]),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--out", default="runs")
    ap.add_argument("--only", nargs="*", help="subset of sweep names")
    args = ap.parse_args()
    for name, mode, config, axis, values in SWEEPS:
        if args.only and name not in args.only:
            continue
        spec = cli.ExperimentSpec(mode=mode, config=config, axis=axis, values=values,
                                  trials=args.trials, outdir=str(Path(args.out) / name))
        out = cli.run_experiment(spec)
        cli.emit_plot_data(out)
        print(f"== {name}")
        print((out / "aggregate.csv").read_text())


if __name__ == "__main__":
    main()
