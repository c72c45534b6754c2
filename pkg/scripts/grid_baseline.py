"""Brute-force grid baseline against the secrecy algorithm on tiny instances.

    python scripts/grid_baseline.py --seeds 5
"""

import argparse
import time
from pathlib import Path

from secswipt import algorithms as al
from secswipt import validation
from secswipt.metrics import LN2
from secswipt.model import generate_channels, load_config

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()
    cfg = load_config(ROOT / "configs" / "tiny.cfg")
    print("seed,grid_bits,from_grid_bits,own_init_bits,grid_seconds")
    for seed in range(args.seeds):
        cs = generate_channels(cfg, seed)
        t0 = time.perf_counter()
        g = validation.grid_oracle(cs, cfg)
        tg = time.perf_counter() - t0
        if not g.feasible:
            print(f"{seed},infeasible,,,{tg:.1f}")
            continue
        a = al.run_secrecy(cs, cfg, init=(g.x, g.mu))
        b = al.run_secrecy(cs, cfg)
        print(f"{seed},{g.value / LN2:.6f},{a.final / LN2:.6f},{b.final / LN2:.6f},{tg:.1f}")


if __name__ == "__main__":
    main()
