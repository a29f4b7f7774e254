#!/usr/bin/env python3
"""Write CSV series for every preset scenario, optionally with quick-look plots.

    python3 scripts/run_scenarios.py --outdir results [--plot]
"""

import argparse
from pathlib import Path

from mwapex.cli import summarize, write_records
from mwapex.driver import SCENARIOS, run_program, scenario


def plot(name, records, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot([r.eps[2] for r in records], [r.sigma[2] for r in records], label="axial (33)")
    ax1.plot([r.eps[2] for r in records], [r.mean_stress for r in records], label="mean")
    ax1.set_xlabel("eps33")
    ax1.set_ylabel("stress [MPa]")
    ax1.legend()
    ax2.plot([r.xi for r in records], [r.rho for r in records], ".-", ms=2)
    ax2.set_xlabel("xi [MPa]")
    ax2.set_ylabel("rho [MPa]")
    fig.suptitle(f"scenario {name}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--increments", type=int, default=200)
    ap.add_argument("--plot", action="store_true", help="also write PNGs (needs matplotlib)")
    args = ap.parse_args()

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name in SCENARIOS:
        prog = scenario(name, increments=args.increments)
        records = run_program(prog)
        write_records(records, "csv", out / f"scenario_{name}.csv")
        print(summarize(records, prog.material, name))
        if args.plot:
            plot(name, records, out / f"scenario_{name}.png")


if __name__ == "__main__":
    main()
