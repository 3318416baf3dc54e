#!/usr/bin/env python3
"""Convergence experiment on the oscillating-coefficient showcase problem.

Halves the grid step repeatedly, measures the sup error against the reference
solution on [0, T], and reports the bound, the per-halving ratios, and the
fitted order.  Writes results/convergence.csv.
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from pcadde.analysis import convergence_csv, convergence_study
from pcadde.model import load_problem

REPO = Path(__file__).resolve().parent.parent


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--problem", default=str(REPO / "problems" / "sin_abscos.json"))
    parser.add_argument("--T", type=float, default=10.0)
    parser.add_argument("--k-list", default="2,4,8,16,32")
    parser.add_argument("--out", default=str(REPO / "results"))
    args = parser.parse_args()

    spec = load_problem(args.problem)
    k_list = [int(tok) for tok in args.k_list.split(",")]
    rows = convergence_study(spec, args.T, k_list)

    print(f"problem: {spec.label}, T = {args.T}")
    print(f"{'k':>4} {'h':>10} {'sup error':>12} {'bound':>12} {'ratio':>7}")
    for row in rows:
        ratio = f"{row.ratio_prev:.2f}" if row.ratio_prev else ""
        print(f"{row.k:>4} {row.h:>10.6f} {row.measured:>12.6g} {row.bound:>12.4g} {ratio:>7}")

    slope = np.polyfit(np.log([r.h for r in rows]), np.log([r.measured for r in rows]), 1)[0]
    print(f"fitted order: {slope:.3f}")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "convergence.csv").write_text(convergence_csv(rows))
    print(f"wrote {out_dir / 'convergence.csv'}")


if __name__ == "__main__":
    main()
