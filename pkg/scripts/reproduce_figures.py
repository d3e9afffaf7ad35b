#!/usr/bin/env python3
"""Emit plot-ready data for the standard ideal / lossy / dark-county story.

Runs the CLI end to end for three detector regimes and two photon-number
priors, leaving CSV matrices, optimisation maps, and fidelity tables under
results/. Any plotting tool can turn these into the usual 3-D bar charts:

  results/pn/                  geometric prior weights for chi=0.7
  results/pmn_<regime>/        conditional matrix P(m|n)
  results/<prior>_<regime>/    posterior, optimisation map, fidelities
  results/simulate_<regime>/   seeded Monte Carlo counts for the same model

The dark-count-swamped case (lambda=10 with the geometric prior) is the
always-guess-zero regime; lossy compensates upward, dark-county downward.
"""

from __future__ import annotations

import sys
from pathlib import Path

from countfix.cli import main

RESULTS = Path(__file__).resolve().parent.parent / "results"

REGIMES = {
    "ideal": ("0", "0"),
    "lossy": ("0.5", "0"),
    "darkcounty": ("0", "1"),
    "swamped": ("0", "10"),
}

PRIORS = {
    "pdc": "pdc:0.7",
    "uniform": "uniform:0:9",
}


def run(args: list[str]) -> None:
    code = main(args)
    if code != 0:
        sys.exit(code)


def main_script() -> None:
    run(["run", "--prior", "pdc:0.7", "--emit", "pn",
         "--out", str(RESULTS / "pn")])
    for regime, (p_loss, lam) in REGIMES.items():
        run(["run", "--p-loss", p_loss, "--lambda", lam, "--prior", "pdc:0.7",
             "--emit", "pmn", "--out", str(RESULTS / f"pmn_{regime}")])
        for prior_name, prior in PRIORS.items():
            run(["run", "--p-loss", p_loss, "--lambda", lam, "--prior", prior,
                 "--emit", "pnm,optmap,fidelity",
                 "--out", str(RESULTS / f"{prior_name}_{regime}")])
    for regime in ("ideal", "lossy", "darkcounty"):
        p_loss, lam = REGIMES[regime]
        run(["simulate", "--p-loss", p_loss, "--lambda", lam, "--seed", "0",
             "--shots", "200000", "--n-max", "9",
             "--out", str(RESULTS / f"simulate_{regime}")])
    print(f"\nall artifacts under {RESULTS}")


if __name__ == "__main__":
    main_script()
