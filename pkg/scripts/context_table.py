"""Print subensemble means for the two BS2 contexts and their gap over theta."""

import argparse
import math

from pathspin.interferometer import CONTEXT_A1, CONTEXT_A2, Channel
from pathspin.statistics import (
    contextuality_gap,
    fluctuation_gap,
    gap_zeros,
    subensemble_mean_analytic,
    whole_ensemble_mean,
)
from pathspin.interferometer import HALF


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--step-deg", type=float, default=15.0)
    args = ap.parse_args()

    print(f"{'theta(deg)':>10} {'SG1|A1':>9} {'SG1|A2':>9} {'SG2|A1':>9} {'SG2|A2':>9}"
          f" {'whole':>7} {'gap':>8} {'dfluct':>8}")
    deg = 0.0
    while deg <= 180.0 + 1e-9:
        t = math.radians(deg)
        row = [subensemble_mean_analytic(bs, t, ch) for ch in Channel for bs in (CONTEXT_A1, CONTEXT_A2)]
        print(f"{deg:10.1f} " + " ".join(f"{v:9.5f}" for v in row)
              + f" {whole_ensemble_mean(HALF, t):7.3f}"
              + f" {contextuality_gap(CONTEXT_A1, CONTEXT_A2, t, Channel.SG1):8.5f}"
              + f" {fluctuation_gap(CONTEXT_A1, CONTEXT_A2, t, Channel.SG1):8.5f}")
        deg += args.step_deg
    zs = ", ".join(f"{math.degrees(z):.3f} deg" for z in gap_zeros(CONTEXT_A1, CONTEXT_A2, Channel.SG1))
    print(f"gap vanishes at: {zs}")


if __name__ == "__main__":
    main()
