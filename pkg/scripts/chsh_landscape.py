"""Scan the second spin setting and report CHSH value and L1 distance to the noncontextual polytope."""

import argparse
import math

import numpy as np

from pathspin.nchv import ContextSet, build_strategy_problem, chsh, chsh_optimal_settings, nchv_feasible


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=13)
    args = ap.parse_args()

    gammas, (t1, _) = chsh_optimal_settings()
    print(f"{'theta2':>8} {'S':>8} {'max|S|':>8} {'L1':>10}  verdict")
    for t2 in np.linspace(0, math.pi, args.points):
        thetas = (t1.theta, float(t2))
        res = nchv_feasible(build_strategy_problem(ContextSet(gammas, thetas)))
        verdict = "feasible" if res.feasible else "infeasible"
        worst = abs(res.certificate.value) if res.certificate else float("nan")
        print(f"{t2:8.4f} {chsh(gammas, thetas):8.4f} {worst:8.4f} {res.distance:10.3e}  {verdict}")


if __name__ == "__main__":
    main()
