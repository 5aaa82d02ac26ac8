"""Monte Carlo estimate of the SG1 subensemble mean versus sample size, for both contexts."""

import argparse
import math

from pathspin.interferometer import CONTEXT_A1, CONTEXT_A2, HALF, Channel, run_pipeline
from pathspin.statistics import SampleConfig, estimate, sample, subensemble_mean_analytic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--theta", type=float, default=math.pi / 8)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    for name, bs in (("A1", CONTEXT_A1), ("A2", CONTEXT_A2)):
        exact = subensemble_mean_analytic(bs, args.theta, Channel.SG1)
        print(f"context {name}: exact SG1 mean {exact:.6f}")
        for k in range(2, 8):
            n = 10**k
            st = estimate(sample(run_pipeline(HALF, bs), args.theta,
                                 SampleConfig(n, seed=args.seed), workers=args.workers))
            z = (st.mean_sg1 - exact) / st.se_mean_sg1 if st.se_mean_sg1 else float("nan")
            print(f"  N=1e{k}: {st.mean_sg1:+.6f} +- {st.se_mean_sg1:.2e}  (z = {z:+.2f})")


if __name__ == "__main__":
    main()
