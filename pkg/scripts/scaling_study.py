#!/usr/bin/env python3
"""Measure-scaling exponents on the builtin cone fixtures.

Fits log(integral over Sigma cap B_rho) against log(rho) for the plain
measure (expected 2d) and the |z|^2 moment (expected 2d + 2).

Usage: python scripts/scaling_study.py [--samples N] [--seed S]
"""

import argparse

from dbarcone.fixtures import line2, quadric_cone
from dbarcone.verify import measure_scaling_check


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=40000)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()

    for name, variety in (("line2", line2()), ("quadric-cone", quadric_cone())):
        for integrand in ("one", "norm2"):
            rep = measure_scaling_check(
                variety, [0.5, 1.0, 2.0], args.samples, args.seed, integrand=integrand
            )
            print(
                f"{name:12s} integrand {integrand:5s}: exponent "
                f"{rep.exponent:6.3f} +- {rep.exponent_std_error:.3f} "
                f"(expected {rep.expected_exponent:.0f})"
            )
            for row in rep.rows:
                print(
                    f"    rho {row.radius:4.2f}: integral {row.value:12.6f} "
                    f"+- {row.std_error:.6f}"
                )


if __name__ == "__main__":
    main()
