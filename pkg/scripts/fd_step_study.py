#!/usr/bin/env python3
"""Residual medians as a function of the finite-difference step.

Documents the noise floor: residuals shrink with the step until quadrature
noise (which scales like 1/step) takes over.

Usage: python scripts/fd_step_study.py [--fixture line2|quadric-cone]
"""

import argparse

import numpy as np

from dbarcone.fixtures import line2, make_form, quadric_cone
from dbarcone.measure import sample_link
from dbarcone.quadrature import QuadratureParams
from dbarcone.solver import solve
from dbarcone.verify import dbar_residual


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--fixture", choices=("line2", "quadric-cone"), default="line2")
    ap.add_argument("--samples", type=int, default=8)
    ap.add_argument("--seed", type=int, default=2)
    args = ap.parse_args()

    if args.fixture == "line2":
        variety = line2()
        form = make_form("bump-dbar", 2, h_terms=[((0, 0), 1.0), ((1, 0), 0.5)],
                         r0=0.3, radius=1.0)
        anchor = np.array([np.sqrt(2.0), 0.0])
    else:
        variety = quadric_cone()
        form = make_form("bump-dbar", 3, h_terms=[((0, 0, 0), 1.0), ((1, 0, 0), 0.5)],
                         r0=0.3, radius=1.0)
        anchor = sample_link(variety, 1, args.seed).points[0]

    params = QuadratureParams(rel_tol=1e-8, abs_tol=1e-11)
    handle = lambda z: solve(variety, form, z, params).value  # noqa: E731
    print(f"fixture {args.fixture}; solver tolerances rel 1e-8 / abs 1e-11")
    for h in (1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5):
        rep = dbar_residual(
            variety, form, handle, anchor, args.samples, h,
            rng_seed=args.seed, check_step=False,
        )
        print(f"fd_step {h:8.1e}: median {rep.median_residual:9.2e}  max {rep.max_residual:9.2e}")


if __name__ == "__main__":
    main()
