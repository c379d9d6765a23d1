#!/usr/bin/env python3
"""Sweep the Hoelder exponent theta on the quadric cone and report the
empirical constant per theta.

The constant typically grows as theta approaches 1; this sweep reports the
trend without claiming a limit.

Usage: python scripts/theta_sweep.py [--pairs N] [--seed S] [--out FILE]
"""

import argparse
import json

from dbarcone.fixtures import make_form, quadric_cone
from dbarcone.verify import holder_report


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=18)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    variety = quadric_cone()
    form = make_form("bump-dbar", 3, h_terms=[((0, 0, 0), 1.0), ((1, 0, 0), 0.5)],
                     r0=0.3, radius=1.0)
    rows = []
    for theta in (0.25, 0.5, 0.75, 0.9):
        rep = holder_report(variety, form, theta, 1.0, args.pairs, args.seed)
        rows.append(
            {
                "theta": theta,
                "empirical_constant": rep.empirical_constant,
                "normalized": rep.empirical_constant / form.sup_bound,
                "n_pairs": len(rep.pairs),
            }
        )
        print(
            f"theta {theta:4.2f}: constant {rep.empirical_constant:10.4f}  "
            f"normalized {rows[-1]['normalized']:10.4f}  ({len(rep.pairs)} pairs)"
        )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
