"""Bound-ratio study, shell integrability and the j = l = 1 split chain.

    python demos/hsc_bounds.py --family-size 8
"""

import argparse

from levyqft.hsc import bound_ratio_study, hsc_split_check, local_integrability_study


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--family-size", type=int, default=8)
    p.add_argument("--n", type=int, choices=(2, 3), default=2)
    args = p.parse_args()

    rep = bound_ratio_study(args.n, args.alpha, family_size=args.family_size)
    for mem in rep.members:
        print(f"{mem['kind']:<10} ratio {mem['ratio']:.4e}  converged {mem['converged']}")
    print(f"narrowing slope {rep.narrowing_slope:+.3f}; spreading slopes "
          f"{rep.spreading_slope_weighted:+.3f} (weighted), "
          f"{rep.spreading_slope_unweighted:+.3f} (unweighted control)")

    for a in (0.1, 0.2, 0.3, 0.4):
        conv = local_integrability_study(a)
        print(f"alpha {a}: fitted slope {conv.fitted_slope:.4f}, expected {conv.expected_slope:.4f}")

    split = hsc_split_check(args.alpha, size=10)
    print(f"split chain holds for {sum(r['holds'] for r in split.rows)}/{len(split.rows)} "
          f"pairs with C = {split.constant:.4g}")


if __name__ == "__main__":
    main()
