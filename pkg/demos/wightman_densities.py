"""Evaluate truncated Wightman densities and run the axiom checks at small scale.

    python demos/wightman_densities.py --n 3 --alpha 0.25
"""

import argparse

import numpy as np

from levyqft.wightman import (check_hermiticity, check_lorentz_invariance, check_positivity,
                              check_spectral_support, complete_momenta, continuation_check_n2,
                              wightman_truncated_density)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--points", type=int, default=50_000)
    args = p.parse_args()
    n, a, m = args.n, args.alpha, args.mass

    rng = np.random.default_rng(1)
    free = rng.normal(0.0, 2.0, size=(5, n - 1, 2))
    free[:, :, 0] = -np.abs(free[:, :, 0]) - 1.5
    k = complete_momenta(free)
    if not (n == 2 and a == 0.5):
        for kk, v in zip(k, wightman_truncated_density(n, a, m, 1, 1.0, k)):
            print(np.round(kk, 3).tolist(), f"{v:.6e}")

    for rep in (check_spectral_support(n, a, m, 1, args.points),
                check_hermiticity(n, a, m, 1, args.points // 5),
                check_lorentz_invariance(n, a, m, 1, points=args.points // 10),
                check_positivity(n, a, m, 1, [0.5, 1.0, 1.0, 1.0, 1.0][:max(n, 2)])):
        print(f"{rep.axiom:<22} points {rep.points_checked:>8}  "
              f"{'pass' if rep.passed else 'FAIL'}")

    cont = continuation_check_n2(0.5, m, 1, [(t, [0.0]) for t in (0.5, 1.0, 2.0, 5.0)])
    for row in cont.rows:
        print(f"tau {row['tau']:4.1f}: momentum route {row['momentum_route']:.8e}  "
              f"Green route {row['green_route']:.8e}")


if __name__ == "__main__":
    main()
