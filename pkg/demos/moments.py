"""Sample a Levy-driven lattice field and compare moments with the partition formula.

    python demos/moments.py --law poisson --alpha 0.25 --samples 5000
"""

import argparse

from levyqft.fracop import OperatorSpec
from levyqft.lattice import LatticeSpec
from levyqft.montecarlo import compare, default_point_tuples, simulate
from levyqft.noise import LevyLaw, cumulants

LAWS = {
    "gaussian": LevyLaw.gaussian(1.0),
    "poisson": LevyLaw.poisson(1.0, drift=-1.0),
    "symmetric": LevyLaw.symmetric_jumps(2.0, gaussian_var=0.5),
}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--law", choices=sorted(LAWS), default="poisson")
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--size", type=int, default=32, help="sites per axis")
    p.add_argument("--samples", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    law = LAWS[args.law]
    lat = LatticeSpec((args.size, args.size))
    print(f"law {args.law}: cumulants c_1..c_4 = {cumulants(law, 4)}")
    ens = simulate(lat, OperatorSpec(args.alpha, args.mass), law, args.samples, args.seed)
    report = compare(ens, default_point_tuples(lat, (2, 3, 4), 12, seed=args.seed))
    print(report.to_text())


if __name__ == "__main__":
    main()
