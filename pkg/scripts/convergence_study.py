"""Mollifier convergence table for a three-phase model.

Prints, for each random bump, the pairing error at eps0, eps0/2, ... and the
per-halving ratios, then the atom estimates at each breakpoint.

    python scripts/convergence_study.py --natural --bumps 5
"""
import argparse
import math

import numpy as np

from warpcurv.cosmo import CosmologyParams, build_scale_factor
from warpcurv.genfun import derivative
from warpcurv.verify import atom_convergence, breakpoint_room, random_bumps, weak_convergence


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--natural", action="store_true", help="c0=1, t1=1, t2=e, K=1/3 instead of the year-unit defaults")
    ap.add_argument("--bumps", type=int, default=10)
    ap.add_argument("--halvings", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--power", type=int, default=4, help="test function is bump**power")
    args = ap.parse_args()

    params = CosmologyParams(c0=1.0, t1=1.0, t2=math.e, K=1 / 3) if args.natural else CosmologyParams()
    f = build_scale_factor(params)
    fpp = derivative(derivative(f))
    rng = np.random.default_rng(args.seed)
    print(f"breakpoints {f.breakpoints}, atoms {[(a.location, a.weight) for a in fpp.atoms]}")
    for phi in random_bumps(f, rng, args.bumps):
        phi = type(phi)(phi.center, phi.radius, args.power)
        s = weak_convergence(f, fpp, phi, 0.1 * phi.radius, args.halvings)
        errs = " ".join(f"{e:.3e}" for e in s.errors)
        ratios = " ".join(f"{r:.4f}" for r in s.ratios)
        print(f"bump c={phi.center:.6g} r={phi.radius:.4g}: errors {errs} | ratios {ratios}")
    for t_i in f.breakpoints:
        room = breakpoint_room(f, t_i)
        eps, est = atom_convergence(f, t_i, 0.05 * room, args.halvings, radius=0.5 * room)
        exact = fpp.atom_at(t_i)
        print(f"atom at {t_i:.17g}: closed form {exact:.17g}")
        for e, w in zip(eps, est):
            print(f"  eps={e:.4g}  estimate {w:.17g}")


if __name__ == "__main__":
    main()
