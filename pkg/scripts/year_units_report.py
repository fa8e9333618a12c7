"""Verification report and derived constants for the year-unit three-phase model.

    python scripts/year_units_report.py [--c0 2.5] [--K 1e-10]
"""
import argparse

from warpcurv.cosmo import CosmologyParams, c1_matching_residual, frw_derivatives, frw_model
from warpcurv.verify import verification_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--c0", type=float, default=1.0)
    ap.add_argument("--K", type=float, default=None, help="lambda-era rate; default 2/(3 t2)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    p = CosmologyParams(c0=args.c0, K=args.K)
    r1, r2 = c1_matching_residual(p)
    _, fpp = frw_derivatives(p)
    print(f"c1 = {p.c1:.17g}\nc2 = {p.c2:.17g}\nK  = {p.K:.17g}{' (default)' if p.K_is_default else ''}")
    print(f"r1 = {r1:.17g}\nr2 = {r2:.17g}")
    for a in fpp.atoms:
        print(f"f'' atom at {a.location:.17g}: {a.weight:.17g}")
    failed = 0
    for r in verification_report(frw_model(p), seed=args.seed, params=p):
        failed += not r.passed
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<40} {r.measured:.3e}  (tol {r.tolerance:.1e}) {r.detail}")
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
