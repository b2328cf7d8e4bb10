"""Cone rules on 2x2 symmetric matrices, and what a broken rule looks like.

    python demos/cone_axioms.py --samples 2000
"""
import argparse

from cgc.symcone import SymMat, axiom_suite, cone_member, det_cone, dirichlet_check, non_dirichlet_rule


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'check':<11} {'cone':<22} {'samples':>7} {'hits':>6}  verdict")
    for row in axiom_suite(args.samples, args.seed):
        verdict = "ok" if row.passed else "FAILED"
        print(f"{row.check:<11} {row.cone:<22} {row.samples:>7} {row.violations:>6}  {verdict}")

    # det >= 1 without the positivity requirement is not closed under adding P
    a, b = SymMat.diag(-2.0, -2.0), SymMat.diag(4.0, 0.0)
    bad = non_dirichlet_rule(1.0)
    print("\nA = diag(-2,-2) is in the rule:", cone_member(a, bad))
    print("A + diag(4,0) = diag(2,-2) is in the rule:", cone_member(a + b, bad))
    hits = dirichlet_check(bad, 1, seed=0, extra_pairs=[(a, b)])
    print("reported:", [(v.detail, v.a.upper, v.b.upper) for v in hits if v.detail == "injected"])
    print("the genuine cone keeps it out:", cone_member(a, det_cone(1.0)))


if __name__ == "__main__":
    main()
