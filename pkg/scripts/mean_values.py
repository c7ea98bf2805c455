"""Means of F(p - 1) and F'(p - 1) over primes, against their Euler-product limits, at several x."""

import argparse

from torsion_cyclicity.averaging import MultiplicativeSpec, mean_over_shifted_primes, split_mean
from torsion_cyclicity.families import FAMILY_SET


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--x", type=int, action="append", help="repeatable; default 1e4, 1e5, 1e6")
    args = ap.parse_args()
    xs = args.x or [10**4, 10**5, 10**6]
    print("m,function,x,measured,limit,relative_error")
    for m in FAMILY_SET:
        names = ["F"] if MultiplicativeSpec("F", m).label.is_two_power else ["F", "F'"]
        for name in names:
            for x in xs:
                r = mean_over_shifted_primes(MultiplicativeSpec(name, m), x)
                print(f"{m},{name},{x},{r.measured:.8f},{r.predicted:.8f},{r.relative_error:.3e}")
    # the mean over p = 1 mod ell0 separates the two ways of combining the F and F' limits
    for m in (5, 7, 9):
        s = split_mean(m, xs[-1])
        print(f"# m={m}: minus reading err {s.relative_error_minus:.3e}, plus reading err {s.relative_error_plus:.3e}")


if __name__ == "__main__":
    main()
