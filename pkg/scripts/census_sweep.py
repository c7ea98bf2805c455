"""Census of C_p(m) against the cyclic m-torsion main term for every p in a range.

Writes one CSV row per (p, m) and prints the worst normalized error.
"""

import argparse
import csv
import sys

from torsion_cyclicity.census import compare
from torsion_cyclicity.numtheory import primes_up_to

MS = (1, 4, 5, 6, 7, 8, 9, 10, 12)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pmax", type=int, default=300)
    ap.add_argument("--output", default="-")
    args = ap.parse_args()
    out = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    writer = None
    worst = 0.0
    for p in primes_up_to(args.pmax):
        if p < 5:
            continue
        for m in MS:
            if m % p == 0:
                continue
            rep = compare(p, "C", m)
            worst = max(worst, rep.normalized_error)
            row = rep.row()
            if writer is None:
                writer = csv.DictWriter(out, fieldnames=list(row), lineterminator="\n")
                writer.writeheader()
            writer.writerow(row)
    print(f"worst |count - main| / sqrt(p): {worst:.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
