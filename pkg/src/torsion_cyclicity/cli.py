"""Command-line entry point: ``torsion-cyclicity <subcommand> [flags]``.

Every subcommand writes a table as CSV (header row, records, then one
``# config: {...}`` comment line) or JSON (``{"config": ..., "records": [...]}``).
Exit status is 0 on success, 1 when an invariant fails, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import random
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import averaging, census, densities, families
from .finite_curves import WeierstrassCurve, count_points, count_points_naive
from .numtheory import is_prime, primes_up_to

log = logging.getLogger("torsion_cyclicity")

OUTPUT_DIR_ENV = "TORSION_CYCLICITY_OUTPUT_DIR"
DEFAULT_SEED = 20240101
CENSUS_MS = (1, 4, 5, 6, 7, 8, 9, 10, 12)


class InvalidInput(ValueError):
    pass


class InvariantFailure(AssertionError):
    def __init__(self, check: str, detail: dict):
        self.check, self.detail = check, detail
        super().__init__(f"{check}: {detail}")


@dataclass
class RunConfig:
    subcommand: str
    fmt: str = "csv"
    output: str | None = None
    workers: int = 1
    seed: int = DEFAULT_SEED
    options: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        """Everything that determines the records; output path and worker count do not."""
        d = asdict(self)
        d.pop("output")
        d.pop("workers")
        return d


def _prime_arg(p: int, name: str = "p") -> int:
    if p <= 3 or not is_prime(p):
        raise InvalidInput(f"--{name} {p}: need a prime > 3")
    return p


def _family_m(m: int) -> int:
    if m not in families.FAMILY_SET:
        raise InvalidInput(f"--m {m}: need one of {families.FAMILY_SET}")
    return m


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


# ---------------------------------------------------------------------------
# subcommands; each returns a list of flat dict records


def cmd_census(cfg: RunConfig) -> list[dict]:
    o = cfg.options
    if o["p"] is not None:
        primes = [_prime_arg(o["p"])]
    else:
        lo, hi = o["pmin"], o["pmax"]
        if lo > hi:
            raise InvalidInput(f"--pmin {lo} exceeds --pmax {hi}")
        primes = [p for p in primes_up_to(hi) if p >= max(lo, 5)]
    if any(p > o["cap"] for p in primes):
        raise InvalidInput(f"primes above the census cap {o['cap']}; raise --cap")
    ms = o["m"] or list(CENSUS_MS)
    records = []
    for p in primes:
        c = census.census(p, cap=o["cap"])
        if c.weighted_mass != p or c.mass_by_aut() != p:
            raise InvariantFailure("mass formula", {"p": p, "mass": _frac(c.mass_by_aut())})
        for m in ms:
            if m % p == 0:
                continue
            for weighted in (True, False):
                rep = census.compare(p, "C", m, weighted=weighted)
                rec = rep.record
                if rec.unweighted_count - 2 * rec.weighted_count != rec.partition_excess():
                    raise InvariantFailure("aut partition", {"p": p, "m": m})
                records.append(rep.row())
        for a, b in o["w"]:
            records.append(census.compare(p, "W", a, b).row())
        for m in o["t"]:
            if m % p:
                records.append(census.compare(p, "T", m).row())
    return records


def _check(records: list[dict], check: str, param: str, passed: bool, detail: str = ""):
    records.append({"check": check, "parameter": param, "passed": passed, "detail": detail})


def cmd_verify(cfg: RunConfig) -> list[dict]:
    o = cfg.options
    records: list[dict] = []
    primes = [q for q in primes_up_to(o["qmax"]) if q >= 5]
    conv_bad = chain_bad = 0
    for q in primes:
        for m in range(1, o["mmax"] + 1):
            if m % q == 0:
                continue
            conv_bad += not densities.verify_convolution(q, m)
            chain_bad += densities.inclusion_exclusion_main_term(q, m) != q * densities.cyclic_mtors_density(q, m)
    _check(records, "convolution", f"q<={o['qmax']},m<={o['mmax']}", conv_bad == 0, f"failures={conv_bad}")
    _check(records, "inclusion_exclusion", f"q<={o['qmax']},m<={o['mmax']}", chain_bad == 0, f"failures={chain_bad}")

    branches, prime_power_bad = set(), 0
    for q in primes_up_to(o["qmax"]):
        for ell in (2, 3, 5, 7):
            if ell == q:
                continue
            for e in range(1, 5):
                lhs, rhs, branch = densities.prime_power_terms(q, ell, e)
                branches.add(branch)
                prime_power_bad += lhs != rhs
    _check(records, "prime_power_case", "ell<=7,e<=4", prime_power_bad == 0 and len(branches) == 2, ",".join(sorted(branches)))

    reference_ok = all(densities.c_m(m) == v for m, v in densities.REFERENCE_C_M.items())
    _check(records, "c_m_table", "m in family set", reference_ok)

    # multiplicativity of w_tilde on random coprime splits
    rng = random.Random(cfg.seed)
    mult_bad = 0
    for _ in range(o["samples"]):
        q = rng.choice(primes)
        a1, a2 = rng.choice([(1, 1), (2, 4), (1, 8), (2, 2)]), rng.choice([(1, 3), (3, 9), (1, 5), (5, 5), (1, 1)])
        (x1, y1), (x2, y2) = a1, a2
        lhs = densities.w_tilde(x1 * x2, y1 * y2, q)
        mult_bad += lhs != densities.w_tilde(x1, y1, q) * densities.w_tilde(x2, y2, q)
    _check(records, "w_tilde_multiplicative", f"samples={o['samples']}", mult_bad == 0)

    for m in families.FAMILY_SET:
        tp = [p for p in primes_up_to(o["equivalence_pmax"]) if p >= 5]
        counts = families.equivalence_convention(m, tp)
        valid = sorted(c for c, n in counts.items() if n == 0)
        detail = ";".join(f"{c}={n}" for c, n in counts.items())
        ok = ("printed" in valid) if m not in (7, 9) else bool(valid)
        _check(records, "parameter_equivalence", f"m={m}", ok, f"validates={'|'.join(valid) or 'none'};{detail}")

    struct_bad = 0
    for p in [p for p in primes_up_to(o["struct_pmax"]) if p >= 5]:
        for c in census.census(p):
            s = c.shape
            try:
                s.check(p)
            except AssertionError:
                struct_bad += 1
            ells = [ell for ell in primes_up_to(p - 1) if (p - 1) % ell == 0]
            obvious = all(not (s.n1 % ell == 0 and s.n2 % ell == 0) for ell in ells)
            struct_bad += obvious != (s.n2 == 1)
    _check(records, "group_structure_invariants", f"p<={o['struct_pmax']}", struct_bad == 0, f"failures={struct_bad}")

    count_bad = 0
    for _ in range(o["samples"]):
        p = rng.choice([p for p in primes_up_to(61) if p >= 5])
        E = WeierstrassCurve.short(p, rng.randrange(p), rng.randrange(p))
        if not E.is_singular:
            count_bad += count_points(E) != count_points_naive(E)
    _check(records, "point_count_cross_check", f"samples={o['samples']}", count_bad == 0)

    failed = [r for r in records if not r["passed"]]
    if failed and o["strict"]:
        cfg.options["_failure"] = failed[0]
    return records


def cmd_avg(cfg: RunConfig) -> list[dict]:
    o = cfg.options
    m = _family_m(o["m"])
    if o["x"] < 5:
        raise InvalidInput(f"--x {o['x']}: need x >= 5")
    if o["mode"] == "density":
        rep = averaging.average_density(m, o["x"], L=o["L"], workers=cfg.workers)
    else:
        if o["A"] is None or o["A"] < 1:
            raise InvalidInput("--mode direct needs --A >= 1")
        rep = averaging.average_direct(m, o["A"], o["x"], L=o["L"])
    cfg.options["_summary"] = {
        "measured": rep.measured,
        "predicted": rep.predicted,
        "relative_error": rep.relative_error,
        "warning": rep.warning,
    }
    return [r.row() for r in rep.per_prime]


def cmd_constants(cfg: RunConfig) -> list[dict]:
    o = cfg.options
    if o["L"] < 2:
        raise InvalidInput("--L must be at least 2")
    ms = [_family_m(m) for m in (o["m"] or families.FAMILY_SET)]
    records = []
    for m in ms:
        c = densities.c_m(m)
        ep = densities.euler_product(m, o["L"])
        leading = ep.truncated_value * c.numerator / c.denominator
        records.append(
            {
                "m": m,
                "c_m": _frac(c),
                "reference_match": c == densities.REFERENCE_C_M[m],
                "L": o["L"],
                "euler_product": str(ep.truncated_value),
                "tail_bound": f"{ep.tail_bound:.3e}",
                "correct_digits": ep.correct_digits,
                "leading_constant": str(leading),
            }
        )
    if not all(r["reference_match"] for r in records):
        cfg.options["_failure"] = next(r for r in records if not r["reference_match"])
    return records


def cmd_family(cfg: RunConfig) -> list[dict]:
    o = cfg.options
    m = _family_m(o["m"])
    spec = families.family_spec(m)
    if o["what"] == "coefficients":
        rows = [
            {"part": "a1", "polynomial": str(spec.a1.num), "denominator": str(spec.a1.den), "exponent": ""},
            {"part": "a2=a3", "polynomial": str(spec.a2.num), "denominator": str(spec.a2.den), "exponent": ""},
        ]
        rows += [
            {"part": "discriminant", "polynomial": str(f), "denominator": "", "exponent": e}
            for f, e in spec.disc_factors
        ]
        return rows
    p = _prime_arg(o["p"])
    if o["what"] == "equivalence":
        rows = []
        for conv in families.CONVENTIONS:
            rep = families.verify_parameter_equivalence(m, p, conv)
            rows.append(
                {
                    "convention": conv,
                    "checked": rep.checked,
                    "exceptional": " ".join(map(str, rep.exceptional)),
                    "discrepancies": len(rep.discrepancies),
                    "first": "" if rep.ok else f"{rep.discrepancies[0][0]}: {rep.discrepancies[0][1]}",
                }
            )
        return rows
    if p > o["cap"]:
        raise InvalidInput(f"--p {p} exceeds family census cap {o['cap']}")
    fc = census.family_census(p, m, cap=o["cap"])
    red = families.reduce_family(m, p)
    rows = []
    for b, shape, aut, order in zip(fc.parameters.tolist(), fc.shapes(), fc.aut.tolist(), fc.marked_order.tolist()):
        a1, a2, a3, _, _ = (int(c) for c in red.coeffs[b])
        if order != m and o["strict"]:
            cfg.options["_failure"] = {"b": b, "marked_order": order}
        rows.append(
            {
                "b": b,
                "a1": a1,
                "a2": a2,
                "a3": a3,
                "N": shape.N,
                "n1": shape.n1,
                "n2": shape.n2,
                "cyclic": shape.n2 == 1,
                "marked_order": order,
                "aut": aut,
                "equivalent": " ".join(map(str, sorted(families.equivalent_parameters(m, b, p)))),
            }
        )
    cfg.options["_summary"] = {"valid": fc.valid_count, "cyclic": fc.cyclic_count, "by_aut": fc.cyclic_by_aut()}
    return rows


COMMANDS = {
    "census": cmd_census,
    "verify": cmd_verify,
    "avg": cmd_avg,
    "constants": cmd_constants,
    "family": cmd_family,
}


# ---------------------------------------------------------------------------
# argument parsing and output


def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a,b got {text!r}") from None
    return a, b


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--output", "-o", help=f"file path, '-' for stdout (default: stdout, or ${OUTPUT_DIR_ENV})")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(prog="torsion-cyclicity", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("census", parents=[common], help="brute-force counts vs main terms")
    p.add_argument("--p", type=int)
    p.add_argument("--pmin", type=int, default=5)
    p.add_argument("--pmax", type=int, default=61)
    p.add_argument("--m", type=int, action="append", help="repeatable; default 1,4,5,6,7,8,9,10,12")
    p.add_argument("--w", type=_pair, action="append", default=[], help="extra W(a,b) rows, as a,b")
    p.add_argument("--t", type=int, action="append", default=[], help="extra T(m) rows")
    p.add_argument("--cap", type=int, default=census.CENSUS_CAP)

    p = sub.add_parser("verify", parents=[common], help="exact identity sweeps and invariant suites")
    p.add_argument("--qmax", type=int, default=500)
    p.add_argument("--mmax", type=int, default=60)
    p.add_argument("--equivalence-pmax", dest="equivalence_pmax", type=int, default=61)
    p.add_argument("--struct-pmax", dest="struct_pmax", type=int, default=61)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--no-strict", dest="strict", action="store_false")

    p = sub.add_parser("avg", parents=[common], help="family average of cyclic reductions")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--x", type=int, default=1000)
    p.add_argument("--mode", choices=("density", "direct"), default="density")
    p.add_argument("--A", type=int)
    p.add_argument("--L", type=int, default=averaging.DEFAULT_L)

    p = sub.add_parser("constants", parents=[common], help="C_m and truncated Euler products")
    p.add_argument("--m", type=int, action="append")
    p.add_argument("--L", type=int, default=10**6)

    p = sub.add_parser("family", parents=[common], help="family data for one (m, p)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--p", type=int, default=11)
    p.add_argument("--what", choices=("params", "coefficients", "equivalence"), default="params")
    p.add_argument("--cap", type=int, default=census.FAMILY_CENSUS_CAP)
    p.add_argument("--strict", action="store_true", help="fail if (0,0) ever has order < m")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    generic = {"subcommand", "fmt", "output", "workers", "seed", "verbose"}
    options = {k: v for k, v in vars(args).items() if k not in generic}
    if args.workers < 1:
        raise InvalidInput("--workers must be at least 1")
    return RunConfig(args.subcommand, args.fmt, args.output, args.workers, args.seed, options)


def render(records: list[dict], cfg: RunConfig) -> str:
    meta = cfg.as_dict()
    meta["options"] = {k: v for k, v in meta["options"].items() if not k.startswith("_")}
    if cfg.fmt == "json":
        return json.dumps({"config": meta, "records": records}, indent=1, default=str) + "\n"
    buf = io.StringIO()
    if records:
        writer = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(records)
    buf.write("# config: " + json.dumps(meta, sort_keys=True, default=str) + "\n")
    return buf.getvalue()


def _destination(cfg: RunConfig) -> Path | None:
    if cfg.output == "-":
        return None
    if cfg.output:
        return Path(cfg.output)
    env = os.environ.get(OUTPUT_DIR_ENV)
    if env:
        return Path(env) / f"{cfg.subcommand}.{cfg.fmt}"
    return None


def run(cfg: RunConfig) -> int:
    records = COMMANDS[cfg.subcommand](cfg)
    text = render(records, cfg)
    dest = _destination(cfg)
    if dest is None:
        sys.stdout.write(text)
    else:
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text)
        log.info("wrote %s", dest)
    summary = cfg.options.get("_summary")
    if summary is not None:
        sys.stderr.write(json.dumps({"summary": summary}, default=str) + "\n")
    failure = cfg.options.get("_failure")
    if failure is not None:
        sys.stderr.write(json.dumps({"invariant_failure": failure}, default=str) + "\n")
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _config_from_args(args)
        return run(cfg)
    except InvalidInput as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except InvariantFailure as exc:
        sys.stderr.write(json.dumps({"invariant_failure": exc.check, "detail": exc.detail}, default=str) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
