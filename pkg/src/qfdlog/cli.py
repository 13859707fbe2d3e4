"""Command-line front end.

Exit codes: 0 success, 2 verification failure, 3 timeout, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import secest
from .exceptions import LikelyNonPrincipal, QFDlogError, Timeout, Unverified
from .ntkernel import gen_prime_discriminant

EXIT_OK = 0
EXIT_UNVERIFIED = 2
EXIT_TIMEOUT = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _seed_default():
    env = os.environ.get("QFDLOG_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"QFDLOG_SEED must be an integer, got {env!r}") from None


def _common(p, solver=True):
    p.add_argument("--seed", type=int, default=None, help="random seed (default: $QFDLOG_SEED or 0)")
    p.add_argument("--json", action="store_true", help="print one JSON object")
    if not solver:
        return
    p.add_argument("--jobs", type=int, default=1, help="parallel relation producers")
    p.add_argument("--fb-size", type=int, default=None, help="factor base size")
    p.add_argument("--surplus", type=int, default=10, help="relations beyond the factor base size")
    p.add_argument("--timeout", type=float, default=None, help="seconds before giving up")
    p.add_argument("--cache", default=None, help="relation cache file (read if present, then written)")
    cert = p.add_mutually_exclusive_group()
    cert.add_argument("--certified", dest="certified", action="store_true", default=None)
    cert.add_argument("--no-certified", dest="certified", action="store_false")


def build_parser():
    ap = _Parser(prog="qfdlog", description="Index calculus in quadratic fields.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-disc", help="random prime discriminant")
    p.add_argument("--bits", type=int, required=True)
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--imaginary", dest="sign", action="store_const", const=-1)
    kind.add_argument("--real", dest="sign", action="store_const", const=1)
    _common(p, solver=False)

    p = sub.add_parser("classgroup", help="class number and group structure")
    p.add_argument("-d", "--delta", required=True)
    _common(p)

    p = sub.add_parser("regulator", help="regulator of a real quadratic field")
    p.add_argument("-d", "--delta", required=True)
    _common(p)

    p = sub.add_parser("dlog", help="discrete logarithm in an imaginary class group")
    p.add_argument("-d", "--delta", required=True)
    p.add_argument("-g", "--base", required=True, metavar="A,B")
    p.add_argument("-a", "--target", required=True, metavar="A,B")
    _common(p)

    p = sub.add_parser("infra-dlog", help="distance of a reduced principal ideal")
    p.add_argument("-d", "--delta", required=True)
    p.add_argument("-a", "--target", required=True, metavar="A,B")
    _common(p)

    p = sub.add_parser("estimate", help="security parameter estimates")
    what = p.add_mutually_exclusive_group()
    what.add_argument("--table", action="store_true", help="full table (default)")
    what.add_argument("--target-rsa", type=int, metavar="BITS")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--paper-calibrated", dest="literal", action="store_false", default=False)
    mode.add_argument("--literal-units", dest="literal", action="store_true")
    p.add_argument("--anchor-bits", type=int, default=None)
    p.add_argument("--anchor-seconds", type=float, default=None)
    p.add_argument("--anchor-mips", type=float, default=secest.ANCHOR_MIPS)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("bench", help="timing breakdown over a range of sizes")
    p.add_argument("--bits-range", required=True, metavar="LO:HI")
    p.add_argument("--step", type=int, default=10)
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--imaginary", dest="sign", action="store_const", const=-1, default=-1)
    kind.add_argument("--real", dest="sign", action="store_const", const=1)
    _common(p)
    return ap


# ---------------------------------------------------------------------------


def _emit(args, record, text):
    if args.json:
        print(json.dumps(record, sort_keys=True))
    else:
        print(text)


def _estimator(args, seed, certified_default):
    from .solver import IndexCalculus

    certified = certified_default if args.certified is None else args.certified
    return IndexCalculus(
        seed=seed,
        fb_size=args.fb_size,
        surplus=args.surplus,
        certified=certified,
        timeout=args.timeout,
        jobs=args.jobs,
    )


def _fit(args, seed, certified_default, delta):
    from .relgen import read_cache, write_cache

    est = _estimator(args, seed, certified_default)
    cached = None
    if args.cache and os.path.exists(args.cache):
        FB, cached, _ = read_cache(args.cache)
        if FB.delta != int(delta):
            raise UsageError(f"cache {args.cache} is for discriminant {FB.delta}")
    est.fit(delta, relations=cached)
    if args.cache:
        write_cache(args.cache, est.relations_)
    return est


def _cmd_gen_disc(args, seed):
    D = gen_prime_discriminant(args.bits, args.sign, seed)
    rec = {"delta": str(int(D)), "bits": args.bits, "seed": seed}
    _emit(args, rec, str(D))
    return EXIT_OK


def _cmd_classgroup(args, seed):
    from ._validation import check_discriminant
    from .solver import result_record

    D = check_discriminant(args.delta, sign=-1)
    est = _fit(args, seed, True, D)
    if est.h_ is None:
        raise QFDlogError("relations did not determine the class number")
    rec = result_record(D, seed, h=est.h_, invariants=list(est.invariants_), relations_used=len(est.relations_))
    inv = " x ".join(f"C({m})" for m in est.invariants_) or "trivial"
    _emit(args, rec, f"h = {est.h_}\nCl = {inv}")
    return EXIT_OK


def _cmd_regulator(args, seed):
    from ._validation import check_discriminant
    from .solver import result_record

    D = check_discriminant(args.delta, sign=1)
    est = _fit(args, seed, True, D)
    R = est.regulator_
    rec = result_record(D, seed, h=R.h, regulator=R.R, relations_used=len(est.relations_))
    text = f"R = {float(R.R):.12f}"
    if R.h is not None:
        text += f"\nh = {R.h}"
    _emit(args, rec, text)
    return EXIT_OK


def _cmd_dlog(args, seed):
    from ._validation import check_discriminant, check_ideal
    from .solver import result_record, verify_dlp

    D = check_discriminant(args.delta, sign=-1)
    g = check_ideal(D, args.base)
    a = check_ideal(D, args.target)
    est = _fit(args, seed, False, D)
    x = est.dlog(g, a)
    ok = verify_dlp(D, g, a, x)
    rec = result_record(D, seed, h=est.h_, invariants=list(est.invariants_ or []) or None,
                        dlog=x, verified=ok, relations_used=len(est.relations_))
    _emit(args, rec, f"x = {x}\nverified = {ok}")
    return EXIT_OK if ok else EXIT_UNVERIFIED


def _cmd_infra(args, seed):
    from ._validation import check_discriminant, check_ideal
    from .solver import result_record, verify_infra

    D = check_discriminant(args.delta, sign=1)
    a = check_ideal(D, args.target)
    est = _fit(args, seed, False, D)
    t = est.infra_dlog(a)
    ok = verify_infra(D, a, t)
    rec = result_record(D, seed, regulator=est.regulator_.R, dlog=t, verified=ok,
                        relations_used=len(est.relations_))
    _emit(args, rec, f"t = {float(t):.12f}\nR = {float(est.regulator_.R):.12f}\nverified = {ok}")
    return EXIT_OK if ok else EXIT_UNVERIFIED


def _anchors(args):
    imag, real = secest.literal_anchors(args.anchor_mips) if args.literal else secest.calibrated_anchors()
    if args.anchor_bits is not None or args.anchor_seconds is not None:
        if args.anchor_bits is None or args.anchor_seconds is None:
            raise UsageError("--anchor-bits and --anchor-seconds go together")
        a = secest.anchor_from_seconds(args.anchor_bits, args.anchor_seconds, args.anchor_mips)
        imag = real = a
    return imag, real


def _cmd_estimate(args, seed):
    imag, real = _anchors(args)
    bits = secest.RSA_BITS if args.target_rsa is None else (args.target_rsa,)
    if args.target_rsa is not None and args.target_rsa < 2:
        raise UsageError("--target-rsa must be at least 2")
    rows = secest.security_table((imag, real), bits)
    rec = {
        "mode": "literal-units" if args.literal else "paper-calibrated",
        "anchors": {
            "imaginary": {"bits": imag.bits, "mips_years": imag.time},
            "real": {"bits": real.bits, "mips_years": real.time},
        },
        "rows": [
            {"rsa": r.rsa_bits, "imaginary": r.bits_imaginary, "real": r.bits_real, "mips_years": r.t2_mips_years}
            for r in rows
        ],
    }
    _emit(args, rec, secest.format_table(rows))
    return EXIT_OK


def _parse_range(text):
    try:
        lo, hi = (int(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"--bits-range expects LO:HI, got {text!r}") from None
    if not 8 <= lo <= hi:
        raise UsageError("--bits-range needs 8 <= LO <= HI")
    return lo, hi


def _cmd_bench(args, seed):
    lo, hi = _parse_range(args.bits_range)
    rows = []
    for bits in range(lo, hi + 1, max(1, args.step)):
        D = gen_prime_discriminant(bits, args.sign, seed)
        est = _estimator(args, seed, False)
        row = {"bits": bits, "delta": str(int(D))}
        t = time.perf_counter()
        try:
            est.fit(D)
        except Timeout:
            row["status"] = "timeout"
            rows.append(row)
            continue
        tm = est.timings_
        row.update(
            status="ok",
            fb_size=len(est.factor_base_),
            relations=len(est.relations_),
            sieving=round(tm["sieving"], 3),
            elimination=round(tm["elimination"], 3),
            linear_algebra=round(tm["linear_algebra"], 3),
            total=round(time.perf_counter() - t, 3),
        )
        rows.append(row)
    head = f"{'bits':>5} {'FB':>5} {'rels':>6} {'sieve':>8} {'elim':>8} {'linalg':>8} {'total':>8}"
    lines = [head]
    for r in rows:
        if r["status"] != "ok":
            lines.append(f"{r['bits']:>5} {'timeout':>5}")
            continue
        lines.append(
            f"{r['bits']:>5} {r['fb_size']:>5} {r['relations']:>6} {r['sieving']:>8.2f}"
            f" {r['elimination']:>8.2f} {r['linear_algebra']:>8.2f} {r['total']:>8.2f}"
        )
    _emit(args, {"seed": seed, "rows": rows}, "\n".join(lines))
    return EXIT_OK


_COMMANDS = {
    "gen-disc": _cmd_gen_disc,
    "classgroup": _cmd_classgroup,
    "regulator": _cmd_regulator,
    "dlog": _cmd_dlog,
    "infra-dlog": _cmd_infra,
    "estimate": _cmd_estimate,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        seed = args.seed if getattr(args, "seed", None) is not None else _seed_default()
        return _COMMANDS[args.cmd](args, seed)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except Timeout as exc:
        print(f"qfdlog: timeout: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT
    except (Unverified, LikelyNonPrincipal) as exc:
        print(f"qfdlog: verification failed: {exc}", file=sys.stderr)
        return EXIT_UNVERIFIED
    except (ValueError, TypeError) as exc:
        print(f"qfdlog: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QFDlogError as exc:
        print(f"qfdlog: {exc}", file=sys.stderr)
        return EXIT_UNVERIFIED


if __name__ == "__main__":
    sys.exit(main())
