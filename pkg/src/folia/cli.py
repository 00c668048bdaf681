"""Command-line front end.

Commands: ``random``, ``verify``, ``certify``, ``scan`` and ``basis-dim``.
Every command writes sorted, indented JSON (JSON lines for ``scan``) and
never records wall-clock data, so identical flags give identical bytes.

Exit codes:
    0  success / all checks hold
    1  checks fail, or no certificate (theorem-silent degree vector or rank gap)
    2  precondition or sampling error
    3  malformed input
    4  internal consistency failure or disagreement between primes
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import (
    DegenerateInputError,
    FoliaError,
    InternalConsistencyError,
    PreconditionError,
    SamplingError,
    UsageError,
)
from .exactla import DEFAULT_PRIME, GF, QQ, field_from_json
from .logfol import (
    LogParams,
    balanced_check,
    construct_log_form,
    descent_check,
    genericity_check,
    integrability_check,
    logdiff_identity_check,
    pluecker_check,
    random_params,
)
from .tangent import affine_dimension, bott_dimension, certify_stability, scan, task_key, twisted_form_basis

log = logging.getLogger("folia")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PRECONDITION = 2
EXIT_MALFORMED = 3
EXIT_INTERNAL = 4


def default_prime() -> int:
    raw = os.environ.get("FOLIA_DEFAULT_PRIME")
    if not raw:
        return DEFAULT_PRIME
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"FOLIA_DEFAULT_PRIME={raw!r} is not an integer")


def parse_field(text: str):
    if text.upper() in ("Q", "QQ"):
        return QQ
    try:
        return GF(int(text))
    except ValueError:
        raise UsageError(f"cannot parse field {text!r}; use a prime or Q")


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}")


def dump(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def provenance(args: argparse.Namespace, **extra) -> dict:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "verbose", "command")}
    return {"version": __version__, "command": args.command, "flags": flags, **extra}


def load_params_json(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        obj = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read parameters from {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise UsageError("parameter file must hold a JSON object")
    return obj


def resolve_field(flag, obj: dict):
    """Flag beats file beats the default prime."""
    if flag is not None:
        return parse_field(flag)
    if "field" in obj:
        return field_from_json(obj["field"])
    return GF(default_prime())


# ---------------------------------------------------------------------------
# commands


def cmd_random(args) -> int:
    field = parse_field(args.field) if args.field else GF(args.prime or default_prime())
    degrees = parse_int_list(args.degrees)
    try:
        params = random_params(args.seed, args.n, args.q, degrees, field)
    except (SamplingError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    dump(params.to_json(), args.out)
    return EXIT_OK


def verify_params(params: LogParams) -> dict:
    omega = construct_log_form(params)
    out = {
        "descent": descent_check(omega),
        "pluecker": pluecker_check(omega, params.q),
        "integrability": integrability_check(omega, params.q),
        "logdiff_identity": logdiff_identity_check(params, omega),
        "genericity": genericity_check(params.lam(), params.degrees) if params.q == 2 else None,
        "balanced_k2": balanced_check(params.degrees, 2) if params.m > 2 else False,
    }
    return out


def cmd_verify(args) -> int:
    try:
        obj = load_params_json(args.params)
        field = resolve_field(args.field, obj)
        if args.field is not None and "field" in obj:
            params = LogParams.from_json(obj, validate=False).with_field(field)
        else:
            params = LogParams.from_json(obj, field=field, validate=False)
    except UsageError as exc:
        print(f"error: malformed parameters: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    structural = [p for p in params.problems() if "orthogonal" not in p]
    if structural:
        print(f"error: malformed parameters: {'; '.join(structural)}", file=sys.stderr)
        return EXIT_MALFORMED
    try:
        checks = verify_params(params)
    except DegenerateInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    checks["provenance"] = provenance(args, field=params.field.to_json(), seed=params.seed)
    dump(checks, args.out)
    ok = all(checks[k] for k in ("descent", "pluecker", "integrability", "logdiff_identity"))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_certify(args) -> int:
    try:
        obj = load_params_json(args.params)
        if args.primes:
            fields = [parse_field(t) for t in args.primes.split(",")]
        else:
            fields = [resolve_field(args.field, obj)]
        base = LogParams.from_json(obj)
    except UsageError as exc:
        print(f"error: malformed parameters: {exc}", file=sys.stderr)
        return EXIT_MALFORMED

    reports = []
    for field in fields:
        params = base if field == base.field else base.with_field(field)
        prov = provenance(args, field=field.to_json(), seed=params.seed)
        try:
            rep = certify_stability(params, n_directions=args.directions, provenance=prov)
        except PreconditionError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PRECONDITION
        except InternalConsistencyError as exc:
            print(f"error: {exc}", file=sys.stderr)
            dump({"error": str(exc), "diagnostics": exc.diagnostics}, args.out)
            return EXIT_INTERNAL
        reports.append(rep)

    agree = len({(r.ker_dim, r.drho_rank) for r in reports}) == 1
    if len(reports) == 1:
        dump(reports[0].to_json(), args.out)
    else:
        dump({"reports": [r.to_json() for r in reports], "primes_agree": agree}, args.out)
    if not agree:
        print("error: ranks differ between primes", file=sys.stderr)
        return EXIT_INTERNAL
    if any(r.theorem_silent for r in reports):
        print("note: degree vector is not 2-balanced; no stability claim applies", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK if all(r.stable for r in reports) else EXIT_FAIL


def read_scan_config(path: str) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
        instances = [(int(e["n"]), [int(x) for x in e["degrees"]]) for e in cfg["instances"]]
        seeds = [int(s) for s in cfg.get("seeds", [1])]
        primes = [str(p) for p in cfg.get("primes", [default_prime()])]
        directions = int(cfg.get("directions", 10))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad scan config {path}: {exc}") from exc
    return {"instances": instances, "seeds": seeds, "primes": primes, "directions": directions}


def _record_key(rec: dict) -> tuple:
    field = rec.get("field")
    prime = field.get("Fp") if isinstance(field, dict) else "Q"
    return task_key(rec["n"], rec["degrees"], rec.get("seed"), prime)


def cmd_scan(args) -> int:
    try:
        cfg = read_scan_config(args.config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    out = Path(args.output)
    done = set()
    if out.exists():
        for line in out.read_text().splitlines():
            if line.strip():
                try:
                    done.add(_record_key(json.loads(line)))
                except (json.JSONDecodeError, KeyError):
                    log.warning("ignoring unreadable line in %s", out)
    primes = ["Q" if p.upper() in ("Q", "QQ") else p for p in cfg["primes"]]
    written = 0
    failed = 0
    with out.open("a") as fh:
        for rec in scan(cfg["instances"], cfg["seeds"], primes, skip=done, jobs=args.jobs,
                        n_directions=cfg["directions"]):
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
            fh.flush()
            written += 1
            failed += "error" in rec
    log.info("scan wrote %d records (%d errors), skipped %d", written, failed, len(done))
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_basis_dim(args) -> int:
    field = parse_field(args.field) if args.field else GF(args.prime or default_prime())
    try:
        basis = twisted_form_basis(args.n, args.q, args.d, field, cross_check=False)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except InternalConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    kernel = basis.radial_kernel_dimension()
    bott = bott_dimension(args.n, args.q, args.d)
    res = {
        "n": args.n,
        "q": args.q,
        "d": args.d,
        "dimension": len(basis),
        "bott": bott,
        "radial_kernel": kernel,
        "affine": affine_dimension(args.n, args.q, args.d),
        "agree": len(basis) == bott == kernel,
        "field": field.to_json(),
        "version": __version__,
    }
    dump(res, args.out)
    return EXIT_OK if res["agree"] else EXIT_INTERNAL


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="folia", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("random", help="sample a generic parameter point")
    p.add_argument("--n", type=int, required=True, help="projective dimension")
    p.add_argument("--q", type=int, default=2, help="codimension")
    p.add_argument("--degrees", required=True, help="comma-separated degree vector")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prime", type=int, default=None)
    p.add_argument("--field", default=None, help="Q or a prime; overrides --prime")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("verify", help="check the moduli equations for a parameter file")
    p.add_argument("params", help="LogParams JSON file, or - for stdin")
    p.add_argument("--field", default=None, help="Q or a prime; overrides the file")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("certify", help="run the stability certificate")
    p.add_argument("params", help="LogParams JSON file, or - for stdin")
    p.add_argument("--field", default=None, help="Q or a prime; overrides the file")
    p.add_argument("--primes", default=None, help="comma-separated primes (or Q) to run and compare")
    p.add_argument("--directions", type=int, default=10, help="random dual-number directions")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("scan", help="certify a grid of instances into a JSONL file")
    p.add_argument("config", help="JSON with instances, seeds, primes")
    p.add_argument("output", help="JSONL file; existing keys are skipped")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_scan, out=None)

    p = sub.add_parser("basis-dim", help="dimension of the descended-form space")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--prime", type=int, default=None)
    p.add_argument("--field", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_basis_dim)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except FoliaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
