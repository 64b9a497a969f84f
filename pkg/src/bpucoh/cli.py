"""Command line front end: ``bpucoh {table,complex,verify,diff}``.

Exit codes: 0 on success, 1 when an internal invariant (or a verification
check) fails, 2 on invalid input.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

from . import __version__
from .exceptions import InvariantViolation
from .homology import build_complex, complex_exactness, elementary_divisors, group_table
from .plocal import binom_mod_p, require_odd_prime
from .polyring import Alphabet, GradedPolynomial, ParseError, parse_chern
from .specseq import delta0, delta1, delta2
from .verify import verify_pair

log = logging.getLogger("bpucoh")

CACHE_ENV = "BPUCOH_CACHE_DIR"
DEFAULT_MAX_N = 200
DEFAULT_MAX_P = 13


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    p: list[int]
    n: list[int]
    max_n: int = DEFAULT_MAX_N
    max_p: int = DEFAULT_MAX_P
    format: str = "text"
    cache_dir: str | None = None
    verbosity: int = 1
    extra: dict = field(default_factory=dict)

    def validate(self):
        if not self.p or not self.n:
            raise UsageError("both --p and --n are required")
        for p in self.p:
            try:
                require_odd_prime(p)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            if p > self.max_p:
                raise UsageError(f"p={p} exceeds the cap {self.max_p}")
        for n in self.n:
            if n < 1:
                raise UsageError(f"n must be a positive integer, got {n}")
            if n > self.max_n:
                raise UsageError(f"n={n} exceeds the cap {self.max_n} (raise it with --max-n)")
        return self

    def echo(self) -> dict:
        data = asdict(self)
        data.pop("cache_dir")
        data.pop("verbosity")
        return data


# --------------------------------------------------------------------------
# caching


def cache_path(cache_dir: str, key: dict) -> Path:
    digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:24]
    return Path(cache_dir) / f"{key['command']}-{digest}.json"


def cached(cache_dir: str | None, key: dict, compute: Callable[[], dict]) -> dict:
    """Return the payload stored under ``key``, computing and storing it on a miss."""
    key = {"version": __version__, **key}
    if not cache_dir:
        return compute()
    path = cache_path(cache_dir, key)
    if path.exists():
        log.debug("cache hit %s", path)
        return json.loads(path.read_text())
    payload = compute()
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    with os.fdopen(fd, "w") as fh:
        fh.write(canonical_json(payload))
    os.replace(tmp, path)
    return payload


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


# --------------------------------------------------------------------------
# payloads


def table_payload(p: int, n: int) -> dict:
    rows = []
    for row in group_table(p, n):
        rows.append({
            "s": row.s,
            "torsion": list(row.group.torsion),
            "free_rank": row.group.free_rank,
            "group": str(row.group),
            "note": row.note,
        })
    return {"kind": "table", "p": p, "n": n, "rows": rows}


def complex_payload(p: int, n: int) -> dict:
    cx = build_complex(p, n)
    rep = complex_exactness(cx)
    names = cx.rendered_bases()
    return {
        "kind": "complex",
        "p": p,
        "n": n,
        "degenerate": n % p != 0,
        "bases": {f"M{i}": names[i] for i in range(4)},
        "d0": cx.d0.to_lists(),
        "d1": cx.d1.to_lists(),
        "d2": cx.d2.to_lists(),
        "d0_elementary_divisors": elementary_divisors(cx.d0),
        "exactness": rep.to_json(),
    }


def verify_payload(p: int, n: int) -> dict:
    checks = verify_pair(p, n)
    return {
        "p": p,
        "n": n,
        "checks": [c.to_json() for c in checks],
        "passed": all(c.passed for c in checks),
    }


def diff_payload(op: str, expr: str | None, p: int, n: int) -> dict:
    chern = Alphabet.chern(n)
    if op == "d2":
        value = delta2(p, n)
        return {
            "kind": "diff", "op": op, "expr": "c1", "p": p, "n": n,
            "value": f"{value}*x1*y_p0" if value else "0",
            "provenance": f"d2(c1*y_p0) = n*x1*y_p0 = {value}*x1*y_p0 mod {p}",
        }
    if not expr:
        raise UsageError(f"--expr is required for --op {op}")
    try:
        f = parse_chern(expr, n)
    except ParseError as exc:
        raise UsageError(str(exc)) from None
    want = 2 * p + 2 if op == "d0" else 2 * p
    degs = f.degrees()
    if degs != {want}:
        raise UsageError(f"{op} needs a homogeneous expression of degree {want}, got degrees {sorted(degs)}")
    if op == "d0":
        image = delta0(f, p, n)
        value = f"({image})*x1" if image else "0"
        return {
            "kind": "diff", "op": op, "expr": str(f), "p": p, "n": n,
            "value": value,
            "provenance": f"d0({f}) = divergence with c_k -> (n-k+1) c_(k-1), times x1",
        }
    a = delta1(f, p, n)
    if n % p:
        prov = "p does not divide n: M2 = 0, so d1 vanishes"
    else:
        prov = f"d1(({f})*x1) = {a}*c1*y_p0 mod {p} via the torus transfer"
        if f == GradedPolynomial.monomial(chern, chern.unit_vector(p - 1)):
            prov += f"; equals C(n-1,p-1) = {binom_mod_p(n - 1, p - 1, p)} mod {p}"
    return {
        "kind": "diff", "op": op, "expr": str(f), "p": p, "n": n,
        "value": f"{a}*c1*y_p0" if a else "0",
        "provenance": prov,
    }


# --------------------------------------------------------------------------
# rendering


def render_text(command: str, payload: dict) -> str:
    lines = []
    if command == "table":
        lines.append(f"p-local cohomology of BPU_{payload['n']} at p={payload['p']}, degrees s < {2 * payload['p'] + 5}")
        lines.append(f"{'s':>3}  {'p-torsion':<10} {'free':>5}  note")
        for row in payload["rows"]:
            tor = " + ".join(f"Z/{t}" for t in row["torsion"]) or "0"
            lines.append(f"{row['s']:>3}  {tor:<10} {row['free_rank']:>5}  {row['note']}")
    elif command == "complex":
        if payload["degenerate"]:
            lines.append(f"p={payload['p']} does not divide n={payload['n']}: M2 and M3 vanish")
        for name, basis in payload["bases"].items():
            lines.append(f"{name}: [{', '.join(basis)}]")
        lines.append("D0 =")
        lines += ["  " + " ".join(f"{x:>4}" for x in row) for row in payload["d0"]]
        lines.append(f"D1 = {payload['d1']} (mod {payload['p']})")
        lines.append(f"D2 = {payload['d2']} (mod {payload['p']})")
        lines.append(f"elementary divisors of D0: {payload['d0_elementary_divisors']}")
        ex = payload["exactness"]
        lines.append(f"exact at M1: {ex['exact_at_M1']}   exact at M2: {ex['exact_at_M2']}")
    elif command == "verify":
        for pair in payload["pairs"]:
            lines.append(f"p={pair['p']} n={pair['n']}: {'PASS' if pair['passed'] else 'FAIL'}")
            for c in pair["checks"]:
                mark = "ok  " if c["passed"] else "FAIL"
                lines.append(f"  [{mark}] {c['name']}: {c['detail']}")
        s = payload["summary"]
        lines.append(f"{s['passed']} passed, {s['failed']} failed")
    elif command == "diff":
        lines.append(f"{payload['op']}({payload['expr']}) = {payload['value']}")
        lines.append(f"  {payload['provenance']}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# argument handling


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bpucoh", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bpucoh {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--cache-dir", default=None, help=f"cache directory (default: ${CACHE_ENV})")
    common.add_argument("--max-n", type=int, default=DEFAULT_MAX_N)
    common.add_argument("--quiet", action="store_true")

    for name in ("table", "complex"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--p", type=int, required=True)
        p.add_argument("--n", type=int, required=True)

    v = sub.add_parser("verify", parents=[common])
    v.add_argument("--p", type=_int_list, required=True, help="comma-separated primes")
    group = v.add_mutually_exclusive_group(required=True)
    group.add_argument("--n", type=_int_list, help="comma-separated values of n")
    group.add_argument("--n-multiples", type=int, help="use n = p, 2p, ..., kp for each p")

    d = sub.add_parser("diff", parents=[common])
    d.add_argument("--op", choices=("d0", "d1", "d2"), required=True)
    d.add_argument("--expr", default=None, help='Chern expression, e.g. "c1*c3" or "c1^2*c2"')
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--n", type=int, required=True)
    return parser


def make_config(args) -> RunConfig:
    cache_dir = args.cache_dir or os.environ.get(CACHE_ENV) or None
    if args.command == "verify":
        primes = args.p
        if args.n_multiples is not None:
            if args.n_multiples < 1:
                raise UsageError("--n-multiples must be positive")
            ns = sorted({p * k for p in primes for k in range(1, args.n_multiples + 1)})
        else:
            ns = args.n
    else:
        primes, ns = [args.p], [args.n]
    extra = {}
    if args.command == "diff":
        extra = {"op": args.op, "expr": args.expr}
    if args.command == "verify":
        extra = {"n_multiples": args.n_multiples}
    return RunConfig(
        command=args.command, p=primes, n=ns, max_n=args.max_n, format=args.format,
        cache_dir=cache_dir, verbosity=0 if args.quiet else 1, extra=extra,
    ).validate()


def run(cfg: RunConfig) -> tuple[dict, int]:
    """Compute the result payload for a validated config; returns (payload, exit code)."""
    p, n = cfg.p[0], cfg.n[0]
    if cfg.command == "table":
        return cached(cfg.cache_dir, {"command": "table", "p": p, "n": n}, lambda: table_payload(p, n)), 0
    if cfg.command == "complex":
        return cached(cfg.cache_dir, {"command": "complex", "p": p, "n": n}, lambda: complex_payload(p, n)), 0
    if cfg.command == "diff":
        op, expr = cfg.extra["op"], cfg.extra["expr"]
        key = {"command": "diff", "p": p, "n": n, "op": op, "expr": expr}
        return cached(cfg.cache_dir, key, lambda: diff_payload(op, expr, p, n)), 0
    pairs = []
    multiples = cfg.extra.get("n_multiples")
    for q in cfg.p:
        for m in cfg.n:
            if multiples is not None and m % q:
                continue
            key = {"command": "verify-pair", "p": q, "n": m}
            pairs.append(cached(cfg.cache_dir, key, lambda q=q, m=m: verify_payload(q, m)))
    total = sum(len(pr["checks"]) for pr in pairs)
    failed = sum(1 for pr in pairs for c in pr["checks"] if not c["passed"])
    payload = {
        "kind": "verify",
        "pairs": pairs,
        "summary": {"pairs": len(pairs), "checks": total, "passed": total - failed, "failed": failed},
    }
    return payload, 1 if failed else 0


def envelope(cfg: RunConfig, payload: dict, wall_time: float) -> dict:
    return {
        "tool": "bpucoh",
        "tool_version": __version__,
        "command": cfg.command,
        "config": cfg.echo(),
        "result": payload,
        "wall_time": wall_time,
    }


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(message)s")
    try:
        cfg = make_config(args)
        start = time.perf_counter()
        payload, code = run(cfg)
        elapsed = time.perf_counter() - start
    except UsageError as exc:
        print(f"bpucoh: error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"bpucoh: invariant violation: {exc}", file=sys.stderr)
        return 1
    if cfg.format == "json":
        print(json.dumps(envelope(cfg, payload, elapsed), indent=2, sort_keys=True))
    else:
        print(render_text(cfg.command, payload))
        if cfg.verbosity:
            print(f"({elapsed:.3f}s)", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
