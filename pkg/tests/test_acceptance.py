"""Acceptance criteria 1-8.

Each test records a verdict; ``conftest.py`` prints one PASS/FAIL line per
criterion at the end of the run.
"""
from __future__ import annotations

import math
import random
from collections import defaultdict

import pytest

from bpucoh.homology import (
    IntMatrix,
    build_complex,
    complex_exactness,
    d3_row_cokernel,
    elementary_divisors,
    exactness_report,
    group_table,
    triangularity_check,
)
from bpucoh.plocal import binom_mod_p, split_prime_power
from bpucoh.polyring import Alphabet, multilinear_sigma1_sum
from bpucoh.specseq import delta1
from bpucoh.verify import check_chain_law, check_intertwining, check_leibniz
from oracles import exactness_oracle, invariant_factors

DIVIDING = [(3, 3), (3, 6), (3, 9), (3, 12), (5, 5), (5, 10), (5, 25), (7, 7), (7, 14)]
NON_DIVIDING = [(3, 4), (5, 6), (7, 10)]
# pairs small enough for the brute-force minor oracle on every mutation
ORACLE_PAIRS = [(3, 3), (3, 6), (3, 9), (3, 12), (5, 5)]

VERDICTS: dict[int, list[tuple[bool, str]]] = defaultdict(list)


def record(criterion: int, ok: bool, detail: str):
    VERDICTS[criterion].append((ok, detail))


def summary_lines() -> list[str]:
    lines = []
    for k in range(1, 9):
        parts = VERDICTS.get(k)
        if not parts:
            lines.append(f"criterion {k}: NOT RUN")
            continue
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        lines.append(f"criterion {k}: {status} - " + "; ".join(d for _, d in parts))
    return lines


def expected_torsion(p, n):
    r, _ = split_prime_power(n, p)
    want = {s: () for s in range(2 * p + 5)}
    if r:
        want[3] = (p ** r,)
        want[2 * p + 2] = (p,)
    return want


def torsion_map(p, n):
    return {row.s: row.torsion.torsion for row in group_table(p, n)}


def test_criterion_1_group_table():
    bad = [(p, n) for p, n in DIVIDING if torsion_map(p, n) != expected_torsion(p, n)]
    record(1, not bad, f"{len(DIVIDING) - len(bad)}/{len(DIVIDING)} p|n tables match Z/p^r, Z/p, 0" +
           (f"; mismatches {bad}" if bad else ""))
    assert not bad


def test_criterion_2_degenerate_pairs():
    bad = [(p, n) for p, n in NON_DIVIDING if any(torsion_map(p, n).values())]
    record(2, not bad, f"{len(NON_DIVIDING) - len(bad)}/{len(NON_DIVIDING)} p∤n tables torsion-free")
    assert not bad


def _mutations(cx):
    for name in ("d0", "d1", "d2"):
        M = getattr(cx, name)
        for i in range(M.rows):
            for j in range(M.cols):
                yield name, i, j, cx.replace(**{name: M.mutated(i, j)})


def test_criterion_3_exact_and_detector_sound():
    not_exact = [pq for pq in DIVIDING if not (lambda r: r.exact_at_m1 and r.exact_at_m2)(exactness_report(*pq))]
    disagreements, checked = [], 0
    for p, n in ORACLE_PAIRS:
        for name, i, j, mcx in _mutations(build_complex(p, n)):
            rep = complex_exactness(mcx)
            want = exactness_oracle(mcx.d0.to_lists(), mcx.d1.to_lists(), mcx.d2.to_lists(), p)
            checked += 1
            if (rep.exact_at_m1, rep.exact_at_m2) != want:
                disagreements.append((p, n, name, i, j))
    no_break = []
    for p, n in DIVIDING:
        cx = build_complex(p, n)
        for name in ("d0", "d1", "d2"):
            broke = any(
                not (r.exact_at_m1 and r.exact_at_m2)
                for nm, i, j, mcx in _mutations(cx) if nm == name
                for r in [complex_exactness(mcx)]
            )
            if not broke:
                no_break.append((p, n, name))
    ok = not not_exact and not disagreements and not no_break
    record(3, ok, f"exact/exact on {len(DIVIDING) - len(not_exact)}/{len(DIVIDING)} pairs; "
                  f"detector agrees with minor-index oracle on {checked - len(disagreements)}/{checked} mutations; "
                  f"each of D0, D1, D2 has a breaking +1 mutation on every pair: {not no_break}")
    assert ok, (not_exact, disagreements, no_break)


@pytest.mark.xfail(strict=True, reason="false as stated: some +1 mutations leave the complex exact")
def test_criterion_3_every_single_mutation_breaks():
    survivors, total = [], 0
    for p, n in DIVIDING:
        for name, i, j, mcx in _mutations(build_complex(p, n)):
            total += 1
            r = complex_exactness(mcx)
            if r.exact_at_m1 and r.exact_at_m2:
                survivors.append((p, n, name, i, j))
    example = survivors[0] if survivors else None
    record(3, not survivors,
           f"literal reading: {len(survivors)}/{total} single-entry +1 mutations keep both verdicts exact "
           f"(first: p,n,matrix,row,col = {example}); e.g. D0[0][0] 12 -> 13 at p=n=3 leaves Im D0 equal to Ker D1")
    assert not survivors


def test_criterion_4_delta1_value():
    bad = []
    oracle_pairs = [(p, n) for p, n in DIVIDING if n <= 12]
    for p, n in DIVIDING:
        cp = Alphabet.chern(n).unit_vector(p - 1)
        got = delta1(cp, p, n)
        want = math.comb(n - 1, p - 1) % p
        if got != want or got == 0 or binom_mod_p(n - 1, p - 1, p) != want:
            bad.append((p, n, "value"))
        if (p, n) in oracle_pairs and delta1(cp, p, n, method="full") != got:
            bad.append((p, n, "oracle"))
    record(4, not bad, f"delta1(c_p) = C(n-1,p-1) mod p != 0 on {len(DIVIDING)} pairs; "
                       f"untruncated expansion agrees on {len(oracle_pairs)} pairs with n <= 12")
    assert not bad


def test_criterion_5_triangularity():
    pairs = [(p, n) for p, n in DIVIDING if n >= p + 1]
    bad = []
    for p, n in pairs:
        rep = triangularity_check(p, n)
        units = all(d % p for d in rep.diagonal)
        bottom = not any(rep.matrix_mod_p[-1])
        if not (rep.ok and units and bottom):
            bad.append((p, n, rep.violations[:3]))
    record(5, not bad, f"upper triangular, unit diagonal n-k, zero bottom row on {len(pairs) - len(bad)}/{len(pairs)} pairs")
    assert not bad


def test_criterion_6_row_cokernels():
    bad = []
    pairs = DIVIDING + NON_DIVIDING
    for p, n in pairs:
        r, _ = split_prime_power(n, p)
        if d3_row_cokernel(p, n, 2).torsion != ((p ** r,) if r else ()):
            bad.append((p, n, 2))
        for t in range(4, 2 * p - 1, 2):
            if d3_row_cokernel(p, n, t).torsion:
                bad.append((p, n, t))
    record(6, not bad, f"Z/p^r at t=2 and no p-torsion for 4 <= t <= 2p-2 on {len(pairs)} pairs")
    assert not bad


def test_criterion_7_identity_suite():
    failures = []
    count = 0
    for p in (3, 5, 7):
        for n in range(1, 11):
            try:
                check_intertwining(p, n)
                count += 1
            except AssertionError as exc:
                failures.append(("intertwining", p, n, str(exc)))
        for n in range(p, 9):
            if multilinear_sigma1_sum(n, p) != math.comb(n - 1, p - 1):
                failures.append(("multilinear", p, n))
    for p, n in DIVIDING:
        for check in (check_leibniz, check_chain_law):
            try:
                check(p, n)
            except AssertionError as exc:
                failures.append((check.__name__, p, n, str(exc)))
    record(7, not failures, f"intertwining on {count} (p, n) with n <= 10 up to degree 2p+4; "
                            f"multilinear identity for p <= n <= 8; Leibniz and delta.delta = 0 on {len(DIVIDING)} pairs")
    assert not failures


def test_criterion_8_smith_vs_minor_oracle():
    rng = random.Random(20261016)
    bad = []
    for k in range(200):
        rows, cols = rng.randint(1, 6), rng.randint(1, 6)
        M = [[rng.randint(-9, 9) for _ in range(cols)] for _ in range(rows)]
        if elementary_divisors(IntMatrix.from_rows(M)) != invariant_factors(M):
            bad.append(M)
    record(8, not bad, f"{200 - len(bad)}/200 random matrices match the minor-gcd oracle")
    assert not bad
