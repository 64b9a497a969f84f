"""Run every intermediate identity of the computation on one (p, n) pair."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Callable

from .exceptions import InvariantViolation
from .homology import (
    ExactnessReport,
    build_complex,
    complex_exactness,
    d3_row_cokernel,
    group_table,
    nakayama_check,
    triangularity_check,
)
from .plocal import binom_mod_p, require_odd_prime, split_prime_power
from .polyring import (
    Alphabet,
    GradedPolynomial,
    chern_basis,
    chern_to_torus,
    divergence_chern,
    divergence_torus,
    multilinear_sigma1_sum,
)
from .specseq import delta1, kz3_table, td3_membership_witness, ypo_survival

ORACLE_N_MAX = 12
IDENTITY_N_MAX = 10
SIGMA1_N_MAX = 12


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def closed_form_torsion(p: int, n: int) -> dict[int, tuple[int, ...]]:
    """Closed-form p-torsion of H^s(BPU_n) for s < 2p+5, used only as a reference."""
    r, _ = split_prime_power(n, p)
    table = {s: () for s in range(2 * p + 5)}
    if r:
        table[3] = (p**r,)
        table[2 * p + 2] = (p,)
    return table


def _run(name: str, fn: Callable[[], str | None]) -> Check:
    try:
        detail = fn() or ""
    except (InvariantViolation, AssertionError, ValueError, ArithmeticError) as exc:
        return Check(name, False, f"{type(exc).__name__}: {exc}")
    return Check(name, True, detail)


def _expect(cond: bool, message: str):
    if not cond:
        raise AssertionError(message)


def check_kz3(p: int) -> str:
    nonzero = [e.degree for e in kz3_table(p) if e.group != "0"]
    _expect(nonzero == [0, 3, 2 * p + 2, 2 * p + 5], f"nonzero degrees {nonzero}")
    return f"nonzero in degrees {nonzero}"


def check_lucas(p: int, upto: int = 64) -> str:
    for N in range(upto + 1):
        for k in range(N + 1):
            _expect(binom_mod_p(N, k, p) == math.comb(N, k) % p, f"C({N},{k}) mod {p}")
    return f"all C(N,k) with N <= {upto}"


def check_intertwining(p: int, n: int) -> str:
    chern = Alphabet.chern(n)
    count = 0
    for t in range(0, 2 * p + 5, 2):
        for mon in chern_basis(n, t):
            f = GradedPolynomial.monomial(chern, mon)
            lhs = chern_to_torus(divergence_chern(f))
            rhs = divergence_torus(chern_to_torus(f))
            _expect(lhs == rhs, f"divergence does not commute with the torus transfer on {chern.render(mon)}")
            count += 1
    return f"{count} monomials"


def check_leibniz(p: int, n: int) -> str:
    chern = Alphabet.chern(n)
    monos = [GradedPolynomial.monomial(chern, m) for t in range(2, p + 3, 2) for m in chern_basis(n, t)]
    for f, g in combinations_with_replacement(monos, 2):
        lhs = divergence_chern(f * g)
        rhs = divergence_chern(f) * g + f * divergence_chern(g)
        _expect(lhs == rhs, f"Leibniz fails on {f} * {g}")
    return f"{len(monos)} monomials pairwise"


def check_delta1(p: int, n: int) -> str:
    # reading off the v_n^(p-1) coefficient is only valid if the other powers die
    for k in range(p + 1):
        w = td3_membership_witness(k, p, n)
        _expect(w.kind == ("transgression" if k == p - 1 else "boundary"), f"v{n}^{k} x1 handled as {w.kind}")
    cp = Alphabet.chern(n).unit_vector(p - 1)
    value = delta1(cp, p, n)
    expected = binom_mod_p(n - 1, p - 1, p)
    _expect(expected == math.comb(n - 1, p - 1) % p, "Lucas disagrees with the exact binomial")
    _expect(value == expected, f"delta1(c_p) = {value}, expected C(n-1,p-1) mod p = {expected}")
    _expect(value != 0, "delta1(c_p) vanishes")
    detail = f"delta1(c_p) = {value}"
    if n <= ORACLE_N_MAX:
        for mon in chern_basis(n, 2 * p):
            vals = {m: delta1(mon, p, n, method=m) for m in ("symmetric", "truncated", "full")}
            _expect(len(set(vals.values())) == 1, f"delta1 routes disagree on {mon}: {vals}")
        detail += "; all routes agree on M1"
    return detail


def check_chain_law(p: int, n: int) -> str:
    cx = build_complex(p, n)
    d10 = cx.d1 @ cx.d0
    d21 = cx.d2 @ cx.d1
    _expect(d10.mod(p).is_zero(), "delta1 . delta0 != 0 mod p")
    _expect(d21.mod(p).is_zero(), "delta2 . delta1 != 0 mod p")
    return "delta1.delta0 = 0 and delta2.delta1 = 0"


def check_triangularity(p: int, n: int) -> str:
    rep = triangularity_check(p, n)
    _expect(rep.ok, "; ".join(rep.violations))
    return f"diagonal {rep.diagonal}"


def check_nakayama(p: int, n: int) -> str:
    rep = nakayama_check(p, n)
    _expect(rep.ok, str(rep))
    via = "delta0(V) = W" if rep.image_equals_w else "delta0(V) misses p*c_p*x1 but Im delta0 = W"
    return f"{via} = Ker delta1"


def check_exactness(rep: ExactnessReport, where: str) -> str:
    ok = rep.exact_at_m1 if where == "M1" else rep.exact_at_m2
    h = rep.homology_m1 if where == "M1" else rep.homology_m2
    _expect(ok, f"homology at {where} is {h}")
    return f"homology at {where} is 0"


def check_d3_rows(p: int, n: int) -> str:
    r, _ = split_prime_power(n, p)
    first = d3_row_cokernel(p, n, 2).torsion
    _expect(first == ((p**r,) if r else ()), f"t=2 cokernel torsion {first}")
    for t in range(4, 2 * p, 2):
        tor = d3_row_cokernel(p, n, t).torsion
        _expect(tor == (), f"t={t} cokernel has p-torsion {tor}")
    # when p does not divide n, this Z/p transgresses onto y_p0
    edge = d3_row_cokernel(p, n, 2 * p).torsion
    _expect(edge == (() if n % p == 0 else (p,)), f"t={2 * p} cokernel torsion {edge}")
    return f"t=2 torsion {first}; torsion-free for 4 <= t < {2 * p}; t={2 * p} torsion {edge}"


def check_survival(p: int, n: int) -> str:
    rep = ypo_survival(p, n)
    want = n % p == 0
    _expect(rep.survives == want, f"y_p0 survives={rep.survives}, expected {want}")
    return f"E_inf^(2p+2,0) = {rep.group}"


def check_table(p: int, n: int) -> str:
    got = {row.s: row.torsion.torsion for row in group_table(p, n)}
    want = closed_form_torsion(p, n)
    _expect(got == want, f"torsion table {got} != {want}")
    return "torsion matches the closed form"


def verify_pair(p: int, n: int) -> list[Check]:
    require_odd_prime(p)
    checks = [
        _run("kz3_table", lambda: check_kz3(p)),
        _run("lucas_binomials", lambda: check_lucas(p)),
    ]
    if n % p:
        checks += [
            _run("d3_rows_torsion_free", lambda: check_d3_rows(p, n)),
            _run("y_killed", lambda: check_survival(p, n)),
            _run("group_table", lambda: check_table(p, n)),
        ]
        return checks
    if p <= n <= SIGMA1_N_MAX:
        checks.append(_run("sigma1_multiplier", lambda: f"lambda = {multilinear_sigma1_sum(n, p)}"))
    if n <= IDENTITY_N_MAX:
        checks.append(_run("divergence_intertwining", lambda: check_intertwining(p, n)))
    checks += [
        _run("leibniz", lambda: check_leibniz(p, n)),
        _run("delta1_value", lambda: check_delta1(p, n)),
        _run("chain_law", lambda: check_chain_law(p, n)),
        _run("triangularity", lambda: check_triangularity(p, n)),
        _run("nakayama", lambda: check_nakayama(p, n)),
    ]
    try:
        rep = complex_exactness(build_complex(p, n))
    except InvariantViolation as exc:
        checks.append(Check("exactness", False, f"InvariantViolation: {exc}"))
    else:
        checks += [
            _run("exact_at_M1", lambda: check_exactness(rep, "M1")),
            _run("exact_at_M2", lambda: check_exactness(rep, "M2")),
        ]
    checks += [
        _run("d3_rows_torsion_free", lambda: check_d3_rows(p, n)),
        _run("y_survives", lambda: check_survival(p, n)),
        _run("group_table", lambda: check_table(p, n)),
    ]
    return checks
