"""The p-local Serre spectral sequence of BU_n -> BPU_n -> K(Z, 3) in low degrees.

Only the four base rows s in {0, 3, 2p+2, 2p+5} carry anything below total
degree 2p+5.  The classes ``x1``, ``y`` (= y_{p,0}, the mod-p Bockstein of
P^1 applied to x1 reduced mod p) and ``x1*y`` are kept as opaque generator
names: all that is used about them is their degree, their additive order and
that every differential vanishes on them.

Differentials are computed in two ways.  ``d3`` on the Chern side is the
divergence derivation.  The longer differential ``d_(2p-1)`` is obtained by
transferring to the maximal torus, rewriting in ``v'_i = v_i - v_n``, and
reading off the coefficient of ``v_n^(p-1)``: every other power of ``v_n``
times ``x1`` is a d3-boundary there, and the ``v'_i`` are permanent cycles.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .exceptions import InvariantViolation
from .plocal import binom_mod_p, require_odd_prime, residue_mod
from .polyring import (
    Alphabet,
    GradedPolynomial,
    Monomial,
    chern_basis,
    chern_to_shifted_linear,
    chern_to_torus,
    coeff_of_vn_power,
    divergence_chern,
    divergence_torus,
    shift_expand,
)

log = logging.getLogger(__name__)

ONE, X1, Y, X1Y = "1", "x1", "y_p0", "x1*y_p0"
GENERATORS = (ONE, X1, Y, X1Y)

FREE, ZP, ZERO = "free", "Z/p", "0"


@dataclass(frozen=True)
class KZ3Entry:
    degree: int
    group: str
    generator: str | None


def kz3_table(p: int) -> list[KZ3Entry]:
    """p-local cohomology of K(Z, 3) in degrees 0 .. 2p+5.

    This is input data (it is not derived here): free on 1 and x1 in
    degrees 0 and 3, Z/p on y and x1*y in degrees 2p+2 and 2p+5, zero
    elsewhere in the range.
    """
    require_odd_prime(p)
    named = {0: (FREE, ONE), 3: (FREE, X1), 2 * p + 2: (ZP, Y), 2 * p + 5: (ZP, X1Y)}
    return [KZ3Entry(s, *named.get(s, (ZERO, None))) for s in range(2 * p + 6)]


def generator_degree(generator: str, p: int) -> int:
    return {ONE: 0, X1: 3, Y: 2 * p + 2, X1Y: 2 * p + 5}[generator]


def row_generator(s: int, p: int) -> str | None:
    """Generator of H^s(K(Z,3))_(p), or None if that group vanishes (s <= 2p+5)."""
    if not 0 <= s <= 2 * p + 5:
        raise ValueError(f"row s={s} is outside the modelled range 0..{2 * p + 5}")
    return kz3_table(p)[s].generator


@dataclass(frozen=True)
class PageEntry:
    s: int
    t: int
    generator: str | None
    basis: tuple[Monomial, ...]
    coefficients: str

    @property
    def rank(self) -> int:
        return len(self.basis)

    def is_zero(self) -> bool:
        return not self.basis


def page_entry(p: int, n: int, s: int, t: int) -> PageEntry:
    """``E_2^{s,t} = H^s(K(Z,3))_(p) (x) H^t(BU_n)_(p)``, with its Chern basis in descending order."""
    gen = row_generator(s, p)
    if gen is None or t < 0 or t % 2:
        return PageEntry(s, t, gen, (), ZERO)
    coeffs = ZP if gen in (Y, X1Y) else FREE
    return PageEntry(s, t, gen, tuple(chern_basis(n, t)), coeffs)


def chain_complex_entries(p: int, n: int) -> tuple[PageEntry, PageEntry, PageEntry, PageEntry]:
    """The four E_2 entries M0 = E^{0,2p+2}, M1 = E^{3,2p}, M2 = E^{2p+2,2}, M3 = E^{2p+5,0}."""
    require_odd_prime(p)
    return (
        page_entry(p, n, 0, 2 * p + 2),
        page_entry(p, n, 3, 2 * p),
        page_entry(p, n, 2 * p + 2, 2),
        page_entry(p, n, 2 * p + 5, 0),
    )


# --------------------------------------------------------------------------
# the path fibration K(Z,2) -> * -> K(Z,3)


@dataclass(frozen=True)
class KClass:
    """``v^k * generator`` in the spectral sequence of the path fibration."""

    v_power: int
    generator: str = ONE


@dataclass(frozen=True)
class KDifferential:
    """Verdict on a class: the first nonzero differential and its value.

    ``page`` is None for a class supporting no nonzero differential; then
    ``preimage`` records a d3-preimage when the class is a unit multiple
    of a d3-boundary.
    """

    page: int | None
    coefficient: Fraction = Fraction(0)
    v_power: int = 0
    generator: str | None = None
    preimage: tuple[Fraction, int] | None = None


def _p_split(m: int, p: int) -> tuple[int, int]:
    e = 0
    while m % p == 0:
        m //= p
        e += 1
    return m, e


def kd_rule(cls: KClass, p: int) -> KDifferential:
    """Differentials in the path-fibration spectral sequence.

    ``d3(v) = x1`` and the Leibniz rule give ``d3(v^k) = k v^(k-1) x1``;
    ``d_(2p-1)(x1 v^(l p^e - 1)) = v^(l p^e - p) y`` for ``e > 0``, ``p`` not
    dividing ``l``; x1 and y are permanent cycles.
    """
    require_odd_prime(p)
    k, gen = cls.v_power, cls.generator
    if k < 0 or gen not in GENERATORS:
        raise ValueError(f"{cls} is not a class of the modelled grid")
    if gen == X1Y and k:
        raise ValueError(f"{cls} lies beyond the modelled range")
    if gen in (ONE, Y):
        if k == 0:
            return KDifferential(None)
        target = X1 if gen == ONE else X1Y
        return KDifferential(3, Fraction(k), k - 1, target)
    if gen == X1Y:
        return KDifferential(None)
    # gen == x1: d3 vanishes since x1^2 = 0 p-locally
    l, e = _p_split(k + 1, p)
    if e == 0:
        return KDifferential(None, preimage=(Fraction(1, k + 1), k + 1))
    return KDifferential(2 * p - 1, Fraction(1), k - p + 1, Y)


@dataclass(frozen=True)
class TorusWitness:
    """How ``v_n^k x1`` dies in the torus spectral sequence."""

    k: int
    kind: str  # "boundary" or "transgression"
    preimage: GradedPolynomial | None = None
    target: str | None = None


def td3_membership_witness(k: int, p: int, n: int) -> TorusWitness:
    """For ``0 <= k <= p``: an explicit d3-preimage of ``v_n^k x1``, or its transgression.

    The d3-preimage is checked against the torus divergence before it is
    returned.
    """
    require_odd_prime(p)
    if not 0 <= k <= p:
        raise ValueError(f"k={k} outside [0, {p}]")
    verdict = kd_rule(KClass(k, X1), p)
    torus = Alphabet.torus(n)
    if verdict.page is None:
        coeff, power = verdict.preimage
        pre = GradedPolynomial.variable(torus, n - 1, power).scale(coeff)
        if divergence_torus(pre) != GradedPolynomial.variable(torus, n - 1, k):
            raise InvariantViolation(f"d3({pre}) is not v{n}^{k}")
        return TorusWitness(k, "boundary", preimage=pre)
    if verdict.page != 2 * p - 1 or verdict.v_power != 0:
        raise InvariantViolation(f"unexpected verdict {verdict} for v{n}^{k} x1")
    return TorusWitness(k, "transgression", target=verdict.generator)


# --------------------------------------------------------------------------
# the maps of the four-term complex

ChernInput = Union[GradedPolynomial, Monomial]


def _as_chern(f: ChernInput, n: int) -> GradedPolynomial:
    if isinstance(f, GradedPolynomial):
        if f.alphabet != Alphabet.chern(n):
            raise ValueError(f"expected a polynomial over c1..c{n}, got {f.alphabet}")
        return f
    return GradedPolynomial.monomial(Alphabet.chern(n), f)


def _require_degree(f: GradedPolynomial, t: int, what: str):
    if not f.is_homogeneous():
        raise ValueError(f"{what} needs a homogeneous input, got {f}")
    d = f.degree()
    if d is not None and d != t:
        raise ValueError(f"{what} needs degree {t}, got degree {d}")


def delta0(f: ChernInput, p: int, n: int) -> GradedPolynomial:
    """``d3: E^{0,2p+2} -> E^{3,2p}``; returns the coefficient of x1."""
    require_odd_prime(p)
    f = _as_chern(f, n)
    _require_degree(f, 2 * p + 2, "delta0")
    return divergence_chern(f)


def _linear_form_residues(lin: GradedPolynomial, p: int, n: int) -> list[int]:
    """Coefficients ``a_1 .. a_(n-1)`` of a linear form in the v' variables, mod p."""
    coeffs = [0] * (n - 1)
    for mon, c in lin.items():
        if mon[-1] != 0 or sum(mon) != 1:
            raise InvariantViolation(f"v_n^(p-1) coefficient is not linear in v': {lin}")
        coeffs[mon.index(1)] = residue_mod(c, p)
    return coeffs


def _common_residue(coeffs_prime: list[int], p: int, what: str) -> int:
    """Rewrite ``sum a_i v'_i`` in v-coordinates and check it is a multiple of ``sigma_1``."""
    v_coeffs = list(coeffs_prime) + [(-sum(coeffs_prime)) % p]
    if len(set(v_coeffs)) > 1:
        raise InvariantViolation(f"{what}: image {v_coeffs} is not a multiple of v1+...+vn mod {p}")
    return v_coeffs[0]


DELTA1_METHODS = ("symmetric", "truncated", "full")


def delta1(c: ChernInput, p: int, n: int, method: str = "symmetric") -> int:
    """``d_(2p-1): E^{3,2p} -> E^{2p+2,2}`` on ``c*x1``; returns ``a`` with value ``a*c1*y``.

    ``method`` selects how the torus image is expanded: ``"symmetric"`` uses
    the closed form for the linear part and scales to large ``n``;
    ``"truncated"`` expands the torus image and drops ``v'``-degree above 1;
    ``"full"`` expands everything and is only an oracle for small ``n``.
    """
    require_odd_prime(p)
    if method not in DELTA1_METHODS:
        raise ValueError(f"method must be one of {DELTA1_METHODS}")
    f = _as_chern(c, n)
    _require_degree(f, 2 * p, "delta1")
    if n % p:
        log.info("p=%d does not divide n=%d: M2 vanishes, delta1 is zero", p, n)
        return 0
    if method == "symmetric":
        if not f:
            return 0
        _, b = chern_to_shifted_linear(f)
        coeffs = [residue_mod(b, p)] * (n - 1)
    else:
        shifted = shift_expand(chern_to_torus(f), 1 if method == "truncated" else None)
        coeffs = _linear_form_residues(coeff_of_vn_power(shifted, p - 1), p, n)
    return _common_residue(coeffs, p, f"delta1({f})")


def delta2(p: int, n: int) -> int:
    """``d3: E^{2p+2,2} -> E^{2p+5,0}``: ``c1*y -> n*x1*y``; returns ``n mod p``."""
    require_odd_prime(p)
    c1 = GradedPolynomial.variable(Alphabet.chern(n), 0)
    return residue_mod(divergence_chern(c1).coefficient(Alphabet.chern(n).one()), p)


# --------------------------------------------------------------------------
# survival of y in E^{2p+2,0}


@dataclass
class SurvivalReport:
    p: int
    n: int
    outgoing: list[dict] = field(default_factory=list)
    incoming: list[dict] = field(default_factory=list)
    survives: bool = False

    @property
    def group(self) -> str:
        return ZP if self.survives else ZERO


def _constant_term_residue(c: Monomial, p: int, n: int) -> tuple[int, int]:
    """Two routes to the v_n^(p-1) coefficient of the torus image of a weight p-1 monomial."""
    a, _ = chern_to_shifted_linear(GradedPolynomial.monomial(Alphabet.chern(n), c))
    lucas = 1
    for i, e in enumerate(c):
        lucas = lucas * pow(binom_mod_p(n, i + 1, p), e, p) % p
    return residue_mod(a, p), lucas


def ypo_survival(p: int, n: int) -> SurvivalReport:
    """Decide whether ``y`` in ``E_2^{2p+2,0}`` survives to ``E_infinity``."""
    require_odd_prime(p)
    report = SurvivalReport(p, n)
    s0 = 2 * p + 2
    for r in range(2, s0 + 4):
        report.outgoing.append({"r": r, "target": [s0 + r, 1 - r], "reason": "negative fibre degree"})
    killed = False
    for r in range(2, s0 + 1):
        s, t = s0 - r, r - 1
        entry = page_entry(p, n, s, t)
        item = {"r": r, "source": [s, t]}
        if entry.is_zero():
            item["reason"] = "source vanishes on E_2"
        elif s == 3 and r == 2 * p - 1:
            values = []
            for mon in entry.basis:
                torus, lucas = _constant_term_residue(mon, p, n)
                if torus != lucas:
                    raise InvariantViolation(f"constant term of {mon}: torus {torus} vs binomial {lucas}")
                values.append({"monomial": Alphabet.chern(n).render(mon), "residue": torus})
            item["reason"] = "torus transfer"
            item["values"] = values
            if any(v["residue"] for v in values):
                killed = True
        else:
            raise InvariantViolation(f"unexpected nonzero source {entry} for d{r}")
        report.incoming.append(item)
    report.survives = not killed
    return report


def ypo_constant_term_full(c: Monomial, p: int, n: int) -> int:
    """Brute-force v_n^(p-1) coefficient for ``c`` of weight p-1 (small n only)."""
    f = GradedPolynomial.monomial(Alphabet.chern(n), c)
    coeff = coeff_of_vn_power(shift_expand(chern_to_torus(f)), p - 1)
    return residue_mod(coeff.coefficient(Alphabet.shifted(n).one()), p)


def binomial_value(c: Monomial, n: int) -> int:
    """Evaluate a Chern monomial at ``c_j = C(n, j)``."""
    out = 1
    for i, e in enumerate(c):
        out *= math.comb(n, i + 1) ** e
    return out
