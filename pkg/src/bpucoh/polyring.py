"""Graded polynomials in Chern classes and torus variables.

Three alphabets are used:

* ``Alphabet.chern(n)``: ``c1 .. cn`` with ``|c_i| = 2i``, the cohomology of BU_n;
* ``Alphabet.torus(n)``: ``v1 .. vn`` all of degree 2, the cohomology of BT^n;
* ``Alphabet.shifted(n)``: ``v'1 .. v'(n-1), vn`` where ``v'_i = v_i - v_n``.

Monomials are dense exponent tuples.  On Chern monomials, tuple comparison
is exactly the ordering in which ``a > b`` iff the first differing exponent
is larger in ``a``; every basis is kept in descending order for it.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from operator import add
from typing import Iterable, Iterator, Mapping, Union

Coefficient = Union[int, Fraction]
Monomial = tuple

MAX_VARIABLES = 256  # guards accidental blowup of dense exponent vectors
MAX_DEGREE = 200


def _normalize(c) -> Coefficient:
    if type(c) is int:  # Fraction's ABC isinstance check is slow on hot paths
        return c
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


@dataclass(frozen=True)
class Alphabet:
    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in ("chern", "torus", "shifted"):
            raise ValueError(f"unknown alphabet kind {self.kind!r}")
        if not 1 <= self.n <= MAX_VARIABLES:
            raise ValueError(f"alphabet size {self.n} out of range [1, {MAX_VARIABLES}]")

    @classmethod
    def chern(cls, n: int) -> Alphabet:
        return cls("chern", n)

    @classmethod
    def torus(cls, n: int) -> Alphabet:
        return cls("torus", n)

    @classmethod
    def shifted(cls, n: int) -> Alphabet:
        return cls("shifted", n)

    def degree(self, i: int) -> int:
        """Cohomological degree of the variable at (0-based) position ``i``."""
        if not 0 <= i < self.n:
            raise IndexError(f"variable index {i} out of range for {self}")
        return 2 * (i + 1) if self.kind == "chern" else 2

    def name(self, i: int) -> str:
        if not 0 <= i < self.n:
            raise IndexError(f"variable index {i} out of range for {self}")
        if self.kind == "chern":
            return f"c{i + 1}"
        if self.kind == "shifted" and i < self.n - 1:
            return f"v'{i + 1}"
        return f"v{i + 1}"

    def monomial_degree(self, exps: Monomial) -> int:
        if self.kind == "chern":
            return 2 * sum((i + 1) * e for i, e in enumerate(exps))
        return 2 * sum(exps)

    def one(self) -> Monomial:
        return (0,) * self.n

    def unit_vector(self, i: int, power: int = 1) -> Monomial:
        self.degree(i)
        return tuple(power if j == i else 0 for j in range(self.n))

    def render(self, exps: Monomial) -> str:
        parts = []
        for i, e in enumerate(exps):
            if e == 1:
                parts.append(self.name(i))
            elif e:
                parts.append(f"{self.name(i)}^{e}")
        return "*".join(parts) if parts else "1"


class GradedPolynomial:
    """Sparse polynomial over an :class:`Alphabet` with exact rational coefficients.

    Instances are treated as immutable.  Zero coefficients are never stored.
    """

    __slots__ = ("alphabet", "_terms")

    def __init__(self, alphabet: Alphabet, terms: Mapping[Monomial, Coefficient] | None = None):
        self.alphabet = alphabet
        clean = {}
        for mon, c in (terms or {}).items():
            if len(mon) != alphabet.n:
                raise ValueError(f"exponent vector {mon} does not fit {alphabet}")
            if c:
                clean[tuple(mon)] = _normalize(c)
        self._terms = clean

    @classmethod
    def _raw(cls, alphabet: Alphabet, terms: dict) -> GradedPolynomial:
        # trusted constructor: terms already clean
        obj = cls.__new__(cls)
        obj.alphabet = alphabet
        obj._terms = terms
        return obj

    @classmethod
    def constant(cls, alphabet: Alphabet, c: Coefficient = 1) -> GradedPolynomial:
        return cls(alphabet, {alphabet.one(): c})

    @classmethod
    def variable(cls, alphabet: Alphabet, i: int, power: int = 1) -> GradedPolynomial:
        return cls(alphabet, {alphabet.unit_vector(i, power): 1})

    @classmethod
    def monomial(cls, alphabet: Alphabet, exps: Iterable[int], c: Coefficient = 1) -> GradedPolynomial:
        return cls(alphabet, {tuple(exps): c})

    @property
    def terms(self) -> Mapping[Monomial, Coefficient]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self._terms)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def coefficient(self, exps: Monomial) -> Coefficient:
        return self._terms.get(tuple(exps), 0)

    def degrees(self) -> set[int]:
        return {self.alphabet.monomial_degree(m) for m in self._terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def degree(self) -> int | None:
        """The common degree of a nonzero homogeneous polynomial; None for zero."""
        degs = self.degrees()
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError(f"polynomial is not homogeneous (degrees {sorted(degs)})")
        return degs.pop()

    def _check(self, other: GradedPolynomial):
        if other.alphabet != self.alphabet:
            raise ValueError(f"alphabet mismatch: {self.alphabet} vs {other.alphabet}")

    def _lift(self, other) -> GradedPolynomial:
        if isinstance(other, GradedPolynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return GradedPolynomial.constant(self.alphabet, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = _normalize(s)
            else:
                out.pop(m, None)
        return GradedPolynomial._raw(self.alphabet, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedPolynomial._raw(self.alphabet, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Coefficient) -> GradedPolynomial:
        if not c:
            return GradedPolynomial(self.alphabet)
        return GradedPolynomial._raw(self.alphabet, {m: _normalize(v * c) for m, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        get = out.get
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(map(add, m1, m2))
                out[m] = get(m, 0) + c1 * c2
        return GradedPolynomial(self.alphabet, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result = GradedPolynomial.constant(self.alphabet)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GradedPolynomial.constant(self.alphabet, other)
        if not isinstance(other, GradedPolynomial):
            return NotImplemented
        return self.alphabet == other.alphabet and self._terms == other._terms

    def __hash__(self):
        return hash((self.alphabet, frozenset(self._terms.items())))

    def sorted_terms(self) -> list[tuple[Monomial, Coefficient]]:
        """Terms in descending monomial order."""
        return sorted(self._terms.items(), key=lambda mc: mc[0], reverse=True)

    def __str__(self):
        if not self._terms:
            return "0"
        out = []
        for mon, c in self.sorted_terms():
            body = self.alphabet.render(mon)
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if body == "1":
                text = str(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{mag}*{body}"
            out.append((sign, text))
        first_sign, first = out[0]
        s = ("-" if first_sign == "-" else "") + first
        for sign, text in out[1:]:
            s += f" {sign} {text}"
        return s

    def __repr__(self):
        return f"GradedPolynomial({self.alphabet.kind}({self.alphabet.n}), {self})"


# --------------------------------------------------------------------------
# bases and orderings


def _partitions(total: int, max_part: int) -> Iterator[list[int]]:
    """Partitions of ``total`` into parts <= ``max_part``, parts in non-increasing order."""
    if total == 0:
        yield []
        return
    for part in range(min(total, max_part), 0, -1):
        for rest in _partitions(total - part, part):
            yield [part] + rest


def chern_basis(n: int, t: int) -> list[Monomial]:
    """All Chern monomials of cohomological degree ``t`` over ``c1..cn``, descending."""
    if t < 0 or t % 2:
        raise ValueError(f"Chern monomials live in even nonnegative degrees, got {t}")
    if t > MAX_DEGREE:
        raise ValueError(f"degree {t} exceeds the cap {MAX_DEGREE}")
    Alphabet.chern(n)
    out = []
    for parts in _partitions(t // 2, n):
        exps = [0] * n
        for k in parts:
            exps[k - 1] += 1
        out.append(tuple(exps))
    out.sort(reverse=True)
    return out


def order_gt(a: Monomial, b: Monomial) -> bool:
    """True iff ``a > b``: at the first index where they differ, ``a`` has the larger exponent."""
    if len(a) != len(b):
        raise ValueError("monomials over different alphabets are not comparable")
    return tuple(a) > tuple(b)


def top_index(exps: Monomial) -> int:
    """1-based index of the largest Chern class present; 0 for the unit monomial."""
    for i in range(len(exps) - 1, -1, -1):
        if exps[i]:
            return i + 1
    return 0


# --------------------------------------------------------------------------
# symmetric functions and the torus transfer


def elementary_symmetric(j: int, alphabet: Alphabet, indices: Iterable[int] | None = None) -> GradedPolynomial:
    """``sigma_j`` of the variables at the given 0-based positions (all of them by default)."""
    idx = list(range(alphabet.n)) if indices is None else list(indices)
    if j < 0:
        raise ValueError("j must be nonnegative")
    terms: dict = {}
    for subset in combinations(idx, j):
        exps = [0] * alphabet.n
        for i in subset:
            exps[i] += 1
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + 1
    return GradedPolynomial(alphabet, terms)


@lru_cache(maxsize=None)
def _sigma(n: int, k: int) -> GradedPolynomial:
    return elementary_symmetric(k, Alphabet.torus(n))


@lru_cache(maxsize=4096)
def _monomial_image(n: int, mon: Monomial) -> GradedPolynomial:
    # peel off the lowest-index factor: sigma_1 has the fewest terms
    i = next((k for k, e in enumerate(mon) if e), None)
    if i is None:
        return GradedPolynomial.constant(Alphabet.torus(n))
    rest = mon[:i] + (mon[i] - 1,) + mon[i + 1:]
    return _monomial_image(n, rest) * _sigma(n, i + 1)


def chern_to_torus(f: GradedPolynomial) -> GradedPolynomial:
    """Restrict to the maximal torus: ``c_i -> sigma_i(v1, .., vn)``."""
    if f.alphabet.kind != "chern":
        raise ValueError("chern_to_torus expects a Chern polynomial")
    n = f.alphabet.n
    out: dict = {}
    for mon, c in f.items():
        for m, v in _monomial_image(n, mon).items():
            out[m] = out.get(m, 0) + c * v
    return GradedPolynomial(Alphabet.torus(n), out)


def _shift_power(n: int, i: int, e: int, truncation: int | None) -> dict:
    """``(v'_i + v_n)^e`` (or ``v_n^e`` when i is the last variable) as raw terms."""
    last = n - 1
    if i == last:
        return {tuple(e if j == last else 0 for j in range(n)): 1}
    top = e if truncation is None else min(e, truncation)
    out = {}
    for a in range(top + 1):
        exps = [0] * n
        exps[i] = a
        exps[last] = e - a
        out[tuple(exps)] = math.comb(e, a)
    return out


def _vprime_degree(exps: Monomial) -> int:
    return sum(exps[:-1])


def shift_expand(f: GradedPolynomial, truncation: int | None = None) -> GradedPolynomial:
    """Rewrite a torus polynomial in ``v'_i = v_i - v_n`` (i < n) and ``v_n``.

    With ``truncation=d`` every term of total ``v'``-degree above ``d`` is
    dropped as soon as it appears, so intermediate products stay small.
    """
    if f.alphabet.kind != "torus":
        raise ValueError("shift_expand expects a torus polynomial")
    n = f.alphabet.n
    shifted = Alphabet.shifted(n)
    out: dict = {}
    for mon, c in f.items():
        acc = {shifted.one(): c}
        for i, e in enumerate(mon):
            if not e:
                continue
            factor = _shift_power(n, i, e, truncation)
            nxt: dict = {}
            for m1, c1 in acc.items():
                for m2, c2 in factor.items():
                    m = tuple(a + b for a, b in zip(m1, m2))
                    if truncation is not None and _vprime_degree(m) > truncation:
                        continue
                    nxt[m] = nxt.get(m, 0) + c1 * c2
            acc = nxt
        for m, v in acc.items():
            out[m] = out.get(m, 0) + v
    return GradedPolynomial(shifted, out)


def unshift(f: GradedPolynomial) -> GradedPolynomial:
    """Inverse of untruncated :func:`shift_expand`: substitute ``v'_i = v_i - v_n``."""
    if f.alphabet.kind != "shifted":
        raise ValueError("unshift expects a shifted-torus polynomial")
    n = f.alphabet.n
    torus = Alphabet.torus(n)
    diffs = [
        GradedPolynomial(torus, {torus.unit_vector(i): 1, torus.unit_vector(n - 1): -1}) for i in range(n - 1)
    ]
    out = GradedPolynomial(torus)
    for mon, c in f.items():
        term = GradedPolynomial.monomial(torus, torus.unit_vector(n - 1, mon[-1]), c)
        for i, e in enumerate(mon[:-1]):
            if e:
                term = term * diffs[i] ** e
        out = out + term
    return out


def coeff_of_vn_power(f: GradedPolynomial, k: int) -> GradedPolynomial:
    """The coefficient of ``v_n^k`` in a shifted polynomial, as a polynomial in the ``v'`` only."""
    if f.alphabet.kind != "shifted":
        raise ValueError("coeff_of_vn_power expects a shifted-torus polynomial")
    out = {}
    for mon, c in f.items():
        if mon[-1] == k:
            out[mon[:-1] + (0,)] = c
    return GradedPolynomial(f.alphabet, out)


def chern_to_shifted_linear(f: GradedPolynomial) -> tuple[Coefficient, Coefficient]:
    """Truncated torus transfer of a homogeneous Chern polynomial of weight ``w``.

    Returns ``(A, B)`` with ``shift_expand(chern_to_torus(f), 1) ==
    A*v_n^w + B*(v'_1 + ... + v'_(n-1))*v_n^(w-1)``.  Uses
    ``sigma_j(v' + v_n) = C(n, j) v_n^j + C(n-1, j-1) sigma_1(v') v_n^(j-1) + O(v'^2)``
    so that nothing of size ``C(n, j)`` is ever expanded.
    """
    if f.alphabet.kind != "chern":
        raise ValueError("chern_to_shifted_linear expects a Chern polynomial")
    f.degree()
    n = f.alphabet.n
    total_a: Coefficient = 0
    total_b: Coefficient = 0
    for mon, c in f.items():
        a, b = c, 0
        for i, e in enumerate(mon):
            j = i + 1
            aj, bj = math.comb(n, j), math.comb(n - 1, j - 1)
            for _ in range(e):
                a, b = a * aj, a * bj + b * aj
        total_a += a
        total_b += b
    return _normalize(total_a), _normalize(total_b)


# --------------------------------------------------------------------------
# divergences


def divergence_torus(f: GradedPolynomial) -> GradedPolynomial:
    """``sum_i d/dv_i`` on a torus polynomial."""
    if f.alphabet.kind != "torus":
        raise ValueError("divergence_torus expects a torus polynomial")
    out: dict = {}
    for mon, c in f.items():
        for i, e in enumerate(mon):
            if e:
                m = mon[:i] + (e - 1,) + mon[i + 1:]
                out[m] = out.get(m, 0) + c * e
    return GradedPolynomial(f.alphabet, out)


def divergence_chern(f: GradedPolynomial) -> GradedPolynomial:
    """The derivation with ``c_k -> (n - k + 1) c_(k-1)`` and ``c_0 = 1``."""
    if f.alphabet.kind != "chern":
        raise ValueError("divergence_chern expects a Chern polynomial")
    n = f.alphabet.n
    out: dict = {}
    for mon, c in f.items():
        for i, e in enumerate(mon):
            if not e:
                continue
            k = i + 1
            m = list(mon)
            m[i] -= 1
            if k > 1:
                m[i - 1] += 1
            m = tuple(m)
            out[m] = out.get(m, 0) + c * e * (n - k + 1)
    return GradedPolynomial(f.alphabet, out)


# --------------------------------------------------------------------------
# combinatorial gadgets


def tau(c: Monomial, p: int) -> Monomial:
    """Trade one factor of the top Chern class ``c_k`` (k < p) for ``c_(k+1)``."""
    k = top_index(c)
    if k == 0:
        raise ValueError("tau is not defined on the unit monomial")
    if k >= p:
        raise ValueError(f"tau needs the top class index below p={p}, got c{k}")
    if k >= len(c):
        raise ValueError(f"c{k + 1} does not exist over c1..c{len(c)}")
    out = list(c)
    out[k - 1] -= 1
    out[k] += 1
    return tuple(out)


def multilinear_sigma1_sum(n: int, p: int) -> int:
    """Brute-force ``sum over p-subsets of sigma_1 = C(n-1, p-1) * sigma_1(t_1..t_n)``.

    Returns the multiplier after checking the identity term by term.
    """
    if p > n:
        raise ValueError(f"need p <= n, got p={p}, n={n}")
    alphabet = Alphabet.torus(n)
    lhs = GradedPolynomial(alphabet)
    for subset in combinations(range(n), p):
        lhs = lhs + elementary_symmetric(1, alphabet, subset)
    lam = math.comb(n - 1, p - 1)
    if lhs != elementary_symmetric(1, alphabet).scale(lam):
        from .exceptions import InvariantViolation

        raise InvariantViolation(f"subset sum of sigma_1 is not {lam}*sigma_1 for n={n}, p={p}")
    return lam


# --------------------------------------------------------------------------
# text grammar: c<k>, ^, *, integer coefficients, + and -


class ParseError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<var>c(?P<idx>\d+))|(?P<op>[\^*+\-]))")


def _tokens(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            if text[start] == "c":
                raise ParseError("expected an index after 'c'", text, start + 1)
            raise ParseError(f"unexpected character {text[start]!r}", text, start)
        start = m.start() + len(m.group(0)) - len(m.group(0).lstrip())
        if m.group("int"):
            out.append(("int", int(m.group("int")), start))
        elif m.group("var"):
            out.append(("var", int(m.group("idx")), start))
        else:
            out.append(("op", m.group("op"), start))
        pos = m.end()
    return out


def parse_chern(text: str, n: int) -> GradedPolynomial:
    """Parse e.g. ``"c1*c3"``, ``"c1^2 * c2"``, ``"c1*c3 - c4"`` or ``"3*c2"`` over ``c1..cn``."""
    alphabet = Alphabet.chern(n)
    toks = _tokens(text)
    if not toks:
        raise ParseError("empty expression", text, 0)
    result = GradedPolynomial(alphabet)
    i = 0

    def peek():
        return toks[i] if i < len(toks) else None

    sign = 1
    if peek() and peek()[0] == "op" and peek()[1] in "+-":
        sign = -1 if peek()[1] == "-" else 1
        i += 1
    while True:
        coeff = 1
        exps = [0] * n
        expect_factor = True
        while expect_factor:
            tok = peek()
            if tok is None:
                raise ParseError("expression ends where a factor was expected", text, len(text))
            kind, val, pos = tok
            if kind == "int":
                coeff *= val
                i += 1
            elif kind == "var":
                if not 1 <= val <= n:
                    raise ParseError(f"c{val} does not exist for n={n}", text, pos)
                i += 1
                power = 1
                nxt = peek()
                if nxt and nxt[0] == "op" and nxt[1] == "^":
                    i += 1
                    ptok = peek()
                    if ptok is None or ptok[0] != "int":
                        raise ParseError("'^' must be followed by an integer", text, nxt[2])
                    power = ptok[1]
                    i += 1
                exps[val - 1] += power
            else:
                raise ParseError(f"unexpected {val!r}", text, pos)
            nxt = peek()
            if nxt and nxt[0] == "op" and nxt[1] == "*":
                i += 1
            else:
                expect_factor = False
        result = result + GradedPolynomial.monomial(alphabet, exps, sign * coeff)
        tok = peek()
        if tok is None:
            return result
        kind, val, pos = tok
        if kind == "op" and val in "+-":
            sign = -1 if val == "-" else 1
            i += 1
        else:
            shown = f"c{val}" if kind == "var" else val
            raise ParseError(f"unexpected {shown!r}", text, pos)
