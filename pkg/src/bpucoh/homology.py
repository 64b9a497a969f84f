"""Exact p-local linear algebra for the four-term complex and the final group table.

All matrices hold Python integers.  Matrices with p-local rational entries
are brought to integers by scaling each column with a p-unit, which leaves
the p-parts of all elementary divisors unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .exceptions import InvariantViolation
from .plocal import require_odd_prime, residue_mod, split_prime_power, vp
from .polyring import Alphabet, GradedPolynomial, Monomial, chern_basis, divergence_chern, tau, top_index
from .specseq import X1, X1Y, Y, chain_complex_entries, delta0, delta1, delta2, ypo_survival


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError(f"entries do not form a {self.rows}x{self.cols} matrix")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> IntMatrix:
        rows = [tuple(int(x) for x in r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(len(rows), cols, tuple(rows))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> IntMatrix:
        return cls.from_rows([[col[i] for col in columns] for i in range(rows)], cols=len(columns))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntMatrix:
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, size: int) -> IntMatrix:
        return cls.from_rows([[int(i == j) for j in range(size)] for i in range(size)], cols=size)

    def to_lists(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def column(self, j: int) -> list[int]:
        return [r[j] for r in self.entries]

    def columns(self) -> list[list[int]]:
        return [self.column(j) for j in range(self.cols)]

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        ocols = other.columns()
        return IntMatrix.from_rows(
            [[sum(a * b for a, b in zip(r, c)) for c in ocols] for r in self.entries], cols=other.cols
        )

    def mutated(self, i: int, j: int, delta: int = 1) -> IntMatrix:
        rows = self.to_lists()
        rows[i][j] += delta
        return IntMatrix.from_rows(rows, cols=self.cols)

    def mod(self, m: int) -> IntMatrix:
        return IntMatrix.from_rows([[x % m for x in r] for r in self.entries], cols=self.cols)

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)


def clear_denominators(columns: Sequence[Sequence], rows: int, p: int) -> tuple[IntMatrix, list[int]]:
    """Scale each column of p-local rationals by the lcm of its denominators.

    Returns the integer matrix and the multipliers used; every multiplier is
    a p-unit, otherwise the input was not p-local.
    """
    scales = []
    cleared = []
    for col in columns:
        col = [Fraction(x) for x in col]
        m = lcm(1, *(x.denominator for x in col))
        if m % p == 0:
            raise ValueError(f"column {col} is not {p}-local")
        scales.append(m)
        cleared.append([int(x * m) for x in col])
    return IntMatrix.from_columns(cleared, rows), scales


# --------------------------------------------------------------------------
# Smith normal form


def smith_normal_form(M: IntMatrix, transforms: bool = True) -> tuple[IntMatrix | None, IntMatrix, IntMatrix | None]:
    """Return unimodular ``U``, ``V`` and diagonal ``D`` with ``U @ M @ V == D``.

    The diagonal is nonnegative and each entry divides the next.  With
    ``transforms=False`` only ``D`` is computed and ``U``, ``V`` are None.
    """
    m, n = M.rows, M.cols
    A = M.to_lists()
    U = IntMatrix.identity(m).to_lists() if transforms else None
    V = IntMatrix.identity(n).to_lists() if transforms else None

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        if transforms:
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        if transforms:
            for row in V:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        A[dst] = [a + q * b for a, b in zip(A[dst], A[src])]
        if transforms:
            U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):  # col_dst += q * col_src
        for row in A:
            if row[src]:
                row[dst] += q * row[src]
        if transforms:
            for row in V:
                row[dst] += q * row[src]

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            # Euclid down column t, then along row t; pivots only shrink
            while True:
                rows = [i for i in range(t + 1, m) if A[i][t]]
                if not rows:
                    break
                for i in rows:
                    add_row(i, t, -(A[i][t] // A[t][t]))
                i = min((i for i in rows if A[i][t]), key=lambda i: abs(A[i][t]), default=None)
                if i is not None:
                    swap_rows(t, i)
            cols = [j for j in range(t + 1, n) if A[t][j]]
            if cols:
                for j in cols:
                    add_col(j, t, -(A[t][j] // A[t][t]))
                j = min((j for j in cols if A[t][j]), key=lambda j: abs(A[t][j]), default=None)
                if j is not None:
                    swap_cols(t, j)
                continue
            piv = A[t][t]
            bad = next((i for i in range(t + 1, m) if any(A[i][j] % piv for j in range(t + 1, n))), None)
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            if transforms:
                U[t] = [-x for x in U[t]]
    D = IntMatrix.from_rows(A, cols=n)
    if not transforms:
        return None, D, None
    return IntMatrix.from_rows(U, cols=m), D, IntMatrix.from_rows(V, cols=n)


def elementary_divisors(M: IntMatrix) -> list[int]:
    """The nonzero diagonal of the Smith normal form."""
    _, D, _ = smith_normal_form(M, transforms=False)
    return [D.entries[i][i] for i in range(min(D.rows, D.cols)) if D.entries[i][i]]


# --------------------------------------------------------------------------
# lattices over Z_(p)


def plocal_hnf(generators: Iterable[Sequence], dim: int, p: int) -> tuple[tuple[Fraction, ...], ...]:
    """Canonical basis of the Z_(p)-lattice spanned by ``generators`` in ``Q^dim``.

    Echelon form: the j-th basis vector is zero above its pivot row, the
    pivot is a power of p, and entries of earlier vectors in a pivot row
    ``p^e`` are reduced to integers in ``[0, p^e)``.  Two generating sets
    span the same lattice iff their outputs are equal.
    """
    gens = [[Fraction(x) for x in g] for g in generators]
    for g in gens:
        if len(g) != dim:
            raise ValueError("generator has the wrong length")
        for x in g:
            vp(x, p)  # rejects non-p-local entries
    gens = [g for g in gens if any(g)]
    basis: list[tuple[int, int, list[Fraction]]] = []
    for row in range(dim):
        live = [g for g in gens if g[row]]
        if not live:
            continue
        chosen = min(live, key=lambda g: vp(g[row], p))
        e = vp(chosen[row], p)
        unit = Fraction(p**e) / chosen[row]
        pivot = [x * unit for x in chosen]
        rest = []
        for g in gens:
            if g is chosen:
                continue
            if g[row]:
                q = g[row] / p**e
                g = [a - q * b for a, b in zip(g, pivot)]
            if any(g):
                rest.append(g)
        gens = rest
        basis.append((row, e, pivot))
    for j, (row_j, e_j, vec_j) in enumerate(basis):
        mod = p**e_j
        for i in range(j):
            vec_i = basis[i][2]
            x = vec_i[row_j]
            r = residue_mod(x, mod)
            q = (x - r) / mod
            if q:
                basis[i] = (basis[i][0], basis[i][1], [a - q * b for a, b in zip(vec_i, vec_j)])
    return tuple(tuple(v) for _, _, v in basis)


def rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    A = [[x % p for x in r] for r in rows]
    rank = 0
    ncols = len(A[0]) if A else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][c], -1, p)
        A[rank] = [x * inv % p for x in A[rank]]
        for i in range(len(A)):
            if i != rank and A[i][c]:
                f = A[i][c]
                A[i] = [(a - f * b) % p for a, b in zip(A[i], A[rank])]
        rank += 1
    return rank


def nullspace_mod_p(rows: Sequence[Sequence[int]], ncols: int, p: int) -> list[list[int]]:
    """Basis of ``{x in F_p^ncols : rows . x = 0}`` with entries in ``[0, p)``."""
    A = [[x % p for x in r] for r in rows]
    pivots = []
    rank = 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][c], -1, p)
        A[rank] = [x * inv % p for x in A[rank]]
        for i in range(len(A)):
            if i != rank and A[i][c]:
                f = A[i][c]
                A[i] = [(a - f * b) % p for a, b in zip(A[i], A[rank])]
        pivots.append(c)
        rank += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [0] * ncols
        v[fc] = 1
        for r, pc in enumerate(pivots):
            v[pc] = (-A[r][fc]) % p
        basis.append(v)
    return basis


def kernel_mod_p_lattice(rows: Sequence[Sequence[int]], ncols: int, p: int) -> list[list[int]]:
    """Generators of ``{x in Z_(p)^ncols : rows . x = 0 mod p}``: lifted kernel plus ``p * e_i``."""
    gens = nullspace_mod_p(rows, ncols, p)
    gens += [[p if i == j else 0 for i in range(ncols)] for j in range(ncols)]
    return gens


def _coordinate_solver(basis: Sequence[Sequence[Fraction]], p: int):
    """Coordinates in a full-rank echelon basis; the solver returns None outside the p-local span."""
    size = len(basis)
    below = [[(i, basis[i][j]) for i in range(j) if basis[i][j]] for j in range(size)]

    def solve(x: Sequence) -> list[Fraction] | None:
        y = []
        for j in range(size):
            val = Fraction(x[j]) - sum(y[i] * b for i, b in below[j])
            coord = val / basis[j][j]
            if coord.denominator % p == 0:
                return None
            y.append(coord)
        return y

    return solve


# --------------------------------------------------------------------------
# finitely generated p-local groups


@dataclass(frozen=True)
class GroupDescriptor:
    free_rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(sorted(self.torsion)))
        if self.free_rank < 0 or any(t <= 1 for t in self.torsion):
            raise ValueError(f"invalid group {self.free_rank}, {self.torsion}")

    @classmethod
    def from_divisors(cls, divisors: Iterable[int], generators: int, p: int) -> GroupDescriptor:
        """Cokernel of a map into ``Z_(p)^generators`` with the given nonzero elementary divisors."""
        divisors = list(divisors)
        torsion = [p ** vp(d, p) for d in divisors if vp(d, p) > 0]
        return cls(generators - len(divisors), tuple(torsion))

    def p_torsion_only(self) -> GroupDescriptor:
        return GroupDescriptor(0, self.torsion)

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def to_json(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}

    @classmethod
    def from_json(cls, data: dict) -> GroupDescriptor:
        return cls(data["free_rank"], tuple(data["torsion"]))

    def __str__(self):
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank:
            parts.append(f"Z^{self.free_rank}")
        parts += [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


# --------------------------------------------------------------------------
# the four-term complex


@dataclass(frozen=True)
class ChainComplexM:
    p: int
    n: int
    bases: tuple[tuple, tuple, tuple, tuple]
    d0: IntMatrix  # |B1| x |B0|, integer
    d1: IntMatrix  # |B2| x |B1|, residues mod p
    d2: IntMatrix  # |B3| x |B2|, residues mod p
    d0_scales: tuple[int, ...] = ()

    def rendered_bases(self) -> list[list[str]]:
        chern = Alphabet.chern(self.n)
        out = []
        for gen, basis in zip((None, X1, Y, X1Y), self.bases):
            names = []
            for m in basis:
                body = chern.render(m)
                if gen is not None:
                    body = gen if body == "1" else f"{body}*{gen}"
                names.append(body)
            out.append(names)
        return out

    def replace(self, **changes) -> ChainComplexM:
        data = {f: getattr(self, f) for f in ("p", "n", "bases", "d0", "d1", "d2", "d0_scales")}
        data.update(changes)
        return ChainComplexM(**data)


def _coords_in(poly: GradedPolynomial, basis: Sequence[Monomial]) -> list:
    index = {m: i for i, m in enumerate(basis)}
    out = [0] * len(basis)
    for mon, c in poly.items():
        if mon not in index:
            raise InvariantViolation(f"{mon} is not in the target basis")
        out[index[mon]] = c
    return out


def build_complex(p: int, n: int, delta1_method: str = "symmetric") -> ChainComplexM:
    """Assemble bases and matrices of ``M0 -> M1 -> M2 -> M3``.

    When p does not divide n the last two terms are zero.
    """
    require_odd_prime(p)
    m0, m1, m2, m3 = chain_complex_entries(p, n)
    b0, b1 = m0.basis, m1.basis
    cols = [_coords_in(delta0(b, p, n), b1) for b in b0]
    d0, scales = clear_denominators(cols, len(b1), p)
    if n % p == 0:
        b2, b3 = m2.basis, m3.basis
        d1 = IntMatrix.from_rows([[delta1(c, p, n, method=delta1_method) for c in b1]], cols=len(b1))
        d2 = IntMatrix.from_rows([[delta2(p, n)]], cols=1)
    else:
        b2, b3 = (), ()
        d1 = IntMatrix.zeros(0, len(b1))
        d2 = IntMatrix.zeros(0, 0)
    return ChainComplexM(p, n, (tuple(b0), tuple(b1), tuple(b2), tuple(b3)), d0, d1, d2, tuple(scales))


@dataclass
class ExactnessReport:
    p: int
    n: int
    is_complex_at_m1: bool
    is_complex_at_m2: bool
    exact_at_m1: bool
    exact_at_m2: bool
    homology_m1: GroupDescriptor | None
    homology_m2: GroupDescriptor | None
    d0_divisors: list[int] = field(default_factory=list)
    image_equals_kernel_lattice: bool = False

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "is_complex_at_M1": self.is_complex_at_m1,
            "is_complex_at_M2": self.is_complex_at_m2,
            "exact_at_M1": self.exact_at_m1,
            "exact_at_M2": self.exact_at_m2,
            "homology_M1": None if self.homology_m1 is None else self.homology_m1.to_json(),
            "homology_M2": None if self.homology_m2 is None else self.homology_m2.to_json(),
            "d0_elementary_divisors": self.d0_divisors,
        }


def complex_exactness(cx: ChainComplexM) -> ExactnessReport:
    """Homology of a (possibly perturbed) four-term complex at M1 and M2."""
    p = cx.p
    n1, n2 = cx.d0.rows, cx.d1.rows
    d0_cols = cx.d0.columns()
    d1_rows = [list(r) for r in cx.d1.entries]

    complex1 = all(sum(a * b for a, b in zip(r, col)) % p == 0 for r in d1_rows for col in d0_cols)
    ker_gens = kernel_mod_p_lattice(d1_rows, n1, p)
    ker_basis = plocal_hnf(ker_gens, n1, p)
    same_lattice = plocal_hnf(d0_cols, n1, p) == ker_basis
    h1 = None
    if complex1:
        if len(ker_basis) != n1:
            raise InvariantViolation("kernel of delta1 does not have full rank")
        solve = _coordinate_solver(ker_basis, p)
        coords = [solve(col) for col in d0_cols]
        if any(c is None for c in coords):
            raise InvariantViolation("image of delta0 escapes the kernel of delta1")
        Y, _ = clear_denominators(coords, n1, p)
        h1 = GroupDescriptor.from_divisors(elementary_divisors(Y), n1, p)
        if h1.is_zero != same_lattice:
            raise InvariantViolation(f"lattice comparison ({same_lattice}) disagrees with homology {h1}")

    d2_rows = [list(r) for r in cx.d2.entries]
    complex2 = all(sum(a * b for a, b in zip(r2, [r1[j] for r1 in d1_rows])) % p == 0
                   for r2 in d2_rows for j in range(n1))
    h2 = None
    if complex2:
        dim_ker = n2 - rank_mod_p(d2_rows, p) if d2_rows else n2
        dim_im = rank_mod_p(d1_rows, p) if d1_rows else 0
        h2 = GroupDescriptor(0, (p,) * (dim_ker - dim_im))
    return ExactnessReport(
        p=p,
        n=cx.n,
        is_complex_at_m1=complex1,
        is_complex_at_m2=complex2,
        exact_at_m1=complex1 and h1.is_zero,
        exact_at_m2=complex2 and h2.is_zero,
        homology_m1=h1,
        homology_m2=h2,
        d0_divisors=elementary_divisors(cx.d0),
        image_equals_kernel_lattice=same_lattice,
    )


def exactness_report(p: int, n: int) -> ExactnessReport:
    return complex_exactness(build_complex(p, n))


# --------------------------------------------------------------------------
# the triangular matrix of delta0 . tau and the lattices V, W


@dataclass
class TriangularityReport:
    p: int
    n: int
    matrix_mod_p: list[list[int]]
    diagonal: list[int]
    expected_diagonal: list[int]
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def delta0_tau_matrix(p: int, n: int) -> tuple[list[Monomial], list[Monomial], IntMatrix]:
    """Matrix of ``delta0 . tau`` from span(S) to M1, both bases descending."""
    s_prime = chern_basis(n, 2 * p)
    s = [c for c in s_prime if top_index(c) < p]
    cols = [_coords_in(delta0(tau(c, p), p, n), s_prime) for c in s]
    A, _ = clear_denominators(cols, len(s_prime), p)
    return s, s_prime, A


def triangularity_check(p: int, n: int) -> TriangularityReport:
    require_odd_prime(p)
    s, s_prime, A = delta0_tau_matrix(p, n)
    Am = A.mod(p).to_lists()
    chern = Alphabet.chern(n)
    violations = []
    diagonal, expected = [], []
    if s_prime[:len(s)] != s or s_prime[len(s):] != [chern.unit_vector(p - 1)]:
        violations.append("S is not S' with its smallest element c_p removed")
    for i, c in enumerate(s):
        diagonal.append(Am[i][i])
        want = (n - top_index(c)) % p
        expected.append(want)
        if Am[i][i] != want:
            violations.append(f"diagonal at {chern.render(c)} is {Am[i][i]}, expected n-k = {want} mod {p}")
        if want == 0:
            violations.append(f"diagonal at {chern.render(c)} is not a unit")
        for j in range(i + 1, len(s_prime)):
            if Am[j][i]:
                violations.append(f"entry below diagonal at row {chern.render(s_prime[j])}, column {chern.render(c)}")
    return TriangularityReport(p, n, Am, diagonal, expected, violations)


@dataclass
class NakayamaReport:
    p: int
    n: int
    image_in_w: bool
    surjective_mod_p: bool
    image_equals_w: bool
    w_equals_kernel: bool
    image_delta0_equals_w: bool

    @property
    def nakayama_consistent(self) -> bool:
        # over a local ring, onto mod p <=> onto
        return self.surjective_mod_p == self.image_equals_w

    @property
    def ok(self) -> bool:
        # V alone need not reach W (it misses p*c_p*x1 when n/p = 1 mod p);
        # the full image of delta0 always must.
        return all((self.image_in_w, self.nakayama_consistent,
                    self.w_equals_kernel, self.image_delta0_equals_w))


def nakayama_check(p: int, n: int) -> NakayamaReport:
    """Compare ``delta0(V)`` with ``W = L x1 + (p c_p x1)`` both mod p and as lattices.

    ``V`` is spanned by ``tau(S)`` and ``c1*c_p - c_(p+1)``; the second
    term is dropped when ``c_(p+1)`` does not exist (n = p).
    """
    require_odd_prime(p)
    cx = build_complex(p, n)
    s, s_prime, A = delta0_tau_matrix(p, n)
    chern = Alphabet.chern(n)
    extra = GradedPolynomial.monomial(chern, chern.unit_vector(0)) * GradedPolynomial.variable(chern, p - 1)
    if n > p:
        extra = extra - GradedPolynomial.variable(chern, p)
    v_images = A.columns() + [_coords_in(delta0(extra, p, n), s_prime)]
    N = len(s)
    w_gens = [[int(i == j) for i in range(N + 1)] for j in range(N)] + [[p if i == N else 0 for i in range(N + 1)]]

    image_in_w = all(col[N] % p == 0 for col in v_images)
    w_coords = [col[:N] + [Fraction(col[N], p)] for col in v_images]
    surjective = image_in_w and rank_mod_p([[residue_mod(x, p) for x in col] for col in w_coords], p) == N + 1
    w_hnf = plocal_hnf(w_gens, N + 1, p)
    image_equals_w = plocal_hnf(v_images, N + 1, p) == w_hnf
    ker = plocal_hnf(kernel_mod_p_lattice([list(r) for r in cx.d1.entries], N + 1, p), N + 1, p)
    image_all = plocal_hnf(cx.d0.columns(), N + 1, p)
    return NakayamaReport(p, n, image_in_w, surjective, image_equals_w, w_hnf == ker, image_all == w_hnf)


# --------------------------------------------------------------------------
# rows of d3 and the group table


def d3_matrix(n: int, t: int) -> IntMatrix:
    """``d3: E^{0,t} -> E^{3,t-2}`` as a matrix from ``chern_basis(n, t)`` to ``chern_basis(n, t-2)``."""
    src = chern_basis(n, t)
    if t < 2:
        return IntMatrix.zeros(0, len(src))
    tgt = chern_basis(n, t - 2)
    chern = Alphabet.chern(n)
    cols = [_coords_in(divergence_chern(GradedPolynomial.monomial(chern, b)), tgt) for b in src]
    return IntMatrix.from_columns(cols, len(tgt))


def d3_row_cokernel(p: int, n: int, t: int) -> GroupDescriptor:
    """p-local cokernel of ``d3: E^{0,t} -> E^{3,t-2}``."""
    require_odd_prime(p)
    if t < 2 or t % 2:
        raise ValueError(f"t must be even and at least 2, got {t}")
    M = d3_matrix(n, t)
    return GroupDescriptor.from_divisors(elementary_divisors(M), M.rows, p)


def d3_row_kernel_rank(n: int, t: int) -> int:
    M = d3_matrix(n, t)
    return M.cols - len(elementary_divisors(M))


@dataclass(frozen=True)
class TableRow:
    s: int
    group: GroupDescriptor
    note: str

    @property
    def torsion(self) -> GroupDescriptor:
        return self.group.p_torsion_only()


def count_bsu_monomials(n: int, s: int) -> int:
    """Rank of ``Z_(p)[c2, .., cn]`` in degree s."""
    if s % 2:
        return 0
    return sum(1 for m in chern_basis(n, s) if m[0] == 0)


def group_table(p: int, n: int) -> list[TableRow]:
    """p-local ``H^s(BPU_n)`` for ``0 <= s < 2p + 5``."""
    require_odd_prime(p)
    top = 2 * p + 5
    r, _ = split_prime_power(n, p)
    if r == 0:
        note = "p does not divide n: H^*(BPU_n)_(p) = Z_(p)[c2..cn], torsion-free"
        return [TableRow(s, GroupDescriptor(count_bsu_monomials(n, s)), note) for s in range(top)]

    exact = exactness_report(p, n)
    rows = []
    for s in range(top):
        if s == 2 * p + 2:
            surv = ypo_survival(p, n)
            if not surv.survives:
                raise InvariantViolation(f"y_p0 does not survive for p={p}, n={n}")
            free = d3_row_kernel_rank(n, s)
            rows.append(TableRow(s, GroupDescriptor(free, (p,)), "y_p0 survives (torus transfer); free part Ker d3 on E^{0,2p+2}"))
        elif s == 2 * p + 3:
            h = exact.homology_m1
            if h is None:
                raise InvariantViolation("delta1 . delta0 != 0")
            rows.append(TableRow(s, h, "homology of the four-term complex at M1 = E_inf^{3,2p}"))
        elif s == 2 * p + 4:
            h = exact.homology_m2
            if h is None:
                raise InvariantViolation("delta2 . delta1 != 0")
            free = d3_row_kernel_rank(n, s)
            rows.append(TableRow(s, GroupDescriptor(free, h.torsion),
                                 "torsion: homology at M2 = E_inf^{2p+2,2}; free part Ker d3 on E^{0,2p+4}"))
        elif s % 2 == 0:
            rows.append(TableRow(s, GroupDescriptor(d3_row_kernel_rank(n, s)), "Ker d3 on E^{0,s}: free"))
        elif s == 1:
            rows.append(TableRow(s, GroupDescriptor(), "E_2 vanishes in total degree 1"))
        else:
            rows.append(TableRow(s, d3_row_cokernel(p, n, s - 1), "Coker d3: E^{0,s-1} -> E^{3,s-3}"))
    return rows
