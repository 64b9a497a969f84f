import math
from fractions import Fraction

import pytest

from bpucoh.exceptions import InvariantViolation
from bpucoh.polyring import Alphabet, GradedPolynomial as GP, chern_basis
from bpucoh import specseq
from bpucoh.specseq import (
    KClass,
    X1,
    X1Y,
    Y,
    binomial_value,
    chain_complex_entries,
    delta0,
    delta1,
    delta2,
    kd_rule,
    kz3_table,
    page_entry,
    td3_membership_witness,
    ypo_constant_term_full,
    ypo_survival,
)


def mono(n, **powers):
    e = [0] * n
    for name, k in powers.items():
        e[int(name[1:]) - 1] = k
    return tuple(e)


class TestKZ3:
    @pytest.mark.parametrize("p,degrees", [(3, [0, 3, 8, 11]), (5, [0, 3, 12, 15])])
    def test_nonzero_degrees(self, p, degrees):
        table = kz3_table(p)
        assert [e.degree for e in table if e.group != "0"] == degrees
        assert table[1].group == table[2].group == "0"
        assert len(table) == 2 * p + 6

    def test_groups(self):
        t = {e.degree: e for e in kz3_table(7)}
        assert (t[3].group, t[3].generator) == ("free", X1)
        assert (t[16].group, t[16].generator) == ("Z/p", Y)
        assert t[19].generator == X1Y

    def test_rejects_two(self):
        with pytest.raises(ValueError):
            kz3_table(2)


class TestPages:
    def test_entries(self):
        m0, m1, m2, m3 = chain_complex_entries(3, 3)
        assert (m0.rank, m1.rank, m2.rank, m3.rank) == (4, 3, 1, 1)
        assert m2.coefficients == m3.coefficients == "Z/p"
        assert m0.coefficients == m1.coefficients == "free"

    def test_vanishing_pattern(self):
        assert page_entry(5, 5, 4, 6).is_zero()
        assert page_entry(5, 5, 3, 7).is_zero()
        assert not page_entry(5, 5, 12, 2).is_zero()


class TestKRules:
    def test_d3_of_v(self):
        d = kd_rule(KClass(1), 5)
        assert (d.page, d.coefficient, d.v_power, d.generator) == (3, 1, 0, X1)

    def test_leibniz(self):
        d = kd_rule(KClass(3), 5)
        assert (d.page, d.coefficient, d.v_power) == (3, 3, 2)

    @pytest.mark.parametrize("p", [3, 5, 7])
    def test_transgression(self, p):
        d = kd_rule(KClass(p - 1, X1), p)
        assert (d.page, d.v_power, d.generator) == (2 * p - 1, 0, Y)
        # l = 2, e = 1
        d = kd_rule(KClass(2 * p - 1, X1), p)
        assert (d.page, d.v_power) == (2 * p - 1, p)

    def test_permanent_cycles(self):
        assert kd_rule(KClass(0, X1), 3).page is None
        assert kd_rule(KClass(0, Y), 3).page is None

    def test_out_of_grid(self):
        with pytest.raises(ValueError):
            kd_rule(KClass(1, X1Y), 3)
        with pytest.raises(ValueError):
            kd_rule(KClass(-1), 3)


class TestWitness:
    @pytest.mark.parametrize("p,n", [(3, 3), (5, 10), (7, 7)])
    def test_all_k(self, p, n):
        for k in range(p + 1):
            w = td3_membership_witness(k, p, n)
            if k == p - 1:
                assert w.kind == "transgression" and w.target == Y
            else:
                assert w.kind == "boundary"
                T = Alphabet.torus(n)
                assert w.preimage == GP.variable(T, n - 1, k + 1).scale(Fraction(1, k + 1))

    def test_k_zero_preimage_is_vn(self):
        assert td3_membership_witness(0, 3, 4).preimage == GP.variable(Alphabet.torus(4), 3)

    def test_range(self):
        with pytest.raises(ValueError):
            td3_membership_witness(4, 3, 3)

    def test_witness_is_checked(self, monkeypatch):
        monkeypatch.setattr(specseq, "divergence_torus", lambda f: f)
        with pytest.raises(InvariantViolation):
            td3_membership_witness(0, 3, 3)


class TestDelta0:
    @pytest.mark.parametrize("p,n", [(3, 4), (3, 7), (5, 6), (5, 10)])
    def test_extra_generator_image(self, p, n):
        ch = Alphabet.chern(n)
        cp, cp1 = GP.variable(ch, p - 1), GP.variable(ch, p)
        c1 = GP.variable(ch, 0)
        got = delta0(c1 * cp - cp1, p, n)
        want = (c1 * GP.variable(ch, p - 2)).scale(n - p + 1) + cp.scale(p)
        assert got == want

    def test_examples(self):
        ch = Alphabet.chern(3)
        assert delta0(mono(3, c2=2), 3, 3) == GP.monomial(ch, mono(3, c1=1, c2=1), 4)
        assert delta0(mono(3, c1=4), 3, 3) == GP.monomial(ch, mono(3, c1=3), 12)

    def test_rejects(self):
        ch = Alphabet.chern(3)
        with pytest.raises(ValueError):
            delta0(GP.variable(ch, 0) + GP.variable(ch, 1), 3, 3)
        with pytest.raises(ValueError):
            delta0(mono(3, c1=1), 3, 3)


class TestDelta1:
    @pytest.mark.parametrize("p,n", [(3, 3), (3, 6), (3, 9), (3, 12), (5, 5), (5, 10), (7, 7)])
    def test_value_on_c_p(self, p, n):
        got = delta1(Alphabet.chern(n).unit_vector(p - 1), p, n)
        assert got == math.comb(n - 1, p - 1) % p != 0

    @pytest.mark.parametrize("p,n", [(3, 3), (3, 6), (3, 9), (3, 12), (5, 5), (5, 10)])
    def test_routes_agree(self, p, n):
        for m in chern_basis(n, 2 * p):
            values = {meth: delta1(m, p, n, method=meth) for meth in ("symmetric", "truncated", "full")}
            assert len(set(values.values())) == 1, values

    def test_examples(self):
        assert delta1(mono(3, c1=3), 3, 3) == 0
        assert delta1(mono(3, c3=1), 3, 3) == 1
        assert delta1(mono(3, c1=1, c2=1), 3, 3) == 0

    def test_p_not_dividing_n(self):
        assert delta1(mono(4, c3=1), 3, 4) == 0

    @pytest.mark.parametrize("p,n", [(13, 195), (7, 196), (11, 121)])
    def test_large_n(self, p, n):
        assert delta1(Alphabet.chern(n).unit_vector(p - 1), p, n) == math.comb(n - 1, p - 1) % p

    def test_asymmetric_image_raises(self):
        with pytest.raises(InvariantViolation):
            specseq._common_residue([1, 2], 3, "probe")

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            delta1(mono(3, c3=1), 3, 3, method="magic")


class TestDelta2:
    def test_values(self):
        assert delta2(3, 6) == 0
        assert delta2(5, 5) == 0
        assert delta2(3, 4) == 1


class TestSurvival:
    @pytest.mark.parametrize("p,n", [(3, 3), (5, 10), (7, 14), (3, 12)])
    def test_survives_when_p_divides_n(self, p, n):
        rep = ypo_survival(p, n)
        assert rep.survives and rep.group == "Z/p"
        item = [i for i in rep.incoming if i.get("reason") == "torus transfer"]
        assert len(item) == 1 and all(v["residue"] == 0 for v in item[0]["values"])

    @pytest.mark.parametrize("p,n", [(3, 4), (5, 6), (7, 10)])
    def test_killed_otherwise(self, p, n):
        assert not ypo_survival(p, n).survives

    def test_small_example(self):
        rep = ypo_survival(3, 3)
        values = [i for i in rep.incoming if i.get("reason") == "torus transfer"][0]["values"]
        assert {v["monomial"] for v in values} == {"c1^2", "c2"}

    @pytest.mark.parametrize("p,n", [(3, 3), (3, 4), (5, 6), (5, 10)])
    def test_constant_term_oracles(self, p, n):
        for m in chern_basis(n, 2 * p - 2):
            assert ypo_constant_term_full(m, p, n) == binomial_value(m, n) % p
