from fractions import Fraction

import pytest

from errors import CapExceeded, InvalidInput
from group_core import INFINITE, ElementSet, GroupSpec, make_group
from setcalc import (
    approx_constant,
    doubling_report,
    escape_norm,
    escape_norm_report,
    lemma210_witness,
    lemma211_witness,
    power_set,
    product_set,
    ruzsa_cover,
    ruzsa_distance,
    sumproduct_stats,
    symmetrize,
    symmetrized_square_report,
    triangle_slack,
)


def interval(G, lo, hi):
    return ElementSet.from_literals(G, range(lo, hi + 1))


class TestProducts:
    def test_sumset_of_interval(self, integers):
        A = interval(integers, 0, 1)
        assert product_set(A, A).literals() == [0, 1, 2]

    def test_nonabelian_product_order(self, s4):
        a, b = s4.standard_generators()
        AB = product_set(ElementSet(s4, [a]), ElementSet(s4, [b]))
        BA = product_set(ElementSet(s4, [b]), ElementSet(s4, [a]))
        assert AB.sorted() == (s4.mul(a, b),)
        assert AB != BA

    def test_group_mismatch(self, cyclic):
        with pytest.raises(InvalidInput):
            product_set(interval(cyclic(6), 0, 1), interval(cyclic(7), 0, 1))

    def test_result_cap(self, integers):
        A = interval(integers, 0, 1)
        with pytest.raises(CapExceeded):
            product_set(A, A, cap=2)

    def test_powers_are_memoized(self, integers):
        A = interval(integers, -1, 1)
        A3 = power_set(A, 3)
        assert len(A3) == 7
        assert set(A.power_cache) == {2, 3}
        assert power_set(A, 3) is A3
        with pytest.raises(InvalidInput):
            power_set(A, 0)

    def test_symmetrize(self, cyclic):
        G = cyclic(10)
        assert symmetrize(ElementSet.from_literals(G, [3])).literals() == [0, 3, 7]


class TestDoubling:
    def test_interval_growth(self, integers):
        report = doubling_report(interval(integers, -5, 5), n_max=4)
        assert [row["size"] for row in report.table] == [11, 21, 31, 41]
        assert report.values["doubling"] == Fraction(21, 11)
        assert report.values["tripling"] == Fraction(31, 11)
        assert report.checks == {"small_tripling": True, "plunnecke": True}

    def test_nonabelian_has_no_plunnecke_check(self, s4):
        A = symmetrize(ElementSet(s4, s4.standard_generators()))
        report = doubling_report(A)
        assert "plunnecke" not in report.checks
        assert report.table[-1]["n"] == 3

    def test_subgroup_has_doubling_one(self, cyclic):
        G = cyclic(12)
        report = doubling_report(ElementSet.from_literals(G, [0, 4, 8]))
        assert report.values["doubling"] == 1


class TestRuzsa:
    def test_distance_value(self, integers):
        value = ruzsa_distance(interval(integers, 0, 1), ElementSet.from_literals(integers, [0, 2]))
        assert value.ratio == 4
        assert (value.numerator, value.denominator) == (16, 4)

    def test_distance_to_itself_of_subgroup_is_zero(self, cyclic):
        H = ElementSet.from_literals(cyclic(12), [0, 3, 6, 9])
        assert ruzsa_distance(H, H).ratio == 1
        assert ruzsa_distance(H, H).distance == 0

    def test_triangle_slack(self, integers):
        A = ElementSet.from_literals(integers, [0])
        B = interval(integers, 0, 1)
        assert triangle_slack(A, B, A) == 4

    def test_triangle_slack_in_heisenberg(self, heisenberg, rng):
        box = [(x, y, z) for x in range(-1, 2) for y in range(-1, 2) for z in range(-1, 2)]
        for _ in range(20):
            sets = [ElementSet(heisenberg, rng.sample(box, rng.randint(1, 5))) for _ in range(3)]
            assert triangle_slack(*sets) >= 1

    def test_empty_sets_rejected(self, integers):
        with pytest.raises(InvalidInput):
            triangle_slack(ElementSet(integers, []), interval(integers, 0, 1), interval(integers, 0, 1))

    def test_cover(self, integers):
        witness = ruzsa_cover(interval(integers, -10, 10), interval(integers, -5, 5))
        assert witness.X.literals() == [-10, 1]
        assert witness.bound == Fraction(31, 11)


class TestApproximateGroups:
    def test_interval_constant(self, integers):
        result = approx_constant(interval(integers, -5, 5), exact=True)
        assert result.k_greedy == 2
        assert result.k_exact == 2
        assert result.witness.X.literals() == [-5, 6]

    def test_subgroup_constant_is_one(self, cyclic):
        G = cyclic(12)
        assert approx_constant(ElementSet.from_literals(G, [0, 4, 8])).k_greedy == 1

    def test_requires_symmetric_with_identity(self, integers):
        with pytest.raises(InvalidInput):
            approx_constant(interval(integers, 0, 2))
        with pytest.raises(InvalidInput):
            approx_constant(ElementSet.from_literals(integers, [-1, 1]))

    def test_exact_cap(self, integers, monkeypatch):
        import config

        monkeypatch.setattr(config, "EXACT_COVER_MAX_CANDIDATES", 4)
        with pytest.raises(CapExceeded):
            approx_constant(interval(integers, -5, 5), exact=True)

    def test_lemma210(self, integers):
        witness = lemma210_witness(interval(integers, -1, 1))
        assert witness.X.literals() == [-4, -1, 2]
        assert witness.bound == Fraction(11, 3)
        assert witness.covered == "A^4"

    def test_lemma211(self, cyclic):
        G = cyclic(30)
        A = interval(G, -3, 3)
        B = interval(G, -2, 2)
        X_A = approx_constant(A).witness.X
        Y_B = approx_constant(B).witness.X
        witness = lemma211_witness(A, X_A, B, Y_B)
        assert len(witness.X) <= len(X_A) ** 3 * len(Y_B) ** 3

    def test_lemma211_rejects_bad_witness(self, cyclic):
        G = cyclic(30)
        A = interval(G, -3, 3)
        with pytest.raises(InvalidInput):
            lemma211_witness(A, ElementSet.from_literals(G, [0]), A, ElementSet.from_literals(G, [0]))

    def test_symmetrized_square(self, integers):
        report = symmetrized_square_report(interval(integers, 0, 3))
        assert report.values["square_size"] == 13
        assert report.values["tripling"] == Fraction(10, 4)
        assert report.values["k_greedy"] == 2


class TestEscapeNorm:
    def test_norm_values(self, integers):
        A = interval(integers, -3, 3)
        assert escape_norm(A, (1,)) == Fraction(1, 3)
        assert escape_norm(A, (3,)) == 1
        assert escape_norm(A, (0,)) == 0
        assert escape_norm(A, (5,)) == INFINITE

    def test_whole_cyclic_group_has_zero_norm(self, cyclic):
        G = cyclic(6)
        A = interval(G, 0, 5)
        assert escape_norm(A, (1,)) == 0

    def test_report_finds_zero_norm_subgroup(self, cyclic):
        G = cyclic(12)
        A = ElementSet.from_literals(G, [0, 1, 11, 4, 8])
        report = escape_norm_report(A)
        assert report.values["zero_norm_set"].literals() == [0, 4, 8]
        assert report.values["zero_norm_normal_subgroup"] is True
        assert len(report.table) == 5


class TestSumProduct:
    def test_geometric_progression(self):
        report = sumproduct_stats(13, [1, 2, 4, 8])
        assert report.values["productset"] == 7
        assert report.values["sumset"] == 9

    def test_minimizer(self):
        report = sumproduct_stats(5, [1, 2], minimizer_size=1)
        assert report.values["minimizer_growth"] == 1
        assert report.values["minimizer"] == [0]

    def test_invalid_inputs(self):
        with pytest.raises(InvalidInput):
            sumproduct_stats(12, [1])
        with pytest.raises(InvalidInput):
            sumproduct_stats(13, [13])
        with pytest.raises(InvalidInput):
            sumproduct_stats(17, [1], minimizer_size=2)

    def test_fp_ring_spec_rejected_by_group_layer(self):
        with pytest.raises(InvalidInput):
            make_group(GroupSpec(kind="fp-ring", param=13))
