import itertools
from fractions import Fraction

import pytest

from errors import InvalidInput
from group_core import ElementSet, dihedral_group, make_group, quaternion_group, symmetric_group
from setcalc import power_set
from structure_detect import (
    commensurable,
    dense_generation,
    dense_generation_bound,
    dense_generation_sweep,
    detect_small_doubling,
    detect_unit_doubling,
    enumerate_subgroups,
    freiman_sweep,
    hamidoune_cover,
    hamidoune_family,
    hamidoune_sweep,
    lemma211_sweep,
    parallel_map,
    ruzsa_cover_sweep,
    ruzsa_triangle_sweep,
    schreier_index,
    schreier_sweep,
    small_tripling_sweep,
    strong_approx_battery,
    strong_approx_check,
    unit_doubling_sweep,
)


def whole(G):
    return ElementSet(G, G.elements())


def is_odd(perm):
    return sum(1 for i, j in itertools.combinations(range(len(perm)), 2) if perm[i] > perm[j]) % 2 == 1


class TestCosetDetectors:
    def test_coset_is_recovered(self, cyclic):
        G = cyclic(12)
        found = detect_unit_doubling(ElementSet.from_literals(G, [1, 5, 9]))
        assert found.H.literals() == [0, 4, 8]
        assert found.a == (1,)
        assert found.left and found.right and found.normalizes

    def test_no_structure_without_unit_doubling(self, cyclic):
        assert detect_unit_doubling(ElementSet.from_literals(cyclic(12), [0, 1])) is None

    def test_small_doubling_inside_a_coset(self, cyclic):
        G = cyclic(12)
        found = detect_small_doubling(ElementSet.from_literals(G, [0, 2, 4, 6, 8]))
        assert found.H.literals() == [0, 2, 4, 6, 8, 10]
        assert found.contained
        assert not found.left

    def test_small_doubling_threshold_range(self, cyclic):
        A = ElementSet.from_literals(cyclic(12), [0])
        with pytest.raises(InvalidInput):
            detect_small_doubling(A, threshold=Fraction(2))

    def test_large_doubling_returns_none(self, integers):
        assert detect_small_doubling(ElementSet.from_literals(integers, [0, 1, 2])) is None


class TestSubgroups:
    @pytest.mark.parametrize(
        "build, count",
        [
            (lambda: make_group(symmetric_group(3)), 6),
            (lambda: make_group(quaternion_group()), 6),
            (lambda: make_group(dihedral_group(4)), 10),
        ],
    )
    def test_subgroup_counts(self, build, count):
        G = build()
        subgroups = enumerate_subgroups(G, whole(G))
        assert len(subgroups) == count
        assert all(H.is_subgroup() for H in subgroups)
        assert [len(H) for H in subgroups] == sorted(len(H) for H in subgroups)

    def test_cyclic_subgroups_match_divisors(self, cyclic):
        G = cyclic(12)
        sizes = [len(H) for H in enumerate_subgroups(G, whole(G))]
        assert sizes == [1, 2, 3, 4, 6, 12]

    def test_hamidoune_cover(self, cyclic):
        cover = hamidoune_cover(ElementSet.from_literals(cyclic(4), [0, 1]))
        assert cover.H.literals() == [0]
        assert cover.bound == 2
        assert cover.cosets == 2

    def test_hamidoune_needs_doubling_below_two(self, cyclic):
        with pytest.raises(InvalidInput):
            hamidoune_cover(ElementSet.from_literals(cyclic(10), [0, 1, 3]))

    def test_schreier_index(self, cyclic):
        G = cyclic(12)
        S = ElementSet.from_literals(G, [0, 1, 11])
        H = ElementSet.from_literals(G, [0, 4, 8])
        report = schreier_index(G, S, H, k=5, C=5)
        assert report.values["index"] == 4
        assert report.values["overlap"] == 3
        assert report.values["hypothesis"] is True
        assert report.checks == {"index_bound": True}

    def test_hamidoune_counts_left_cosets(self):
        G = make_group(symmetric_group(3))
        subgroups = enumerate_subgroups(G, whole(G))
        for mask in range(1, 1 << 6):
            A = ElementSet(G, [g for i, g in enumerate(G.elements()) if mask >> i & 1])
            if 2 * len(A) <= len(power_set(A, 2)):
                continue
            cover = hamidoune_cover(A, subgroups)
            left = {frozenset(G.mul(a, h) for h in cover.H) for a in A}
            assert cover.cosets == len(left) <= cover.bound
            assert len(cover.H) <= len(A)

    @pytest.mark.parametrize("k, overlap, hypothesis", [(3, 0, False), (2, 3, True)])
    def test_schreier_without_identity(self, k, overlap, hypothesis):
        G = make_group(symmetric_group(3))
        transpositions = ElementSet.from_literals(G, [[1, 0, 2], [2, 1, 0], [0, 2, 1]])
        alternating = ElementSet.from_literals(G, [[0, 1, 2], [1, 2, 0], [2, 0, 1]])
        report = schreier_index(G, transpositions, alternating, k=k, C=2)
        assert report.values["index"] == 2
        assert report.values["overlap"] == overlap
        assert report.values["hypothesis"] is hypothesis
        assert report.checks == {"index_bound": True}

    def test_schreier_rejects_non_subgroup(self, cyclic):
        G = cyclic(12)
        S = ElementSet.from_literals(G, [0, 1, 11])
        with pytest.raises(InvalidInput):
            schreier_index(G, S, ElementSet.from_literals(G, [0, 1]), k=1, C=1)

    def test_commensurable(self, integers):
        A = ElementSet.from_literals(integers, [0, 1, 2])
        B = ElementSet.from_literals(integers, [1, 2, 3])
        assert commensurable(A, B, 2)
        assert not commensurable(A, B, 1)


class TestDenseGeneration:
    def test_bound(self):
        assert dense_generation_bound(Fraction(1)) == (0, 2)
        assert dense_generation_bound(Fraction(1, 2)) == (6, 128)

    def test_interval_in_cyclic_group(self, cyclic):
        G = cyclic(100)
        S = ElementSet.from_literals(G, range(-13, 14))
        report = dense_generation(G, S, Fraction(1, 4))
        assert report.values["n"] == 4
        assert report.checks["within_bound"]

    def test_identity_is_not_required(self, cyclic):
        G = cyclic(5)
        report = dense_generation(G, ElementSet.from_literals(G, [1, 4]), Fraction(2, 5))
        assert report.values["n"] == 4
        assert report.values["bound"] == 512

    def test_odd_permutations_never_cover(self):
        G = make_group(symmetric_group(5))
        odd = ElementSet(G, [g for g in G.elements() if is_odd(g)])
        assert len(odd) == 60
        with pytest.raises(InvalidInput, match="repeat"):
            dense_generation(G, odd, Fraction(1, 2))

    def test_more_than_half_of_s5_covers_in_two_steps(self):
        G = make_group(symmetric_group(5))
        S = ElementSet(G, [g for g in G.elements() if is_odd(g)] + [(1, 2, 0, 3, 4), (2, 0, 1, 3, 4)])
        assert len(S) == 62 and not S.contains_identity()
        report = dense_generation(G, S, Fraction(1, 2))
        assert report.values["n"] == 2

    def test_sparse_set_rejected(self, cyclic):
        G = cyclic(100)
        with pytest.raises(InvalidInput):
            dense_generation(G, ElementSet.from_literals(G, [-1, 0, 1]), Fraction(1, 2))


class TestStrongApproximation:
    def test_subgroup_satisfies_both_axioms(self, cyclic):
        H = ElementSet.from_literals(cyclic(6), [0, 2, 4])
        report = strong_approx_check(H, H, 1)
        assert report.values["axiom1"] is True
        assert report.values["axiom2"] is True
        assert report.values["N"] == 10 ** 6

    def test_generator_set_must_lie_in_A(self, cyclic):
        G = cyclic(6)
        H = ElementSet.from_literals(G, [0, 2, 4])
        with pytest.raises(InvalidInput):
            strong_approx_check(H, ElementSet.from_literals(G, [0, 1, 5]), 1)

    def test_battery(self):
        report = strong_approx_battery()
        assert report.values["violations"] == 0
        assert report.values["cases"] == len(report.table)


class TestSweeps:
    def test_parallel_map_keeps_order(self):
        assert parallel_map(lambda x: x * x, list(range(20)), threads=4) == [x * x for x in range(20)]

    def test_unit_doubling_sweep(self):
        report = unit_doubling_sweep(max_order=6)
        assert report.values["groups"] == 7
        assert report.values["subsets"] == 183

    def test_exhaustive_sweeps(self):
        assert freiman_sweep(max_order=6).values["violations"] == 0

    def test_hamidoune_sweep_passes(self):
        report = hamidoune_sweep(max_order=6, span_order=16, trials=40, random_order=64, seed=1)
        assert report.values["violations"] == 0
        # cyclic 1..6 and S3, then eight groups of order 16..64
        assert report.values["groups"] == 15
        passes = {row["pass"] for row in report.table}
        assert passes == {"exhaustive", "small-sets", "random"}
        random_rows = [row for row in report.table if row["pass"] == "random"]
        assert sum(row["sets"] for row in random_rows) == 40
        assert report.values["covered"] > 0

    def test_hamidoune_family_orders(self):
        orders = [G.order for _, G in hamidoune_family(512)]
        assert max(orders) == 512
        assert [name for name, _ in hamidoune_family(24)] == ["cyclic:16", "dihedral:8", "symmetric:4"]

    def test_randomized_sweeps(self):
        assert schreier_sweep(trials=20).values["trials"] == 20
        assert small_tripling_sweep(trials=30).values["violations"] == 0
        assert ruzsa_cover_sweep(trials=20).values["violations"] == 0
        assert lemma211_sweep(trials=10).values["violations"] == 0

    def test_dense_generation_sweep_includes_s5(self):
        report = dense_generation_sweep(max_n=12)
        # 36 cyclic cases, six identity-free S5 sets and the odd permutations
        assert report.values["cases"] == 43
        assert report.values["uncovered"] >= 1
        assert report.values["violations"] == 0

    def test_triangle_sweep_is_reproducible(self):
        first = ruzsa_triangle_sweep(trials=50, seed=3)
        again = ruzsa_triangle_sweep(trials=50, seed=3, threads=4)
        assert first.values == again.values
        assert first.values["min_slack"] >= 1
