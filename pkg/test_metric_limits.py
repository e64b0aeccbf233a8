from fractions import Fraction

import numpy as np
import pytest

from cayley import CayleyGraph, default_generators
from errors import InvalidInput, PropertyViolation
from group_core import ElementSet, GroupSpec, make_group
from metric_limits import (
    Correspondence,
    FiniteMetricSpace,
    TorusModel,
    abelian_chart,
    covering_number,
    covering_table,
    fitted_torus,
    gh_bounds,
    norm_extract,
    rescaled_space,
    torus_limit_report,
)


def cycle_space(n):
    G = make_group(GroupSpec(kind="cyclic", param=n))
    return rescaled_space(CayleyGraph(G, default_generators(G)))


class TestFiniteMetricSpace:
    def test_rescaled_cycle(self):
        X = cycle_space(8)
        assert X.exact
        assert X.distance(0, 1) == Fraction(1, 4)
        assert X.diameter() == 1
        assert X.info["condition"][1] == 1
        assert X.info["condition"][2] == Fraction(1, 4)

    def test_grid_condition(self):
        factor = GroupSpec(kind="cyclic", param=8)
        G = make_group(GroupSpec(kind="direct-product", factors=(factor, factor)))
        X = rescaled_space(CayleyGraph(G, default_generators(G)))
        assert X.info["condition"][2] == Fraction(1, 4)

    def test_triangle_violation(self):
        with pytest.raises(PropertyViolation) as info:
            FiniteMetricSpace(["a", "b", "c"], np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]]), denominator=1)
        assert info.value.witness["k"] == 1

    def test_asymmetric_matrix(self):
        with pytest.raises(PropertyViolation):
            FiniteMetricSpace(["a", "b"], np.array([[0.0, 1.0], [2.0, 0.0]]))

    def test_shape_mismatch(self):
        with pytest.raises(InvalidInput):
            FiniteMetricSpace(["a"], np.zeros((2, 2)))


class TestCovering:
    def test_cycle_cover(self):
        X = cycle_space(64)
        assert covering_number(X, Fraction(1, 4)) == 4
        rows = covering_table(X, [Fraction(1, 4)])
        assert rows == [{"eps": Fraction(1, 4), "cover": 4, "cover_double": 2, "ratio": Fraction(2)}]

    def test_whole_space_in_one_ball(self):
        assert covering_number(cycle_space(10), 1) == 1

    def test_positive_radius(self):
        with pytest.raises(InvalidInput):
            covering_number(cycle_space(10), 0)

    @pytest.mark.parametrize("seed", range(6))
    def test_cover_never_grows_with_radius(self, seed):
        rng = np.random.default_rng(seed)
        cells = rng.choice(144, size=30, replace=False)
        points = np.stack([cells // 12, cells % 12], axis=1)
        matrix = np.abs(points[:, None, :] - points[None, :, :]).sum(axis=2)
        X = FiniteMetricSpace(list(range(30)), matrix, denominator=1)
        top = int(matrix.max())
        counts = [covering_number(X, r) for r in range(1, top + 1)]
        assert all(a >= b for a, b in zip(counts, counts[1:]))
        assert counts[-1] == 1
        for row in covering_table(X, range(1, top + 1)):
            assert row["ratio"] >= 1


class TestTorus:
    def test_diameter_normalization(self):
        l1 = TorusModel(2, "l1")
        l2 = TorusModel(2, "l2")
        assert float(l1.distance(np.zeros(2), np.array([0.5, 0.5]))) == pytest.approx(1.0)
        assert float(l2.distance(np.zeros(2), np.array([0.5, 0.5]))) == pytest.approx(1.0)
        assert float(l1.distance(np.zeros(2), np.array([0.25, 0.0]))) == pytest.approx(0.25)
        assert float(l1.distance(np.zeros(2), np.array([0.9, 0.0]))) == pytest.approx(0.1)

    def test_polyhedral_norm(self):
        torus = TorusModel.from_json({"q": 2, "norm": {"functionals": [[1, 0], [0, 1]]}})
        assert torus.norm_name == "polyhedral"
        assert float(torus.distance(np.zeros(2), np.array([0.25, 0.5]))) == pytest.approx(1.0)
        assert torus.to_dict()["norm"] == {"functionals": [[1.0, 0.0], [0.0, 1.0]]}

    def test_rejects_degenerate_functionals(self):
        with pytest.raises(InvalidInput):
            TorusModel(2, [[1, 0]])
        with pytest.raises(InvalidInput):
            TorusModel.from_json({"q": 2, "norm": "l1", "scale": 3})
        with pytest.raises(InvalidInput):
            TorusModel(2, "l3")

    def test_discretization_error(self):
        assert TorusModel(2, "l1").discretization_error(4) == pytest.approx(0.25)


class TestGromovHausdorff:
    def test_identity_correspondence(self):
        X = cycle_space(6)
        bounds = gh_bounds(X, X, Correspondence.identity(len(X)))
        assert bounds.upper == 0
        assert bounds.lower == 0

    def test_finite_bounds_meet(self):
        X = cycle_space(4)
        Y = FiniteMetricSpace(range(4), np.ones((4, 4)) - np.eye(4))
        bounds = gh_bounds(X, Y, Correspondence.identity(4))
        assert bounds.upper == pytest.approx(0.25)
        assert bounds.lower == pytest.approx(0.25)

    def test_missing_correspondence(self):
        X = cycle_space(4)
        with pytest.raises(InvalidInput):
            gh_bounds(X, X)
        with pytest.raises(InvalidInput):
            Correspondence([(0, 0)], 2, 1)

    def test_cycle_against_circle(self):
        for n in (8, 16, 32):
            bounds = gh_bounds(cycle_space(n), TorusModel(1, "l1"))
            assert bounds.lower <= bounds.upper <= 2 / n

    def test_no_chart_for_symmetric_group(self, s4):
        X = rescaled_space(CayleyGraph(s4, default_generators(s4)))
        with pytest.raises(InvalidInput):
            gh_bounds(X, TorusModel(2, "l1"))
        with pytest.raises(InvalidInput):
            abelian_chart(s4)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInput):
            gh_bounds(cycle_space(8), TorusModel(2, "l1"))


class TestLimitNorms:
    def test_axis_generators_give_l1(self, lattice2):
        report = norm_extract(lattice2, default_generators(lattice2), [(1, 0), (1, 1), (2, 1)], [2, 4])
        assert report.values["estimates"] == {"[1, 0]": 1, "[1, 1]": 2, "[2, 1]": 3}
        assert report.checks == {"homogeneous": True, "subadditive": True}
        assert len(report.table) == 6

    def test_king_moves_give_linf(self, lattice2):
        S = ElementSet(lattice2, [(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1) if (a, b) != (0, 0)])
        report = norm_extract(lattice2, S, [(1, 1), (2, 1)], [4])
        assert report.values["estimates"] == {"[1, 1]": 1, "[2, 1]": 2}

    def test_validation(self, lattice2, cyclic):
        G = cyclic(6)
        with pytest.raises(InvalidInput):
            norm_extract(G, default_generators(G), [(1,)], [1])
        with pytest.raises(InvalidInput):
            norm_extract(lattice2, default_generators(lattice2), [(1, 0)], [4, 2])

    def test_fitted_torus_is_l1_for_axis_generators(self, lattice2, integers):
        torus = fitted_torus(lattice2, default_generators(lattice2))
        assert torus.norm_name == "polyhedral"
        points = np.array([[0.1, 0.2], [0.5, 0.5], [0.3, -0.4]])
        expected = TorusModel(2, "l1").distance(np.zeros(2), points)
        assert np.allclose(torus.distance(np.zeros(2), points), expected)
        assert fitted_torus(integers, default_generators(integers)).norm_name == "l1"


class TestLimitReport:
    def test_cycle_family(self):
        report = torus_limit_report("cycle", [8, 16, 32])
        assert [row["order"] for row in report.table] == [8, 16, 32]
        assert report.checks["upper_decreasing"]
        assert all(row["gh_upper"] <= 2 / row["size"] for row in report.table)
        assert report.table[0]["condition"] == 1

    def test_grid_family(self):
        report = torus_limit_report("grid", [8, 16, 32])
        assert report.checks["upper_decreasing"]
        assert report.table[-1]["gh_upper"] <= 0.1
        assert all(row["condition"] == Fraction(1, 4) for row in report.table)

    def test_grid_family_up_to_64_within_envelope(self):
        envelope = {8: 0.125, 16: 0.0625, 32: 0.03125, 64: 0.015625}
        report = torus_limit_report("grid", [8, 16, 32, 64], envelope=envelope)
        uppers = [row["gh_upper"] for row in report.table]
        assert report.checks["upper_decreasing"]
        assert all(a > b for a, b in zip(uppers, uppers[1:]))
        assert uppers[-1] <= 0.1

    def test_large_cycles_within_two_over_n(self):
        report = torus_limit_report("cycle", [16, 64, 256])
        assert [row["order"] for row in report.table] == [16, 64, 256]
        assert all(row["gh_upper"] <= 2 / row["size"] for row in report.table)
        assert report.checks["upper_decreasing"]

    def test_heisenberg_family(self):
        report = torus_limit_report("heisenberg-mod", [3, 4])
        assert [row["order"] for row in report.table] == [27, 64]
        assert all(row["gh_lower"] <= row["gh_upper"] for row in report.table)

    def test_envelope_violation(self):
        with pytest.raises(PropertyViolation):
            torus_limit_report("cycle", [8], envelope={8: 0.0})

    def test_unknown_family(self):
        with pytest.raises(InvalidInput):
            torus_limit_report("tree", [8])
