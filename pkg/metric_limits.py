"""
Scaling limits of Cayley graphs
Rescaled word metrics, covering numbers, Gromov-Hausdorff bounds against
flat Finsler tori and extraction of limit norms on lattices.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull

import config
from cayley import CayleyGraph, cyclic_coordinates, cyclic_sides, default_generators, word_distance
from errors import InvalidInput, check, ensure_cap, require
from group_core import ElementSet, GroupHandle, GroupSpec, MatrixGroup, heisenberg_mod, make_group
from reports import Report

logger = logging.getLogger(__name__)

Number = Union[Fraction, float]


# ---------------------------------------------------------------------------
# Finite metric spaces
# ---------------------------------------------------------------------------

class FiniteMetricSpace:
    """
    Points with a distance matrix

    Exact spaces store integer numerators over a common denominator;
    floating spaces store the distances themselves.
    """

    def __init__(self, labels: Sequence[Any], matrix: np.ndarray, denominator: Optional[int] = None, verify: bool = True):
        matrix = np.asarray(matrix)
        require(matrix.ndim == 2 and matrix.shape[0] == matrix.shape[1] == len(labels), "distance matrix must be square with one row per point")
        if denominator is not None:
            require(denominator >= 1, "denominator must be positive")
        self.labels = list(labels)
        self.matrix = matrix
        self.denominator = denominator
        self.info: Dict[str, Any] = {}
        if verify:
            self.check_metric()

    @property
    def exact(self) -> bool:
        return self.denominator is not None

    def __len__(self) -> int:
        return len(self.labels)

    def distance(self, i: int, j: int) -> Number:
        if self.exact:
            return Fraction(int(self.matrix[i, j]), self.denominator)
        return float(self.matrix[i, j])

    def as_float(self) -> np.ndarray:
        if self.exact:
            return self.matrix.astype(float) / self.denominator
        return self.matrix.astype(float)

    def diameter(self) -> Number:
        if self.exact:
            return Fraction(int(self.matrix.max()), self.denominator)
        return float(self.matrix.max())

    def check_metric(self, seed: Optional[int] = None) -> None:
        """Zero diagonal, symmetry and the triangle inequality (all triples up to TRIANGLE_EXHAUSTIVE_MAX points)"""
        M = self.matrix
        slack = 0 if self.exact else 1e-12
        check(bool(np.all(np.diag(M) == 0)), "distance matrix has a nonzero diagonal entry")
        check(bool(np.all(M == M.T)) if self.exact else bool(np.allclose(M, M.T, atol=slack)), "distance matrix is not symmetric")
        check(bool(np.all(M >= 0)), "distance matrix has a negative entry")
        n = len(self)
        if n <= config.TRIANGLE_EXHAUSTIVE_MAX:
            for k in range(n):
                through = M[:, k][:, None] + M[k, :][None, :]
                bad = np.argwhere(M > through + slack)
                if len(bad):
                    i, j = bad[0]
                    check(False, "triangle inequality violated", i=int(i), j=int(j), k=k)
            return
        rng = np.random.default_rng(config.DEFAULT_SEED if seed is None else seed)
        triples = rng.integers(0, n, size=(config.TRIANGLE_SAMPLES, 3))
        i, j, k = triples[:, 0], triples[:, 1], triples[:, 2]
        bad = np.nonzero(M[i, j] > M[i, k] + M[k, j] + slack)[0]
        if len(bad):
            t = bad[0]
            check(False, "triangle inequality violated", i=int(i[t]), j=int(j[t]), k=int(k[t]))


@dataclass
class Correspondence:
    """Relation between the points of two spaces, total on both sides"""

    pairs: List[Tuple[int, int]]
    left_size: int
    right_size: int

    def __post_init__(self):
        left = {i for i, _ in self.pairs}
        right = {j for _, j in self.pairs}
        require(left == set(range(self.left_size)), "correspondence misses points of the first space")
        require(right == set(range(self.right_size)), "correspondence misses points of the second space")

    @classmethod
    def identity(cls, n: int) -> "Correspondence":
        return cls([(i, i) for i in range(n)], n, n)


# ---------------------------------------------------------------------------
# Tori
# ---------------------------------------------------------------------------

class TorusModel:
    """
    R^q / Z^q with the quotient distance of a norm, scaled to diameter 1

    norm is "l1", "l2", "linf" or a list of linear functionals f_j defining
    the polyhedral norm max_j |<f_j, v>|.
    """

    P_NORMS = {"l1": 1, "l2": 2, "linf": np.inf}

    def __init__(self, q: int, norm: Union[str, Sequence[Sequence[float]]] = "l1"):
        require(isinstance(q, int) and q >= 1, "torus dimension must be a positive integer")
        self.q = q
        if isinstance(norm, str):
            require(norm in self.P_NORMS, f"unknown torus norm {norm!r}")
            self.functionals = None
        else:
            functionals = np.asarray(norm, dtype=float)
            require(functionals.ndim == 2 and functionals.shape[1] == q and len(functionals) > 0, "functionals must be a nonempty list of q-vectors")
            require(np.linalg.matrix_rank(functionals) == q, "functionals do not define a norm (not positive-definite)")
            self.functionals = functionals
        self.norm_name = norm if isinstance(norm, str) else "polyhedral"
        self.scale = 1.0
        self.scale = 1.0 / self._raw_diameter()
        self._check_norm()

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "TorusModel":
        require(isinstance(data, dict) and "q" in data and "norm" in data, "torus model needs fields 'q' and 'norm'")
        for name in data:
            if name not in ("q", "norm"):
                raise InvalidInput(f"torus model field '{name}' is not accepted", {"field": name})
        norm = data["norm"]
        if isinstance(norm, dict):
            norm = norm.get("functionals")
        return cls(data["q"], norm)

    def to_dict(self) -> Dict[str, Any]:
        norm = self.norm_name if self.functionals is None else {"functionals": self.functionals.tolist()}
        return {"q": self.q, "norm": norm, "scale": self.scale}

    def norm(self, v: np.ndarray) -> np.ndarray:
        """Unscaled norm along the last axis"""
        if self.functionals is not None:
            return np.max(np.abs(v @ self.functionals.T), axis=-1)
        return np.linalg.norm(v, ord=self.P_NORMS[self.norm_name], axis=-1)

    def distance(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Quotient distance, broadcasting over leading axes, scaled to diameter 1"""
        diff = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
        diff = diff - np.floor(diff + 0.5)
        best = None
        for shift in itertools.product((-1.0, 0.0, 1.0), repeat=self.q):
            value = self.norm(diff + np.array(shift))
            best = value if best is None else np.minimum(best, value)
        return best * self.scale

    def _raw_diameter(self) -> float:
        if self.functionals is None:
            return float(self.norm(np.full(self.q, 0.5)))
        ticks = np.arange(0, 64) / 64
        grid = np.array(list(itertools.product(ticks, repeat=self.q)))
        return float(np.max(self.distance(np.zeros(self.q), grid)))

    def _check_norm(self, samples: int = 256) -> None:
        rng = np.random.default_rng(config.DEFAULT_SEED)
        v = rng.normal(size=(samples, self.q))
        w = rng.normal(size=(samples, self.q))
        nv, nw = self.norm(v), self.norm(w)
        check(bool(np.all(nv > 0)), "torus norm is not positive-definite")
        check(bool(np.allclose(self.norm(2.5 * v), 2.5 * nv)), "torus norm is not homogeneous")
        check(bool(np.all(self.norm(v + w) <= nv + nw + config.NORM_TOLERANCE)), "torus norm is not convex")

    def discretization_error(self, resolution: int) -> float:
        """Every torus point lies this close to the grid (1/resolution) Z^q"""
        half = 0.5 / resolution
        return float(sum(self.norm(half * np.eye(self.q)[i]) for i in range(self.q))) * self.scale


# ---------------------------------------------------------------------------
# Rescaled Cayley graphs
# ---------------------------------------------------------------------------

def rescaled_space(X: CayleyGraph) -> FiniteMetricSpace:
    """
    Word metric divided by the diameter, as an exact space of diameter 1

    The size-versus-diameter condition |X|/deg <= C diam^d is evaluated for
    d = 1, 2, 3 and stored in info["condition"] as the least such C.
    """
    require(X.diameter >= 1, "rescaling needs a graph with at least two vertices")
    matrix = X.distance_matrix().astype(np.int32)
    space = FiniteMetricSpace(X.elements, matrix, denominator=X.diameter)
    check(space.diameter() == 1, "rescaled space does not have diameter 1")
    degree = len(X.S) - (1 if X.has_identity else 0)
    ratio = Fraction(X.order, degree)
    space.info["graph"] = X
    space.info["condition"] = {d: ratio / X.diameter ** d for d in (1, 2, 3)}
    return space


def _greedy_cover(balls: np.ndarray) -> int:
    """Greedy maximum coverage over a boolean ball matrix, ties to the lowest index"""
    uncovered = np.ones(len(balls), dtype=bool)
    count = 0
    while uncovered.any():
        gains = balls[:, uncovered].sum(axis=1)
        center = int(np.argmax(gains))
        uncovered &= ~balls[center]
        count += 1
    return count


def covering_number(X: FiniteMetricSpace, eps) -> int:
    """
    Upper bound on N(X, eps): the fewest closed balls found by greedy maximum
    coverage at any radius r <= eps, r running over the distances of X

    A cover by r-balls is a cover by eps-balls, so the value never increases
    with eps. Radii whose largest ball cannot beat the best count so far
    (ceil(|X| / max ball) >= best) are skipped. Greedy counts are memoized
    in X.info["greedy_covers"].
    """
    require(eps > 0, "eps must be positive")
    if X.exact:
        eps = Fraction(eps)
        limit = eps.numerator * X.denominator // eps.denominator
    else:
        limit = float(eps)
    radii = np.unique(X.matrix[X.matrix <= limit])[::-1]
    memo = X.info.setdefault("greedy_covers", {})
    n = len(X)
    best = n
    for r in radii.tolist():
        balls = X.matrix <= r
        if -(-n // int(balls.sum(axis=1).max())) >= best:
            break
        if r not in memo:
            memo[r] = _greedy_cover(balls)
        best = min(best, memo[r])
    return best


def covering_table(X: FiniteMetricSpace, radii: Sequence) -> List[Dict[str, Any]]:
    """N(r) for each radius and the doubling ratio N(r)/N(2r)"""
    rows = []
    for r in radii:
        small = covering_number(X, r)
        large = covering_number(X, 2 * Fraction(r) if X.exact else 2 * r)
        rows.append({"eps": r, "cover": small, "cover_double": large, "ratio": Fraction(small, large)})
    return rows


# ---------------------------------------------------------------------------
# Gromov-Hausdorff bounds
# ---------------------------------------------------------------------------

@dataclass
class GHBounds:
    upper: float
    lower: float
    distortion: float
    discretization: float = 0.0
    histogram_heuristic: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "upper": self.upper,
            "lower": self.lower,
            "distortion": self.distortion,
            "discretization": self.discretization,
            "histogram_heuristic": self.histogram_heuristic,
        }


def _value_set_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    a = np.unique(a)
    b = np.unique(b)

    def one_way(x: np.ndarray, y: np.ndarray) -> float:
        pos = np.clip(np.searchsorted(y, x), 1, len(y) - 1) if len(y) > 1 else np.zeros(len(x), dtype=int)
        left = np.abs(x - y[pos - 1]) if len(y) > 1 else np.abs(x - y[0])
        right = np.abs(x - y[pos])
        return float(np.max(np.minimum(left, right)))

    return max(one_way(a, b), one_way(b, a))


def _interval_hausdorff(values: np.ndarray, top: float) -> float:
    """Hausdorff distance between a finite subset of [0, top] and the interval itself"""
    v = np.unique(np.concatenate([[0.0], values, [top]]))
    inner = float(np.max(np.diff(v)) / 2) if len(v) > 1 else 0.0
    ends = max(float(np.min(values)), float(top - np.max(values)))
    return max(inner, ends)


def _histogram_discrepancy(a: np.ndarray, b: np.ndarray, wa: Optional[np.ndarray] = None) -> float:
    bins = np.linspace(0.0, max(float(a.max()), float(b.max()), 1e-12), config.HISTOGRAM_BINS + 1)
    ha, _ = np.histogram(a, bins=bins, weights=wa)
    hb, _ = np.histogram(b, bins=bins)
    ha = ha / ha.sum()
    hb = hb / hb.sum()
    return float(np.abs(ha - hb).sum() / 2)


def abelian_chart(G: GroupHandle) -> Tuple[Callable, Tuple[int, ...]]:
    """
    Homomorphism onto a product of cyclic groups used to place group
    elements on the torus: the identity chart for products of cyclic groups,
    the two superdiagonal entries for unitriangular 3x3 matrices mod q
    """
    sides = cyclic_sides(G)
    if sides is not None:
        return (lambda g: cyclic_coordinates(G, g)), sides
    if isinstance(G, MatrixGroup) and G.dimension == 3:
        unitriangular = all(x[0] == x[4] == x[8] == 1 and x[3] == x[6] == x[7] == 0 for x in G.generators)
        if unitriangular:
            return (lambda g: (g[1], g[5])), (G.modulus, G.modulus)
    raise InvalidInput("missing correspondence: the graph has no built-in map to a torus")


def _torus_gh(X: FiniteMetricSpace, torus: TorusModel, refine: int) -> GHBounds:
    """
    GH bounds between a rescaled Cayley graph and a torus, by translation invariance

    Graph element g corresponds to the torus samples (1/(side*refine)) Z^q that
    round to its chart coordinates; left translations act isometrically on
    both sides and preserve the relation, so it suffices to anchor the first
    related pair at the identity.
    """
    graph: CayleyGraph = X.info["graph"]
    chart, sides = abelian_chart(graph.group)
    require(len(sides) == torus.q, f"torus dimension {torus.q} does not match the chart dimension {len(sides)}")
    ensure_cap(math.prod(s * refine for s in sides), config.CAP_ELEMENTS, "torus sample count")

    # distances from the identity, extremes over each chart fiber
    lo = np.full(sides, np.inf)
    hi = np.full(sides, -np.inf)
    values = []
    for g, d in graph.distance.items():
        c = chart(g)
        value = d / graph.diameter
        lo[c] = min(lo[c], value)
        hi[c] = max(hi[c], value)
        values.append(value)
    values = np.array(values)

    sides_arr = np.array(sides)
    resolution = sides_arr * refine
    axes = [np.arange(r) for r in resolution]
    samples = np.array(list(itertools.product(*axes)), dtype=np.int64)
    rounded = ((samples + refine // 2) // refine) % sides_arr
    anchors = samples[np.all(rounded == 0, axis=1)]
    points = samples / resolution

    fiber = tuple(rounded[:, k] for k in range(len(sides)))
    fiber_lo = lo[fiber]
    fiber_hi = hi[fiber]
    distortion = 0.0
    for a in anchors:
        d_torus = torus.distance(a / resolution, points)
        distortion = max(distortion, float(np.max(np.maximum(np.abs(fiber_hi - d_torus), np.abs(fiber_lo - d_torus)))))

    discretization = torus.discretization_error(int(resolution.max()))
    upper = distortion / 2 + discretization
    diam_gap = abs(float(X.diameter()) - 1.0)
    lower = max(diam_gap / 2, _interval_hausdorff(values, 1.0) / 2)
    torus_values = torus.distance(np.zeros(torus.q), points)
    heuristic = _histogram_discrepancy(values, torus_values)
    check(lower <= upper + 1e-12, "GH lower bound exceeds the upper bound", lower=lower, upper=upper)
    return GHBounds(upper=upper, lower=lower, distortion=distortion, discretization=discretization, histogram_heuristic=heuristic)


def gh_bounds(
    X: FiniteMetricSpace,
    Y: Union[FiniteMetricSpace, TorusModel],
    corr: Optional[Correspondence] = None,
    refine: Optional[int] = None,
) -> GHBounds:
    """
    Upper bound distortion/2 (+ torus sampling error) and the
    correspondence-free lower bound max(|diam X - diam Y|, H(values))/2,
    where H is the Hausdorff distance between the sets of distance values

    The value-set distance H replaces the 64-bin histogram discrepancy as
    the second lower-bound term: the histogram term can exceed the upper
    bound on sampled circles, so it is only reported as
    histogram_heuristic and never enters `lower`.

    Raises:
        InvalidInput: no correspondence available
    """
    if isinstance(Y, TorusModel):
        require(corr is None, "explicit correspondences are not supported against a torus")
        require("graph" in X.info, "missing correspondence: only rescaled Cayley graphs map to a torus")
        return _torus_gh(X, Y, config.TORUS_REFINEMENT if refine is None else refine)

    require(corr is not None, "missing correspondence between the two finite spaces")
    require(corr.left_size == len(X) and corr.right_size == len(Y), "correspondence does not match the spaces")
    ensure_cap(len(corr.pairs), config.DENSE_METRIC_MAX, "correspondence size")
    I = np.array([i for i, _ in corr.pairs])
    J = np.array([j for _, j in corr.pairs])
    dx, dy = X.as_float(), Y.as_float()
    distortion = float(np.max(np.abs(dx[np.ix_(I, I)] - dy[np.ix_(J, J)])))
    upper = distortion / 2
    va = dx[np.triu_indices(len(X))]
    vb = dy[np.triu_indices(len(Y))]
    lower = max(abs(float(X.diameter()) - float(Y.diameter())) / 2, _value_set_hausdorff(va, vb) / 2)
    check(lower <= upper + 1e-12, "GH lower bound exceeds the upper bound", lower=lower, upper=upper)
    return GHBounds(upper=upper, lower=lower, distortion=distortion, histogram_heuristic=_histogram_discrepancy(va, vb))


# ---------------------------------------------------------------------------
# Limit norms
# ---------------------------------------------------------------------------

def norm_extract(G: GroupHandle, S: ElementSet, directions: Sequence[Sequence[int]], scales: Sequence[int]) -> Report:
    """
    Estimates ‖v‖ ≈ d_S(0, k v)/k on Z^d at each scale k, with homogeneity
    and subadditivity checks on the estimates within 1e-6 + 2r/k
    (r the largest coordinate of a generator)
    """
    require(G.kind == "free-abelian", "norm extraction runs on free-abelian lattices")
    require(S.is_symmetric(), "generating set is not symmetric")
    scales = list(scales)
    require(scales and all(a < b for a, b in zip(scales, scales[1:])) and scales[0] >= 1, "scales must be increasing positive integers")
    for e in G.standard_generators():
        word_distance(G, S, e)
    r = max((max(abs(x) for x in s) for s in S if s != G.identity), default=1)
    vectors = [G.canonicalize(list(v)) for v in directions]
    require(len(vectors) > 0, "at least one direction is required")

    def estimate(v, k: int) -> Fraction:
        return Fraction(word_distance(G, S, tuple(k * x for x in v)), k)

    table = []
    final: Dict[Tuple[int, ...], Fraction] = {}
    for v in vectors:
        previous = None
        for k in scales:
            value = estimate(v, k)
            table.append({"direction": list(v), "scale": k, "estimate": value, "delta": None if previous is None else value - previous})
            previous = value
        final[v] = previous

    top = scales[-1]
    homogeneous = True
    for row in table:
        v = tuple(row["direction"])
        tolerance = config.NORM_TOLERANCE + 2 * r / row["scale"]
        homogeneous &= abs(float(row["estimate"] - final[v])) <= tolerance
    subadditive = True
    tolerance = config.NORM_TOLERANCE + 2 * r / top
    for v, w in itertools.combinations_with_replacement(vectors, 2):
        s = tuple(a + b for a, b in zip(v, w))
        subadditive &= float(estimate(s, top)) <= float(final[v] + final[w]) + tolerance
    check(homogeneous, "norm estimates are not stable across scales")
    check(subadditive, "norm estimates violate subadditivity")
    return Report(
        name="norm",
        values={"estimates": {str(list(v)): final[v] for v in vectors}, "scales": scales, "generator_radius": r},
        table=table,
        checks={"homogeneous": homogeneous, "subadditive": subadditive},
    )


def fitted_torus(G: GroupHandle, S: ElementSet, scale: int = 4) -> TorusModel:
    """Torus whose norm is the polyhedral norm fitted to lattice word-distance estimates"""
    d = G.spec.param
    if d == 1:
        return TorusModel(1, "l1")
    # one direction per ±pair; the norm is symmetric
    directions = [v for v in itertools.product(range(-2, 3), repeat=d) if any(v) and next(x for x in v if x) > 0]
    report = norm_extract(G, S, directions, [scale])
    half = np.array([np.array(v, dtype=float) / float(report.values["estimates"][str(list(v))]) for v in directions])
    points = np.vstack([half, -half])
    hull = ConvexHull(points)
    # facet a.x + b <= 0 becomes the functional a / (-b)
    functionals = hull.equations[:, :-1] / (-hull.equations[:, -1:])
    functionals = np.unique(np.round(functionals, 12), axis=0)
    return TorusModel(d, functionals.tolist())


def family_instance(family: str, size: int) -> Tuple[CayleyGraph, int]:
    if family == "cycle":
        G = make_group(GroupSpec(kind="cyclic", param=size))
        return CayleyGraph(G, default_generators(G)), 1
    if family == "grid":
        factor = GroupSpec(kind="cyclic", param=size)
        G = make_group(GroupSpec(kind="direct-product", factors=(factor, factor)))
        return CayleyGraph(G, default_generators(G)), 2
    if family == "heisenberg-mod":
        G = make_group(heisenberg_mod(size))
        return CayleyGraph(G, default_generators(G)), 2
    raise InvalidInput(f"unknown torus family {family!r}")


def torus_limit_report(
    family: str,
    sizes: Sequence[int],
    envelope: Optional[Dict[int, float]] = None,
    torus: Optional[TorusModel] = None,
) -> Report:
    """
    Per size: the size-versus-diameter condition, covering numbers, and GH
    bounds to the torus fitted on the corresponding lattice

    Cycles are checked against upper <= 2/n; an envelope, when given, bounds
    the upper values from above. An explicit torus replaces the fitted one.
    """
    require(family in ("cycle", "grid", "heisenberg-mod"), f"unknown torus family {family!r}")
    rows = []
    for n in sizes:
        X, q = family_instance(family, n)
        if torus is None:
            lattice = make_group(GroupSpec(kind="free-abelian", param=q))
            torus = fitted_torus(lattice, default_generators(lattice))
        space = rescaled_space(X)
        bounds = gh_bounds(space, torus)
        covers = covering_table(space, [Fraction(1, 4), Fraction(1, 8)])
        row = {
            "size": n,
            "order": X.order,
            "diameter": X.diameter,
            "condition": space.info["condition"][q],
            "cover_quarter": covers[0]["cover"],
            "cover_eighth": covers[1]["cover"],
            "cover_ratio": covers[1]["ratio"],
            "gh_upper": bounds.upper,
            "gh_lower": bounds.lower,
            "histogram_heuristic": bounds.histogram_heuristic,
        }
        if family == "cycle":
            check(bounds.upper <= 2 / n, "cycle GH upper bound exceeds 2/n", size=n, upper=bounds.upper)
        if envelope is not None and n in envelope:
            check(bounds.upper <= envelope[n] + 1e-12, "GH upper bound above its frozen envelope", size=n, upper=bounds.upper, envelope=envelope[n])
        rows.append(row)
        logger.info(f"{family} {n}: gh upper {bounds.upper:.6f}, lower {bounds.lower:.6f}")

    uppers = [r["gh_upper"] for r in rows]
    return Report(
        name="limit",
        values={"family": family, "sizes": list(sizes), "torus": torus.to_dict() if torus is not None else None},
        table=rows,
        checks={"upper_decreasing": all(a > b for a, b in zip(uppers, uppers[1:]))},
    )
