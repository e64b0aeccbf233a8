"""
Cayley graphs
Balls and diameters by BFS, word metrics (including the l-infinity word
metric), the spectral gap of the normalized Laplacian, and the diameter
table for PSL2(p).
"""

import logging
import math
import random
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

import config
from errors import CapExceeded, InvalidInput, check, ensure_cap, require
from group_core import (
    CyclicGroup,
    DirectProduct,
    Element,
    ElementSet,
    GroupHandle,
    GroupSpec,
    make_group,
    subgroup_closure,
    symmetric_group,
)
from progressions import ProgressionSpec, enumerate_progression
from reports import Report
from setcalc import symmetrize

logger = logging.getLogger(__name__)


def default_generators(G: GroupHandle) -> ElementSet:
    """Symmetric standard generating set without the identity ({±1} for cyclic, {±U, ±L} for psl2, ...)"""
    gens = ElementSet(G, G.standard_generators(), validate=False)
    S = symmetrize(gens)
    return ElementSet(G, S.elements - {G.identity}, validate=False)


def cyclic_sides(G: GroupHandle) -> Optional[Tuple[int, ...]]:
    """Side lengths when G is a cyclic group or a direct product of cyclic groups"""
    if isinstance(G, CyclicGroup):
        return (G.n,)
    if isinstance(G, DirectProduct) and all(isinstance(f, CyclicGroup) for f in G.factors):
        return tuple(f.n for f in G.factors)
    return None


def cyclic_coordinates(G: GroupHandle, g: Element) -> Tuple[int, ...]:
    if isinstance(G, CyclicGroup):
        return g
    return tuple(x[0] for x in g)


class CayleyGraph:
    """
    Cayley graph of a finite group for a symmetric generating set S
    (g ~ gs); verified generating by BFS from the identity
    """

    def __init__(self, group: GroupHandle, S: ElementSet):
        require(group.finite, "Cayley graphs are built for finite groups only")
        require(S.group == group, "group mismatch between set and ambient group")
        require(len(S) > 0, "generating set is empty")
        require(S.is_symmetric(), "generating set is not symmetric")
        order = group.order
        ensure_cap(order, config.CAP_ELEMENTS, "Cayley graph order")

        self.group = group
        self.S = S
        self.has_identity = S.contains_identity()
        self._steps = [s for s in S.sorted() if s != group.identity]

        mul = group.mul
        distance: Dict[Element, int] = {group.identity: 0}
        layers: List[List[Element]] = [[group.identity]]
        frontier = [group.identity]
        while frontier:
            nxt = []
            for g in frontier:
                for s in self._steps:
                    h = mul(g, s)
                    if h not in distance:
                        distance[h] = len(layers)
                        nxt.append(h)
            if nxt:
                layers.append(sorted(nxt))
            frontier = nxt
        require(len(distance) == order, f"S does not generate: BFS reached {len(distance)} of {order} elements")

        self.distance = distance
        self.layers = layers
        self.diameter = len(layers) - 1
        self.elements = group.elements()
        self.index = {g: i for i, g in enumerate(self.elements)}
        logger.debug(f"Cayley graph of order {order}, diameter {self.diameter}")

    @property
    def order(self) -> int:
        return len(self.elements)

    def word_distance(self, g: Element, h: Element) -> int:
        """d_S(g, h) = |g^-1 h|_S"""
        return self.distance[self.group.mul(self.group.inv(g), h)]

    def adjacency(self) -> sp.csr_matrix:
        """Adjacency operator counting generator multiplicities (identity gives loops)"""
        n = self.order
        rows, cols = [], []
        mul = self.group.mul
        for i, g in enumerate(self.elements):
            for s in self.S.sorted():
                rows.append(i)
                cols.append(self.index[mul(g, s)])
        data = np.ones(len(rows))
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    def distance_matrix(self) -> np.ndarray:
        """Integer matrix of d_S over the canonical element order"""
        n = self.order
        ensure_cap(n, config.DENSE_METRIC_MAX, "distance matrix order")
        sides = cyclic_sides(self.group)
        if sides is not None:
            # translation invariance: d(x, y) depends only on y - x
            coords = np.array([cyclic_coordinates(self.group, g) for g in self.elements], dtype=np.int32)
            table = np.zeros(sides, dtype=np.int64)
            for g, d in self.distance.items():
                table[cyclic_coordinates(self.group, g)] = d
            diff = tuple((coords[None, :, k] - coords[:, None, k]) % side for k, side in enumerate(sides))
            return table[diff]

        G = self.group
        matrix = np.zeros((n, n), dtype=np.int64)
        for i, g in enumerate(self.elements):
            gi = G.inv(g)
            matrix[i] = [self.distance[G.mul(gi, h)] for h in self.elements]
        return matrix


def ball_diameter(X: CayleyGraph) -> Report:
    """Layer sizes, ball sizes |B(e, n)| and the exact diameter"""
    rows = []
    ball = 0
    for n, layer in enumerate(X.layers):
        ball += len(layer)
        rows.append({"n": n, "layer": len(layer), "ball": ball})
    return Report(
        name="diameter",
        values={
            "group": X.group.spec.label(),
            "order": X.order,
            "generators": len(X.S),
            "identity_in_S": X.has_identity,
            "diameter": X.diameter,
        },
        table=rows,
    )


def word_distance(G: GroupHandle, S: ElementSet, g: Element, h: Optional[Element] = None, cap: Optional[int] = None) -> int:
    """
    d_S(g, h) by bidirectional BFS; works in infinite groups

    Raises:
        InvalidInput: h is unreachable from g
        CapExceeded: the searched balls grow past the cap
    """
    require(S.is_symmetric(), "generating set is not symmetric")
    cap = config.CAP_ELEMENTS if cap is None else cap
    target = g if h is None else G.mul(G.inv(g), h)
    if target == G.identity:
        return 0
    steps = [s for s in S.sorted() if s != G.identity]
    mul = G.mul
    forward = {G.identity: 0}
    backward = {target: 0}
    ahead = [G.identity]
    behind = [target]
    while ahead and behind:
        if len(ahead) <= len(behind):
            frontier, mine, other = ahead, forward, backward
        else:
            frontier, mine, other = behind, backward, forward
        best = None
        nxt = []
        for x in frontier:
            for s in steps:
                y = mul(x, s)
                if y in other:
                    total = mine[x] + 1 + other[y]
                    best = total if best is None else min(best, total)
                if y not in mine:
                    mine[y] = mine[x] + 1
                    nxt.append(y)
        if best is not None:
            return best
        if frontier is ahead:
            ahead = nxt
        else:
            behind = nxt
        ensure_cap(len(forward) + len(backward), cap, "word distance search")
    raise InvalidInput("target is unreachable from the identity with this generating set")


@lru_cache(maxsize=256)
def _cube_progression(G: GroupHandle, generators: Tuple[Element, ...], N: int) -> ElementSet:
    return enumerate_progression(ProgressionSpec(G, generators, (N,) * len(generators)))


def linf_word_metric(G: GroupHandle, generators: Sequence[Element], g: Element) -> int:
    """
    Least N with g in P(x_1..x_r; N..N); the sandwich
    d_inf <= d_S <= r d_inf against the ordinary word metric is checked.
    """
    generators = tuple(generators)
    r = len(generators)
    require(1 <= r <= config.LINF_MAX_RANK, f"l-infinity word metric supports 1..{config.LINF_MAX_RANK} generators")
    require(G.is_canonical(g), f"element {g!r} does not belong to {G.spec.label()}")
    for N in range(config.LINF_SEARCH_CAP + 1):
        if g in _cube_progression(G, generators, N):
            break
    else:
        raise CapExceeded(f"l-infinity word metric search stopped at N = {config.LINF_SEARCH_CAP}", {"cap": config.LINF_SEARCH_CAP})

    S = symmetrize(ElementSet(G, generators, validate=False))
    d = word_distance(G, S, g)
    check(N <= d <= r * N, "word-metric sandwich violated", element=G.literal(g), linf=N, word=d, rank=r)
    return N


def linf_sandwich_sweep(radius: int = 5) -> Report:
    """Every element of the radius-r ball of free-abelian(2) with generators e1, e2"""
    G = make_group(GroupSpec(kind="free-abelian", param=2))
    gens = tuple(G.standard_generators())
    rows = []
    for x in range(-radius, radius + 1):
        for y in range(-(radius - abs(x)), radius - abs(x) + 1):
            rows.append({"element": [x, y], "linf": linf_word_metric(G, gens, (x, y)), "word": abs(x) + abs(y)})
    return Report(name="sandwich", values={"elements": len(rows), "radius": radius, "violations": 0}, table=rows)


def spectral_gap(X: CayleyGraph) -> float:
    """
    Second-smallest eigenvalue of I - M/|S|, checked against 1/(8 diam^2)

    Dense symmetric solve up to DENSE_SPECTRAL_MAX vertices, Lanczos (eigsh)
    on M/|S| up to ITERATIVE_SPECTRAL_MAX.
    """
    n = X.order
    require(n >= 2, "spectral gap needs at least two vertices")
    ensure_cap(n, config.ITERATIVE_SPECTRAL_MAX, "spectral solve order")
    walk = X.adjacency() / len(X.S)
    if n <= config.DENSE_SPECTRAL_MAX:
        laplacian = np.eye(n) - walk.toarray()
        values = np.linalg.eigvalsh(laplacian)
        gap = float(values[1])
    else:
        try:
            top = eigsh(walk, k=2, which="LA", tol=config.SPECTRAL_TOLERANCE, maxiter=config.SPECTRAL_MAX_ITERATIONS, return_eigenvectors=False)
        except ArpackNoConvergence:
            raise CapExceeded("spectral solver did not converge", {"order": n})
        gap = float(1.0 - np.sort(top)[0])

    bound = 1.0 / (8 * X.diameter ** 2)
    check(gap >= bound - config.SPECTRAL_TOLERANCE, "spectral gap below 1/(8 diam^2)", gap=gap, diameter=X.diameter)
    return gap


def spectral_report(X: CayleyGraph) -> Report:
    gap = spectral_gap(X)
    return Report(
        name="spectral",
        values={
            "group": X.group.spec.label(),
            "order": X.order,
            "generators": len(X.S),
            "identity_in_S": X.has_identity,
            "diameter": X.diameter,
            "lambda1": gap,
            "lower_bound": 1.0 / (8 * X.diameter ** 2),
            "method": "dense" if X.order <= config.DENSE_SPECTRAL_MAX else "lanczos",
        },
        checks={"diameter_bound": True},
    )


def spectral_family() -> List[Tuple[str, CayleyGraph]]:
    """cyclic(n) for n <= 256, psl2(p) for p in {3, 5, 7, 11}, S4 and S5"""
    family = []
    for n in (3, 4, 5, 8, 16, 32, 64, 100, 128, 256):
        G = make_group(GroupSpec(kind="cyclic", param=n))
        family.append((f"cyclic:{n}", CayleyGraph(G, default_generators(G))))
    for p in (3, 5, 7, 11):
        G = make_group(GroupSpec(kind="psl2", param=p))
        family.append((f"psl2:{p}", CayleyGraph(G, default_generators(G))))
    for m in (4, 5):
        G = make_group(symmetric_group(m))
        family.append((f"symmetric:{m}", CayleyGraph(G, default_generators(G))))
    return family


def spectral_battery() -> Report:
    rows = []
    for name, X in spectral_family():
        gap = spectral_gap(X)
        row = {"group": name, "order": X.order, "diameter": X.diameter, "lambda1": gap}
        if name.startswith("cyclic:"):
            expected = 1 - math.cos(2 * math.pi / X.order)
            check(abs(gap - expected) <= 1e-8, "cycle spectral gap differs from 1 - cos(2pi/n)", group=name, gap=gap)
        rows.append(row)
    return Report(name="spectral", values={"graphs": len(rows), "violations": 0}, table=rows)


def _random_generating_pair(G: GroupHandle, rng: random.Random) -> ElementSet:
    elements = G.elements()
    while True:
        pair = ElementSet(G, rng.sample(elements, 2), validate=False)
        if len(subgroup_closure(G, pair)) == G.order:
            S = symmetrize(pair)
            return ElementSet(G, S.elements - {G.identity}, validate=False)


def babai_report(primes: Sequence[int], rule: str = "standard", seed: int = 0) -> Report:
    """Diameter of PSL2(p) against log|G| for each requested prime; informational only"""
    require(rule in ("standard", "random"), f"unknown generator rule {rule!r}")
    rng = random.Random(seed)
    rows = []
    for p in primes:
        G = make_group(GroupSpec(kind="psl2", param=p))
        S = default_generators(G) if rule == "standard" else _random_generating_pair(G, rng)
        X = CayleyGraph(G, S)
        log_order = math.log(X.order)
        rows.append({
            "p": p,
            "order": X.order,
            "diameter": X.diameter,
            "log_order": log_order,
            "diameter_over_log": X.diameter / log_order,
            "log_diameter_over_loglog": math.log(X.diameter) / math.log(log_order),
        })
        logger.info(f"psl2({p}): order {X.order}, diameter {X.diameter}")
    orders = [r["order"] for r in sorted(rows, key=lambda r: r["p"])]
    monotone = all(a < b for a, b in zip(orders, orders[1:]))
    check(monotone, "|PSL2(p)| is not increasing in p", orders=orders)
    return Report(name="babai", values={"primes": list(primes), "rule": rule}, table=rows, checks={"order_monotone": monotone})
