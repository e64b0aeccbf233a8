"""
Structure detectors
Coset structure of sets with small doubling, subgroup search, Schreier
index, dense generation and the strong approximate group axioms, together
with the exhaustive and randomized sweeps that exercise them.
"""

import itertools
import logging
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import config
from errors import CapExceeded, InvalidInput, check, ensure_cap, require
from group_core import (
    INFINITE,
    Element,
    ElementSet,
    GroupHandle,
    GroupSpec,
    dihedral_group,
    make_group,
    quaternion_group,
    short_form_spec,
    small_group_family,
    subgroup_closure,
    symmetric_group,
    whole_group,
)
from reports import Report
from setcalc import (
    approx_constant,
    doubling_report,
    lemma210_witness,
    lemma211_witness,
    power_set,
    product_set,
    ruzsa_cover,
    symmetrize,
    triangle_slack,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[[T], R], items: Sequence[T], threads: Optional[int] = None) -> List[R]:
    """Order-preserving map, fanned out over a thread pool when threads > 1"""
    threads = config.THREADS if threads is None else threads
    if threads <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


@dataclass
class CosetStructure:
    """A finite subgroup H and an element a describing A as (part of) a coset"""

    H: ElementSet
    a: Element
    left: bool
    right: bool
    contained: bool
    normalizes: bool

    def to_dict(self) -> Dict:
        G = self.H.group
        return {
            "H": self.H.literals(),
            "H_size": len(self.H),
            "a": G.literal(self.a),
            "A_equals_aH": self.left,
            "A_equals_Ha": self.right,
            "A_in_aH": self.contained,
            "normalizes": self.normalizes,
        }


@dataclass
class HamidouneCover:
    H: ElementSet
    cosets: int
    bound: int

    def to_dict(self) -> Dict:
        return {"H": self.H.literals(), "H_size": len(self.H), "cosets": self.cosets, "bound": self.bound}


def _conjugate_set(H: ElementSet, a: Element) -> ElementSet:
    """a H a^-1"""
    return H.left_translate(a).right_translate(H.group.inv(a))


# ---------------------------------------------------------------------------
# Coset detectors
# ---------------------------------------------------------------------------

def detect_unit_doubling(A: ElementSet) -> Optional[CosetStructure]:
    """
    If |AA| = |A|, recover H = A a^-1 for the canonical-least a in A
    and verify A = aH = Ha with aHa^-1 = H; otherwise None.
    """
    require(len(A) > 0, "set must be nonempty")
    AA = power_set(A, 2)
    if len(AA) != len(A):
        return None
    G = A.group
    a = A.min()
    H = A.right_translate(G.inv(a))
    check(H.is_subgroup(), "A a^-1 is not a subgroup although |AA| = |A|", A=A.literals())
    left = H.left_translate(a) == A
    right = H.right_translate(a) == A
    normalizes = _conjugate_set(H, a) == H
    check(left and right and normalizes, "coset structure fails verification", A=A.literals(), H=H.literals())
    return CosetStructure(H=H, a=a, left=left, right=right, contained=True, normalizes=normalizes)


def detect_small_doubling(A: ElementSet, threshold: Fraction = Fraction(3, 2)) -> Optional[CosetStructure]:
    """
    If |AA| < threshold·|A| (threshold in (1, 3/2]), H = AA^-1 = A^-1A is a
    subgroup of size < 3/2|A| normalized by A with A inside a single coset.
    When |AA| <= 1.1|A| the sharper |H| <= 1.2|A| is asserted as well.
    """
    threshold = Fraction(threshold)
    require(1 < threshold <= Fraction(3, 2), f"threshold must lie in (1, 3/2], got {threshold}")
    require(len(A) > 0, "set must be nonempty")
    AA = power_set(A, 2)
    if not len(AA) < threshold * len(A):
        return None

    G = A.group
    H = product_set(A, A.inverse())
    witness = {"A": A.literals()}
    check(H == product_set(A.inverse(), A), "AA^-1 differs from A^-1A", **witness)
    check(H.is_subgroup(), "AA^-1 is not a subgroup", **witness)
    check(2 * len(H) < 3 * len(A), "|H| is not below 3/2 |A|", H_size=len(H), **witness)
    for a in A:
        check(A.issubset(H.left_translate(a)), "A is not inside aH", a=G.literal(a), **witness)
        check(_conjugate_set(H, a) == H, "A does not normalize H", a=G.literal(a), **witness)
    if 10 * len(AA) <= 11 * len(A):
        check(5 * len(H) <= 6 * len(A), "|H| exceeds 1.2|A| although |AA| <= 1.1|A|", H_size=len(H), **witness)

    a = A.min()
    return CosetStructure(
        H=H,
        a=a,
        left=H.left_translate(a) == A,
        right=H.right_translate(a) == A,
        contained=True,
        normalizes=True,
    )


# ---------------------------------------------------------------------------
# Subgroups
# ---------------------------------------------------------------------------

def enumerate_subgroups(G: GroupHandle, ambient: ElementSet) -> List[ElementSet]:
    """
    All subgroups of the finite subgroup `ambient`, by cyclic extension

    Ordered by (size, canonical element list).
    """
    ensure_cap(len(ambient), config.SUBGROUP_ENUMERATION_MAX_ORDER, "subgroup enumeration order")
    trivial = ElementSet(G, [G.identity], validate=False)
    found: Dict[frozenset, ElementSet] = {trivial.elements: trivial}
    frontier = [trivial]
    while frontier:
        nxt = []
        for H in frontier:
            reached = set(H.elements)
            for g in ambient:
                if g in reached:
                    continue
                K = subgroup_closure(G, H.union(ElementSet(G, [g], validate=False)), cap=len(ambient))
                # <H, gh> = <H, g> for h in H
                reached.update(G.mul(g, h) for h in H.elements)
                if K.elements not in found:
                    found[K.elements] = K
                    nxt.append(K)
        frontier = nxt
    subgroups = sorted(found.values(), key=lambda H: (len(H), H.sorted()))
    logger.debug(f"{len(subgroups)} subgroups in a group of order {len(ambient)}")
    return subgroups


def _left_coset_count(A: ElementSet, H: ElementSet) -> int:
    """Number of left cosets aH that A meets"""
    mul = A.group.mul
    return len({min(mul(a, h) for h in H.elements) for a in A})


def hamidoune_cover(A: ElementSet, subgroups: Optional[List[ElementSet]] = None) -> Optional[HamidouneCover]:
    """
    Subgroup H with |H| <= |A| such that A meets at most floor(1/(2-K)) left
    cosets aH, K = |AA|/|A| < 2; searched over all subgroups of <A> in
    (size, canonical) order.

    Returns None only when no such subgroup exists (logged as an alarm).
    """
    require(len(A) > 0, "set must be nonempty")
    G = A.group
    K = Fraction(len(power_set(A, 2)), len(A))
    require(K < 2, f"doubling constant {K} is not below 2")
    bound = math.floor(1 / (2 - K))

    span = subgroup_closure(G, A, cap=config.SUBGROUP_ENUMERATION_MAX_ORDER)
    if subgroups is None:
        subgroups = enumerate_subgroups(G, span)
    for H in subgroups:
        if len(H) > len(A):
            break
        if not H.issubset(span):
            continue
        count = _left_coset_count(A, H)
        if count <= bound:
            return HamidouneCover(H=H, cosets=count, bound=bound)
    logger.warning(f"no subgroup meets the coset bound {bound} for a set of size {len(A)}")
    return None


def schreier_index(G: GroupHandle, S: ElementSet, H: ElementSet, k: int, C) -> Report:
    """
    Index [<S> : H] by coset BFS on the Schreier graph, and the implication
    |S^k ∩ H| > |S^2k|/C with k >= C  ==>  [<S> : H] <= C

    S need not contain the identity: in a finite group the positive words
    in S already reach every coset of H in <S>.
    """
    C = Fraction(C)
    require(C > 0, "C must be positive")
    require(k >= 1, "k must be positive")
    require(len(S) > 0, "generating set must be nonempty")
    require(H.is_subgroup(), "H is not a subgroup")
    gamma = subgroup_closure(G, S)
    require(H.issubset(gamma), "H is not contained in <S>")

    mul = G.mul
    members = H.sorted()

    def coset_key(g: Element) -> Element:
        return min(mul(g, h) for h in members)

    start = coset_key(G.identity)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for rep in frontier:
            for s in S:
                key = coset_key(mul(s, rep))
                if key not in seen:
                    seen.add(key)
                    nxt.append(key)
        frontier = nxt
    index = len(seen)
    check(index * len(H) == len(gamma), "coset count disagrees with |<S>|/|H|", index=index, H=len(H), order=len(gamma))

    Sk = power_set(S, k)
    S2k = power_set(S, 2 * k)
    overlap = len(Sk.intersection(H))
    hypothesis = overlap * C > len(S2k) and k >= C
    conclusion = index <= C
    if hypothesis:
        check(conclusion, "index exceeds C although the hypothesis holds", index=index, C=str(C), k=k)
    return Report(
        name="schreier",
        values={
            "order": len(gamma),
            "H_size": len(H),
            "index": index,
            "k": k,
            "C": C,
            "overlap": overlap,
            "S2k_size": len(S2k),
            "hypothesis": hypothesis,
            "conclusion": conclusion,
        },
        checks={"index_bound": conclusion or not hypothesis},
    )


def commensurable(A: ElementSet, B: ElementSet, K) -> bool:
    """|A ∩ B| >= max(|A|, |B|) / K, exactly"""
    K = Fraction(K)
    require(K > 0, "K must be positive")
    return K * len(A.intersection(B)) >= max(len(A), len(B))


def dense_generation_bound(alpha: Fraction) -> Tuple[int, int]:
    """
    (k0, bound) with k0 the least k >= 0 such that 1.1^k · 1.2 · alpha >= 1
    and bound = 2^(k0+1)
    """
    k0 = 0
    while Fraction(11, 10) ** k0 * Fraction(6, 5) * alpha < 1:
        k0 += 1
    return k0, 2 ** (k0 + 1)


def dense_generation(G: GroupHandle, S: ElementSet, alpha) -> Report:
    """
    Least n with S^n = G for a dense symmetric generating S, against 2^(k0+1)

    S may omit the identity. Its powers then need not grow into G: when S
    lies in a coset of a proper normal subgroup (the odd permutations of
    S_n, say) they cycle through the cosets and InvalidInput is raised.
    """
    alpha = Fraction(alpha)
    require(G.finite, "dense generation needs a finite group")
    require(0 < alpha <= 1, f"alpha must lie in (0, 1], got {alpha}")
    require(len(S) > 0, "generating set must be nonempty")
    require(S.is_symmetric(), "generating set is not symmetric")
    order = G.order
    require(len(S) >= alpha * order, f"|S| = {len(S)} is below alpha·|G|")
    require(len(subgroup_closure(G, S)) == order, "S does not generate the group")

    n = 1
    current = S
    seen = {current.elements}
    while len(current) < order:
        n += 1
        current = product_set(current, S)
        require(
            current.elements not in seen,
            f"powers of S repeat after {n} steps without covering the group",
            size=len(S),
            period_at=n,
        )
        seen.add(current.elements)
    k0, bound = dense_generation_bound(alpha)
    check(n <= bound, "S^n = G needs more steps than the dense-generation bound", n=n, bound=bound, alpha=str(alpha))
    if 2 * len(S) > order:
        check(n <= 2, "S^2 misses an element although |S| > |G|/2", n=n, size=len(S))
    return Report(
        name="dense-generation",
        values={"order": order, "size": len(S), "alpha": alpha, "n": n, "k0": k0, "bound": bound},
        checks={"within_bound": True},
    )


# ---------------------------------------------------------------------------
# Strong approximate groups
# ---------------------------------------------------------------------------

def _power_run(X: ElementSet, g: Element, limit: int):
    """Largest n <= limit with g, ..., g^n in X (INFINITE if the powers cycle inside X)"""
    G = X.group
    h = g
    n = 0
    while n < limit and h in X:
        n += 1
        if h == G.identity:
            return INFINITE
        h = G.mul(h, g)
    return n


def _stable_power(A: ElementSet, n: int) -> ElementSet:
    """A^n, stopping early once the powers stabilize (A contains the identity)"""
    current = A
    for k in range(2, n + 1):
        nxt = power_set(A, k)
        if len(nxt) == len(current):
            return current
        current = nxt
    return current


def _axiom_one(A: ElementSet) -> Tuple[Optional[bool], Optional[Dict]]:
    big = _stable_power(A, 100)
    for g in big:
        if g in A:
            continue
        if _power_run(big, g, 1000) >= 1000:
            return False, {"g": A.group.literal(g)}
    return True, None


def _axiom_two(A: ElementSet, S: ElementSet, N: int) -> Tuple[Optional[bool], Optional[Dict]]:
    G = A.group
    A4 = power_set(A, 4)
    T = ElementSet(G, {G.conjugate(s, g) for g in A4 for s in S}, validate=False)
    if not T.issubset(A):
        return False, {"power": 1}

    seen: Dict[frozenset, int] = {T.elements: 1}
    current = T
    m = 1
    while m < N:
        if m >= config.STRONG_APPROX_POWER_STEPS:
            logger.warning(f"strong axiom power chain undecided after {m} steps")
            return None, {"power": m}
        current = product_set(current, T)
        m += 1
        if len(current) > len(A) or not current.issubset(A):
            return False, {"power": m}
        if current.elements in seen:
            break
        seen[current.elements] = m

    for g in A:
        run = _power_run(A, g, N)
        if run >= N and g not in S:
            return False, {"g": G.literal(g), "escape": "powers stay in A but g is not in S"}
    return True, None


def strong_approx_check(A: ElementSet, S: ElementSet, K) -> Report:
    """
    Evaluate both strong approximate group axioms for (A, S, K) with early
    exit, then tabulate the escape-count consequences on A.

    Cap hits are reported as an undecided axiom, not raised.
    """
    K = Fraction(K)
    require(K >= 1, "K must be at least 1")
    require(A.is_symmetric() and A.contains_identity(), "A must be symmetric and contain the identity")
    require(S.group == A.group, "group mismatch between element sets")
    require(S.is_symmetric() and S.issubset(A), "S must be a symmetric subset of A")
    N = math.ceil(10 ** 6 * K ** 3)

    values: Dict = {"size": len(A), "S_size": len(S), "K": K, "N": N}
    try:
        axiom1, witness1 = _axiom_one(A)
    except CapExceeded as e:
        axiom1, witness1 = None, e.witness
    try:
        axiom2, witness2 = _axiom_two(A, S, N)
    except CapExceeded as e:
        axiom2, witness2 = None, e.witness
    values.update({"axiom1": axiom1, "axiom1_witness": witness1, "axiom2": axiom2, "axiom2_witness": witness2})

    consequence1 = consequence2 = None
    try:
        big = _stable_power(A, 100)
        consequence1 = consequence2 = True
        for g in A:
            n_a = _power_run(A, g, len(A) + 1)
            n_big = _power_run(big, g, len(big) + 1)
            n_s = _power_run(S, g, len(S) + 1)
            consequence1 &= n_a <= n_big <= 1000 * n_a
            consequence2 &= N * n_s >= n_a
    except CapExceeded as e:
        logger.warning(f"consequence check undecided: {e.message}")
    values.update({"escape_sandwich": consequence1, "escape_domination": consequence2})
    return Report(name="strong-approx", values=values)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def _subsets(G: GroupHandle) -> List[ElementSet]:
    elements = G.elements()
    out = []
    for mask in range(1, 1 << len(elements)):
        out.append(ElementSet(G, [g for i, g in enumerate(elements) if mask >> i & 1], validate=False))
    return out


def unit_doubling_sweep(max_order: int = 10, threads: Optional[int] = None) -> Report:
    """Every nonempty subset of every small group: a structure is found iff |AA| = |A|"""
    rows = []
    for name, G in small_group_family(max_order):

        def examine(A: ElementSet) -> bool:
            found = detect_unit_doubling(A)
            unit = len(power_set(A, 2)) == len(A)
            check((found is not None) == unit, "unit doubling detector disagrees with |AA| = |A|", group=name, A=A.literals())
            return unit

        outcomes = parallel_map(examine, _subsets(G), threads)
        rows.append({"group": name, "subsets": len(outcomes), "structures": sum(outcomes)})
        logger.info(f"unit doubling sweep {name}: {sum(outcomes)}/{len(outcomes)} cosets")
    return Report(
        name="unit-doubling",
        values={"groups": len(rows), "subsets": sum(r["subsets"] for r in rows), "violations": 0},
        table=rows,
    )


def freiman_sweep(max_order: int = 10, threads: Optional[int] = None) -> Report:
    """Every nonempty subset of every small group with |AA| < 3/2|A| has its subgroup recovered"""
    rows = []
    for name, G in small_group_family(max_order):

        def examine(A: ElementSet) -> bool:
            small = 2 * len(power_set(A, 2)) < 3 * len(A)
            found = detect_small_doubling(A)
            check((found is not None) == small, "small doubling detector disagrees with |AA| < 3/2|A|", group=name, A=A.literals())
            return small

        outcomes = parallel_map(examine, _subsets(G), threads)
        rows.append({"group": name, "subsets": len(outcomes), "small_doubling": sum(outcomes)})
        logger.info(f"freiman sweep {name}: {sum(outcomes)}/{len(outcomes)} sets below 3/2")
    return Report(
        name="freiman",
        values={"groups": len(rows), "subsets": sum(r["subsets"] for r in rows), "violations": 0},
        table=rows,
    )


def hamidoune_family(max_order: int) -> List[Tuple[str, GroupHandle]]:
    """Cyclic, dihedral, symmetric, PSL2 and mod-q Heisenberg groups of order at most max_order"""
    names = [
        "cyclic:16", "dihedral:8", "symmetric:4", "heisenberg-mod:3", "cyclic:32", "dihedral:16",
        "cyclic:64", "dihedral:32", "symmetric:5", "heisenberg-mod:5", "psl2:7", "cyclic:512",
    ]
    family = []
    for name in names:
        G = make_group(short_form_spec(name))
        if G.order <= max_order:
            family.append((name, G))
    return family


def _covered(name: str, A: ElementSet, subgroups: List[ElementSet]) -> bool:
    """True when A has doubling below 2 (and then a cover must exist)"""
    if len(power_set(A, 2)) >= 2 * len(A):
        return False
    cover = hamidoune_cover(A, subgroups)
    check(cover is not None, "no subgroup satisfies the coset bound", group=name, A=A.literals())
    return True


def _near_coset_set(G: GroupHandle, subgroups: List[ElementSet], rng: random.Random) -> ElementSet:
    """Random dense subset of one or two left cosets of a random subgroup"""
    elements = G.elements()
    H = subgroups[rng.randrange(len(subgroups))]
    pool = set()
    for _ in range(rng.randint(1, 2)):
        pool.update(H.left_translate(rng.choice(elements)).elements)
    pool = sorted(pool)
    size = rng.randint(len(pool) // 2 + 1, len(pool))
    return ElementSet(G, rng.sample(pool, size), validate=False)


def hamidoune_sweep(
    max_order: int = 10,
    span_order: int = 64,
    trials: int = 200,
    random_order: int = 512,
    seed: int = 0,
    threads: Optional[int] = None,
) -> Report:
    """
    Every set with doubling below 2 meets few left cosets of a small subgroup

    Three passes: every nonempty subset of the small groups of order at most
    max_order, every set of at most HAMIDOUNE_SMALL_SET_SIZE elements in the
    groups of order at most span_order, and `trials` seeded dense subsets of
    one or two cosets in groups of order at most random_order.
    """
    rows = []
    for name, G in small_group_family(max_order):
        subgroups = enumerate_subgroups(G, whole_group(G))
        outcomes = parallel_map(lambda A: _covered(name, A, subgroups), _subsets(G), threads)
        rows.append({"pass": "exhaustive", "group": name, "sets": len(outcomes), "covered": sum(outcomes)})

    span_family = [(name, G) for name, G in hamidoune_family(span_order) if G.order > max_order]
    for name, G in span_family:
        subgroups = enumerate_subgroups(G, whole_group(G))
        elements = G.elements()
        sets = [
            ElementSet(G, combo, validate=False)
            for size in range(1, config.HAMIDOUNE_SMALL_SET_SIZE + 1)
            for combo in itertools.combinations(elements, size)
        ]
        outcomes = parallel_map(lambda A: _covered(name, A, subgroups), sets, threads)
        rows.append({"pass": "small-sets", "group": name, "sets": len(outcomes), "covered": sum(outcomes)})

    random_family = hamidoune_family(random_order)
    if trials and random_family:
        rng = random.Random(seed)
        lattices = [(name, G, enumerate_subgroups(G, whole_group(G))) for name, G in random_family]
        cases = []
        for _ in range(trials):
            name, G, subgroups = lattices[rng.randrange(len(lattices))]
            cases.append((name, _near_coset_set(G, subgroups, rng), subgroups))
        outcomes = parallel_map(lambda case: _covered(*case), cases, threads)
        for name, _, _ in lattices:
            hits = [hit for case, hit in zip(cases, outcomes) if case[0] == name]
            rows.append({"pass": "random", "group": name, "sets": len(hits), "covered": sum(hits)})

    return Report(
        name="hamidoune",
        values={
            "groups": len({row["group"] for row in rows}),
            "sets": sum(row["sets"] for row in rows),
            "covered": sum(row["covered"] for row in rows),
            "violations": 0,
            "seed": seed,
        },
        table=rows,
    )


def schreier_family() -> List[Tuple[str, GroupHandle]]:
    """Groups of order at most 120 used by the randomized Schreier sweep"""
    family = [(name, G) for name, G in small_group_family(10)]
    for n in (12, 24, 30):
        family.append((f"cyclic:{n}", make_group(GroupSpec(kind="cyclic", param=n))))
    family.append(("symmetric:4", make_group(symmetric_group(4))))
    family.append(("dihedral:6", make_group(dihedral_group(6))))
    family.append(("symmetric:5", make_group(symmetric_group(5))))
    return family


def schreier_sweep(trials: int = 1000, seed: int = 0, threads: Optional[int] = None) -> Report:
    """Random (G, S, H, k, C); the index bound is checked whenever its hypothesis holds"""
    rng = random.Random(seed)
    family = schreier_family()
    cases = []
    for _ in range(trials):
        name, G = family[rng.randrange(len(family))]
        elements = G.elements()
        gens = set(G.standard_generators()) | set(rng.sample(elements, min(2, len(elements))))
        S = symmetrize(ElementSet(G, gens, validate=False))
        H = subgroup_closure(G, ElementSet(G, [rng.choice(elements)], validate=False))
        k = rng.randint(1, 4)
        C = Fraction(rng.randint(1, 4 * k), 4)
        cases.append((name, G, S, H, k, C))

    def examine(case) -> bool:
        name, G, S, H, k, C = case
        return schreier_index(G, S, H, k, C).values["hypothesis"]

    outcomes = parallel_map(examine, cases, threads)
    return Report(
        name="schreier",
        values={"trials": trials, "hypothesis_held": sum(outcomes), "violations": 0, "seed": seed},
    )


def _s5_dense_cases(rng: random.Random) -> List[Tuple[GroupHandle, ElementSet, Fraction]]:
    """Identity-free symmetric sets in S5, plus the odd permutations (which never cover S5)"""
    G = make_group(symmetric_group(5))
    nontrivial = [g for g in G.elements() if g != G.identity]
    cases = []
    for alpha in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)):
        for _ in range(config.DENSE_GENERATION_S5_SAMPLES):
            # one past alpha·|G|, so the alpha = 1/2 sets exceed half of S5
            size = math.ceil(alpha * G.order) + 1
            picked = ElementSet(G, rng.sample(nontrivial, size), validate=False)
            cases.append((G, picked.union(picked.inverse()), alpha))
    odd = ElementSet(G, [g for g in nontrivial if _is_odd(g)], validate=False)
    cases.append((G, odd, Fraction(1, 2)))
    return cases


def _is_odd(perm: Element) -> bool:
    """Parity of a permutation in one-line notation"""
    inversions = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return inversions % 2 == 1


def dense_generation_sweep(max_n: int = 60, seed: int = 0, threads: Optional[int] = None) -> Report:
    """
    cyclic(n) for n <= max_n with random dense symmetric generating sets, and
    identity-free dense sets in S5; sets whose powers cycle below the whole
    group are counted as periodic.
    """
    rng = random.Random(seed)
    cases = []
    for n in range(1, max_n + 1):
        G = make_group(GroupSpec(kind="cyclic", param=n))
        elements = G.elements()
        for alpha in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)):
            size = max(1, math.ceil(alpha * n))
            picked = set(rng.sample(elements, size))
            picked.add(G.identity)
            S = symmetrize(ElementSet(G, picked, validate=False))
            if len(subgroup_closure(G, S)) < n:
                S = symmetrize(S.union(ElementSet(G, G.standard_generators(), validate=False)))
            cases.append((G, S, alpha))
    cases.extend(_s5_dense_cases(rng))

    def examine(case) -> Optional[int]:
        G, S, alpha = case
        try:
            return dense_generation(G, S, alpha).values["n"]
        except InvalidInput as e:
            logger.info(f"dense generation: {e.message} (|S| = {len(S)})")
            return None

    steps = parallel_map(examine, cases, threads)
    covered = [n for n in steps if n is not None]
    return Report(
        name="dense-generation",
        values={
            "cases": len(cases),
            "max_steps": max(covered),
            "uncovered": len(steps) - len(covered),
            "violations": 0,
            "seed": seed,
        },
    )


def strong_approx_battery() -> Report:
    """Subgroups of small groups satisfy both strong axioms with S = A"""
    rows = []
    for name, G in small_group_family(8):
        whole = ElementSet(G, G.elements(), validate=False)
        for H in enumerate_subgroups(G, whole):
            report = strong_approx_check(H, H, 1)
            holds = report.values["axiom1"] and report.values["axiom2"]
            check(bool(holds), "subgroup fails a strong approximate group axiom", group=name, H=H.literals())
            rows.append({"group": name, "H_size": len(H), "axiom1": report.values["axiom1"], "axiom2": report.values["axiom2"]})
    return Report(name="strong-approx", values={"cases": len(rows), "violations": 0}, table=rows)


# ---------------------------------------------------------------------------
# Ruzsa calculus batteries
# ---------------------------------------------------------------------------

def _calculus_family() -> List[Tuple[str, GroupHandle, Callable[[random.Random], Element]]]:
    """(name, group, random element sampler): cyclic(60), S5 and a window of the Heisenberg group"""
    cyclic = make_group(GroupSpec(kind="cyclic", param=60))
    s5 = make_group(symmetric_group(5))
    heisenberg = make_group(GroupSpec(kind="heisenberg-Z"))
    s5_elements = s5.elements()
    return [
        ("cyclic:60", cyclic, lambda rng: (rng.randrange(60),)),
        ("symmetric:5", s5, lambda rng: rng.choice(s5_elements)),
        ("heisenberg", heisenberg, lambda rng: tuple(rng.randint(-2, 2) for _ in range(3))),
    ]


def _random_set(G: GroupHandle, sample: Callable[[random.Random], Element], rng: random.Random, max_size: int) -> ElementSet:
    size = rng.randint(1, max_size)
    return ElementSet(G, {sample(rng) for _ in range(size)}, validate=False)


def ruzsa_triangle_sweep(trials: int = 10_000, seed: int = 0, threads: Optional[int] = None) -> Report:
    """Random triples (A, B, C); the squared triangle slack is at least 1 every time"""
    rng = random.Random(seed)
    family = _calculus_family()
    cases = []
    for _ in range(trials):
        name, G, sample = family[rng.randrange(len(family))]
        cases.append((name, *(_random_set(G, sample, rng, 8) for _ in range(3))))

    def examine(case) -> Fraction:
        name, A, B, C = case
        slack = triangle_slack(A, B, C)
        check(slack >= 1, "Ruzsa triangle slack below 1", group=name, slack=str(slack))
        return slack

    slacks = parallel_map(examine, cases, threads)
    return Report(
        name="ruzsa-triangle",
        values={"trials": trials, "min_slack": min(slacks) if slacks else None, "violations": 0, "seed": seed},
    )


def small_tripling_sweep(trials: int = 1000, seed: int = 0, threads: Optional[int] = None) -> Report:
    """|A^n| <= (|A^3|/|A|)^(n-2) |A| for n in 4..6 on random sets"""
    rng = random.Random(seed)
    family = _calculus_family()
    cases = []
    for _ in range(trials):
        name, G, sample = family[rng.randrange(len(family))]
        cases.append((name, _random_set(G, sample, rng, 4)))

    def examine(case) -> Fraction:
        name, A = case
        return doubling_report(A, n_max=6).values["tripling"]

    tripling = parallel_map(examine, cases, threads)
    return Report(
        name="small-tripling",
        values={"trials": trials, "max_tripling": max(tripling) if tripling else None, "violations": 0, "seed": seed},
    )


def ruzsa_cover_sweep(trials: int = 1000, seed: int = 0, threads: Optional[int] = None) -> Report:
    """Ruzsa covering witnesses for random (A, B), and A^2-cover witnesses for random symmetric A"""
    rng = random.Random(seed)
    family = _calculus_family()
    cases = []
    for _ in range(trials):
        name, G, sample = family[rng.randrange(len(family))]
        A = _random_set(G, sample, rng, 8)
        B = _random_set(G, sample, rng, 8)
        small = symmetrize(_random_set(G, sample, rng, 2))
        cases.append((name, A, B, small))

    def examine(case) -> int:
        name, A, B, small = case
        ruzsa_cover(A, B)
        return len(lemma210_witness(small).X)

    sizes = parallel_map(examine, cases, threads)
    return Report(
        name="ruzsa-cover",
        values={"trials": trials, "max_square_witness": max(sizes) if sizes else None, "violations": 0, "seed": seed},
    )


def lemma211_sweep(trials: int = 100, seed: int = 0, threads: Optional[int] = None) -> Report:
    """Random pairs of symmetric sets with greedy cover witnesses; the intersection cover holds"""
    rng = random.Random(seed)
    groups = [
        ("cyclic:60", make_group(GroupSpec(kind="cyclic", param=60))),
        ("symmetric:4", make_group(symmetric_group(4))),
        ("dihedral:6", make_group(dihedral_group(6))),
        ("quaternion", make_group(quaternion_group())),
    ]
    cases = []
    for _ in range(trials):
        name, G = groups[rng.randrange(len(groups))]
        elements = G.elements()
        A = symmetrize(ElementSet(G, rng.sample(elements, rng.randint(1, 3)), validate=False))
        B = symmetrize(ElementSet(G, rng.sample(elements, rng.randint(1, 3)), validate=False))
        cases.append((name, A, B))

    def examine(case) -> int:
        name, A, B = case
        X = approx_constant(A).witness.X
        Y = approx_constant(B).witness.X
        return len(lemma211_witness(A, X, B, Y).X)

    sizes = parallel_map(examine, cases, threads)
    return Report(
        name="lemma211",
        values={"trials": trials, "max_witness": max(sizes) if sizes else None, "violations": 0, "seed": seed},
    )
