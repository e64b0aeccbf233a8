"""
Product-set engine and the Ruzsa / approximate-group calculus
Exact set products, powers, Ruzsa distances, covering witnesses,
approximate-group constants and the escape norm.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import isprime

import config
from errors import InvalidInput, check, ensure_cap, require
from group_core import INFINITE, Element, ElementSet
from reports import Report

logger = logging.getLogger(__name__)

__all__ = [
    "ElementSet",
    "RuzsaValue",
    "CoverWitness",
    "ApproxConstant",
    "product_set",
    "power_set",
    "symmetrize",
    "doubling_report",
    "ruzsa_distance",
    "triangle_slack",
    "ruzsa_cover",
    "approx_constant",
    "lemma210_witness",
    "lemma211_witness",
    "escape_norm",
    "escape_norm_report",
    "symmetrized_square_report",
    "sumproduct_stats",
]


@dataclass(frozen=True)
class RuzsaValue:
    """exp(2 d(A,B)) as the exact rational |AB^-1|^2 / (|A||B|)"""

    numerator: int
    denominator: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def distance(self) -> float:
        """d(A,B) = log(|AB^-1| / sqrt(|A||B|)), for display only"""
        return 0.5 * math.log(self.numerator / self.denominator)

    def __lt__(self, other: "RuzsaValue") -> bool:
        return self.ratio < other.ratio

    def __le__(self, other: "RuzsaValue") -> bool:
        return self.ratio <= other.ratio

    def to_dict(self) -> Dict:
        return {"numerator": self.numerator, "denominator": self.denominator, "distance": self.distance}


@dataclass
class CoverWitness:
    """covered ⊆ X · translates, checked extensionally when built"""

    covered: str
    translates: str
    X: ElementSet
    side: str = "left"
    bound: Optional[Fraction] = None

    def to_dict(self) -> Dict:
        return {
            "covered": self.covered,
            "translates": self.translates,
            "side": self.side,
            "size": len(self.X),
            "X": self.X.literals(),
            "bound": self.bound,
        }


@dataclass
class ApproxConstant:
    k_greedy: int
    witness: CoverWitness
    k_exact: Optional[int] = None
    exact_witness: Optional[CoverWitness] = None

    def to_dict(self) -> Dict:
        return {
            "k_greedy": self.k_greedy,
            "k_exact": self.k_exact,
            "witness": self.witness,
            "exact_witness": self.exact_witness,
        }


# ---------------------------------------------------------------------------
# Products and powers
# ---------------------------------------------------------------------------

def product_set(A: ElementSet, B: ElementSet, cap: Optional[int] = None) -> ElementSet:
    """
    AB = {ab : a in A, b in B}

    Raises:
        InvalidInput: the sets live in different groups
        CapExceeded: pair count or result size over the configured caps
    """
    require(A.group == B.group, "group mismatch between element sets")
    cap = config.CAP_ELEMENTS if cap is None else cap
    ensure_cap(len(A) * len(B), config.CAP_PRODUCT_PAIRS, "product pair count")
    G = A.group
    mul = G.mul
    out = set()
    if len(A) <= len(B):
        right = B.elements
        for a in A.elements:
            out.update(mul(a, b) for b in right)
    else:
        left = A.elements
        for b in B.elements:
            out.update(mul(a, b) for a in left)
    ensure_cap(len(out), cap, "product set")

    result = ElementSet(G, out, validate=False)
    check(len(result) <= len(A) * len(B), "|AB| exceeds |A||B|", size=len(result))
    if G.identity in B:
        check(len(A) <= len(result), "|AB| < |A| although B contains the identity", size=len(result))
    return result


def power_set(A: ElementSet, n: int, cap: Optional[int] = None) -> ElementSet:
    """A^n by iterated product, memoized on A"""
    require(n >= 1, f"power must be positive, got {n}")
    if n == 1:
        return A
    cache = A.power_cache
    if n in cache:
        return cache[n]
    k = max([j for j in cache if j < n], default=1)
    current = cache.get(k, A)
    while k < n:
        current = product_set(current, A, cap)
        k += 1
        cache[k] = current
    return current


def symmetrize(A: ElementSet) -> ElementSet:
    """A ∪ A^-1 ∪ {1}"""
    G = A.group
    return ElementSet(G, A.elements | A.inverse().elements | {G.identity}, validate=False)


def doubling_report(A: ElementSet, n_max: int = 3) -> Report:
    """
    Growth table |A^n| for n <= n_max with doubling and tripling constants

    The small tripling inequality |A^n| <= (|A^3|/|A|)^(n-2) |A| is checked for
    every tabulated n >= 3, and for abelian groups the Plünnecke bound
    |nA| <= K^n |A| with K = |A+A|/|A|.
    """
    require(len(A) > 0, "doubling report needs a nonempty set")
    n_max = max(n_max, 3)
    size = len(A)
    sizes = {n: len(power_set(A, n)) for n in range(1, n_max + 1)}
    doubling = Fraction(sizes[2], size)
    tripling = Fraction(sizes[3], size)

    rows = []
    small_tripling_ok = True
    plunnecke_ok = True
    for n in range(1, n_max + 1):
        ratio = Fraction(sizes[n], size)
        row = {"n": n, "size": sizes[n], "ratio": ratio}
        if n >= 3:
            holds = ratio <= tripling ** (n - 2)
            check(holds, "small tripling inequality violated", n=n, size=sizes[n], tripling=str(tripling))
            small_tripling_ok &= holds
        if A.group.abelian:
            holds = ratio <= doubling ** n
            check(holds, "Plünnecke bound violated", n=n, size=sizes[n], doubling=str(doubling))
            plunnecke_ok &= holds
        rows.append(row)

    checks = {"small_tripling": small_tripling_ok}
    if A.group.abelian:
        checks["plunnecke"] = plunnecke_ok
    return Report(
        name="doubling",
        values={"size": size, "doubling": doubling, "tripling": tripling, "n_max": n_max},
        table=rows,
        checks=checks,
    )


# ---------------------------------------------------------------------------
# Ruzsa calculus
# ---------------------------------------------------------------------------

def ruzsa_distance(A: ElementSet, B: ElementSet) -> RuzsaValue:
    """Exact Ruzsa value |AB^-1|^2 / (|A||B|), checked >= 1 and symmetric"""
    require(len(A) > 0 and len(B) > 0, "Ruzsa distance needs nonempty sets")
    ab = len(product_set(A, B.inverse()))
    ba = len(product_set(B, A.inverse()))
    check(ab == ba, "Ruzsa distance is not symmetric", forward=ab, backward=ba)
    value = RuzsaValue(ab * ab, len(A) * len(B))
    check(value.ratio >= 1, "Ruzsa distance is negative", numerator=value.numerator, denominator=value.denominator)
    return value


def triangle_slack(A: ElementSet, B: ElementSet, C: ElementSet) -> Fraction:
    """
    exp(2(d(A,B) + d(B,C) - d(A,C))) as an exact rational

    Equals (|AB^-1||BC^-1| / (|B||AC^-1|))^2; the triangle inequality is the
    statement that this is at least 1.
    """
    require(len(A) > 0 and len(B) > 0 and len(C) > 0, "triangle slack needs nonempty sets")
    ab = len(product_set(A, B.inverse()))
    bc = len(product_set(B, C.inverse()))
    ac = len(product_set(A, C.inverse()))
    slack = Fraction(ab * bc, len(B) * ac) ** 2
    check(
        len(B) * ac <= ab * bc,
        "Ruzsa triangle inequality violated",
        A=A.literals(),
        B=B.literals(),
        C=C.literals(),
    )
    return slack


def ruzsa_cover(A: ElementSet, B: ElementSet) -> CoverWitness:
    """
    Maximal family of disjoint left translates xB, x in A, scanned in canonical order

    Returns X with A ⊆ X B B^-1 and |X| <= |AB|/|B|, both checked.
    """
    require(A.group == B.group, "group mismatch between element sets")
    require(len(B) > 0, "covering set must be nonempty")
    mul = A.group.mul
    chosen: List[Element] = []
    used = set()
    for a in A:
        translate = {mul(a, b) for b in B.elements}
        if used.isdisjoint(translate):
            chosen.append(a)
            used |= translate
    X = ElementSet(A.group, chosen, validate=False)

    AB = product_set(A, B)
    bound = Fraction(len(AB), len(B))
    check(len(X) <= bound, "covering family larger than |AB|/|B|", size=len(X), bound=str(bound))
    cover = product_set(X, product_set(B, B.inverse()))
    missing = A.elements - cover.elements
    check(not missing, "A is not covered by X B B^-1", missing=[A.group.literal(g) for g in sorted(missing)][:10])
    return CoverWitness(covered="A", translates="BB^-1", X=X, bound=bound)


def _require_approximate_group_shape(A: ElementSet) -> None:
    require(A.is_symmetric(), "set is not symmetric")
    require(A.contains_identity(), "set does not contain the identity")


def _verify_cover(covered: ElementSet, X: ElementSet, translates: ElementSet, what: str) -> None:
    image = product_set(X, translates)
    missing = covered.elements - image.elements
    check(not missing, f"{what}: cover misses points", missing=[covered.group.literal(g) for g in sorted(missing)][:10])


def _greedy_translate_cover(AA: ElementSet, A: ElementSet) -> List[Element]:
    G = A.group
    mul, inv = G.mul, G.inv
    members = A.sorted()
    size = len(members)
    uncovered = set(AA.elements)
    queue = AA.sorted()
    head = 0
    chosen: List[Element] = []
    while uncovered:
        while queue[head] not in uncovered:
            head += 1
        u = queue[head]
        best, best_gain = None, -1
        for a0 in members:
            t = mul(u, inv(a0))
            gain = 0
            for i, a in enumerate(members):
                if mul(t, a) in uncovered:
                    gain += 1
                elif gain + size - i - 1 <= best_gain:
                    # cannot beat the current best any more
                    gain = -1
                    break
            if gain > best_gain:
                best, best_gain = t, gain
                if gain == len(members):
                    break
        chosen.append(best)
        uncovered.difference_update(mul(best, a) for a in members)
    return chosen


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _exact_translate_cover(AA: ElementSet, A: ElementSet, incumbent: List[Element]) -> List[Element]:
    """Minimum number of left translates of A covering AA, by branch and bound"""
    G = A.group
    mul, inv = G.mul, G.inv
    points = AA.sorted()
    ensure_cap(len(points), config.EXACT_COVER_MAX_PRODUCT, "exact cover product size")
    index = {g: i for i, g in enumerate(points)}
    members = A.sorted()

    candidates = sorted({mul(u, inv(a)) for u in points for a in members})
    ensure_cap(len(candidates), config.EXACT_COVER_MAX_CANDIDATES, "exact cover candidate count")
    masks: Dict[Element, int] = {}
    for t in candidates:
        mask = 0
        for a in members:
            j = index.get(mul(t, a))
            if j is not None:
                mask |= 1 << j
        masks[t] = mask

    # candidates covering each point, in canonical order
    by_point: List[List[Element]] = [[] for _ in points]
    for t in candidates:
        mask = masks[t]
        while mask:
            low = mask & -mask
            by_point[low.bit_length() - 1].append(t)
            mask ^= low

    full = (1 << len(points)) - 1
    size = len(members)
    best = list(incumbent)

    def search(covered: int, chosen: List[Element]) -> None:
        nonlocal best
        if covered == full:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        uncovered = full & ~covered
        if len(chosen) + -(-_popcount(uncovered) // size) >= len(best):
            return
        point = (uncovered & -uncovered).bit_length() - 1
        options = sorted(by_point[point], key=lambda t: -_popcount(masks[t] & uncovered))
        for t in options:
            chosen.append(t)
            search(covered | masks[t], chosen)
            chosen.pop()

    search(0, [])
    return best


def approx_constant(A: ElementSet, exact: bool = False) -> ApproxConstant:
    """
    Number of left translates of A needed to cover AA

    Greedy: repeatedly take the canonical-least uncovered u and add u·a0^-1 for
    the canonical-least a0 in A covering the most uncovered points. With
    exact=True a branch-and-bound search returns the minimum as well.

    Raises:
        InvalidInput: A is not symmetric or misses the identity
        CapExceeded: exact mode over its product / candidate caps
    """
    _require_approximate_group_shape(A)
    AA = power_set(A, 2)
    greedy = _greedy_translate_cover(AA, A)
    X = ElementSet(A.group, greedy, validate=False)
    _verify_cover(AA, X, A, "greedy approximate-group cover")
    result = ApproxConstant(k_greedy=len(X), witness=CoverWitness(covered="AA", translates="A", X=X))

    if exact:
        best = _exact_translate_cover(AA, A, greedy)
        X_exact = ElementSet(A.group, best, validate=False)
        _verify_cover(AA, X_exact, A, "exact approximate-group cover")
        check(len(X_exact) <= len(X), "exact cover larger than greedy cover", exact=len(X_exact), greedy=len(X))
        result.k_exact = len(X_exact)
        result.exact_witness = CoverWitness(covered="AA", translates="A", X=X_exact)
    return result


def lemma210_witness(A: ElementSet) -> CoverWitness:
    """
    For symmetric A with |A^5| <= K|A|, a set X of size <= |A^5|/|A| with
    (A^2)^2 ⊆ X A^2, obtained by covering A^4 with translates of A
    """
    _require_approximate_group_shape(A)
    A5 = power_set(A, 5)
    A4 = power_set(A, 4)
    A2 = power_set(A, 2)
    witness = ruzsa_cover(A4, A)
    bound = Fraction(len(A5), len(A))
    check(len(witness.X) <= bound, "covering family larger than |A^5|/|A|", size=len(witness.X), bound=str(bound))
    _verify_cover(A4, witness.X, A2, "A^4 ⊆ X A^2")
    logger.debug(f"A^2 is a {math.floor(bound)}-approximate group, witness size {len(witness.X)}")
    return CoverWitness(covered="A^4", translates="A^2", X=witness.X, bound=bound)


def lemma211_witness(A: ElementSet, X_A: ElementSet, B: ElementSet, Y_B: ElementSet) -> CoverWitness:
    """
    Cover witness Z for (A^2 ∩ B^2)^2 ⊆ Z (A^2 ∩ B^2)

    z_{x,y} is the canonical-least element of xA ∩ yB for x in X_A^3, y in Y_B^3.
    """
    G = A.group
    for S in (X_A, B, Y_B):
        require(S.group == G, "group mismatch between element sets")
    _require_approximate_group_shape(A)
    _require_approximate_group_shape(B)
    for name, S, W in (("A", A, X_A), ("B", B, Y_B)):
        SS = power_set(S, 2)
        image = product_set(W, S)
        require(SS.issubset(image), f"supplied witness does not cover {name}{name}")

    mul = G.mul
    X3 = power_set(X_A, 3)
    Y3 = power_set(Y_B, 3)
    left = {x: {mul(x, a) for a in A.elements} for x in X3}
    right = {y: {mul(y, b) for b in B.elements} for y in Y3}
    Z = set()
    for x in X3:
        for y in Y3:
            common = left[x] & right[y]
            if common:
                Z.add(min(common))
    Zset = ElementSet(G, Z, validate=False)

    core = power_set(A, 2).intersection(power_set(B, 2))
    bound = len(X_A) ** 3 * len(Y_B) ** 3
    check(len(Zset) <= bound, "|Z| exceeds |X|^3 |Y|^3", size=len(Zset), bound=bound)
    _verify_cover(power_set(core, 2), Zset, core, "(A^2 ∩ B^2)^2 ⊆ Z (A^2 ∩ B^2)")
    return CoverWitness(covered="(A^2∩B^2)^2", translates="A^2∩B^2", X=Zset, bound=Fraction(bound))


# ---------------------------------------------------------------------------
# Escape norm
# ---------------------------------------------------------------------------

def escape_norm(A: ElementSet, g: Element):
    """
    ‖g‖_A = 1/n_A(g), n_A(g) the largest n with 1, g, ..., g^n in A

    Returns Fraction(0) when the whole cyclic group <g> lies in A and
    INFINITE when g itself is not in A.
    """
    G = A.group
    require(G.is_canonical(g), f"element {g!r} does not belong to {G.spec.label()}")
    require(A.contains_identity(), "escape norm needs the identity in A")
    members = A.elements
    h = g
    n = 0
    while h in members:
        n += 1
        if h == G.identity or n > len(A):
            return Fraction(0)
        h = G.mul(h, g)
    return Fraction(1, n) if n else INFINITE


def escape_norm_report(A: ElementSet) -> Report:
    """
    Measured ratios of the escape norm over all pairs of A

    Nothing is asserted: the constants of the corresponding structure
    statements are not effective.
    """
    require(A.contains_identity(), "escape norm needs the identity in A")
    G = A.group
    norms: Dict[Element, object] = {}

    def norm(x: Element):
        if x not in norms:
            norms[x] = escape_norm(A, x)
        return norms[x]

    conjugation = commutation = additivity = None
    for g in A:
        ng = norm(g)
        for h in A:
            nh = norm(h)
            if ng and ng != INFINITE:
                r = norm(G.mul(G.inv(h), G.mul(g, h)))
                if r != INFINITE:
                    value = Fraction(r) / ng
                    conjugation = value if conjugation is None else max(conjugation, value)
            total = ng + nh
            if total and total != INFINITE:
                r = norm(G.mul(g, h))
                if r != INFINITE:
                    value = Fraction(r) / total
                    additivity = value if additivity is None else max(additivity, value)
            product = ng * nh
            if product and product != INFINITE:
                r = norm(G.commutator(g, h))
                if r != INFINITE:
                    value = Fraction(r) / product
                    commutation = value if commutation is None else max(commutation, value)

    zero = ElementSet(G, [g for g in A if norm(g) == 0], validate=False)
    normalized = zero.is_subgroup() and all(zero.left_translate(a).right_translate(G.inv(a)) == zero for a in A)
    return Report(
        name="escape-norm",
        values={
            "size": len(A),
            "max_conjugation_ratio": conjugation,
            "max_additivity_ratio": additivity,
            "max_commutator_ratio": commutation,
            "zero_norm_set": zero,
            "zero_norm_normal_subgroup": normalized,
        },
        table=[{"element": G.literal(g), "norm": norm(g)} for g in A],
    )


def symmetrized_square_report(A: ElementSet) -> Report:
    """Measured approximate constant of (A ∪ A^-1 ∪ {1})^2 against the tripling constant of A"""
    require(len(A) > 0, "set must be nonempty")
    Q = power_set(symmetrize(A), 2)
    tripling = Fraction(len(power_set(A, 3)), len(A))
    constant = approx_constant(Q)
    return Report(
        name="symmetrized-square",
        values={
            "size": len(A),
            "tripling": tripling,
            "square_size": len(Q),
            "k_greedy": constant.k_greedy,
        },
    )


# ---------------------------------------------------------------------------
# Sum-product in F_p
# ---------------------------------------------------------------------------

def _sum_product_sizes(p: int, residues: Sequence[int]) -> Tuple[int, int]:
    sums = {(a + b) % p for a in residues for b in residues}
    products = {(a * b) % p for a in residues for b in residues}
    return len(sums), len(products)


def sumproduct_stats(p: int, residues: Sequence[int], minimizer_size: Optional[int] = None) -> Report:
    """
    |A+A|, |A·A| and the growth exponent of A ⊆ F_p

    With minimizer_size = k (p <= 13 only), also searches all k-subsets for the
    least max(|A+A|, |A·A|).
    """
    require(isinstance(p, int) and isprime(p), f"fp-ring needs a prime, got {p}", field="p")
    require(p <= config.MAX_FP_RING_PRIME, f"fp-ring prime {p} is over the cap {config.MAX_FP_RING_PRIME}")
    require(len(residues) > 0, "sum-product set must be nonempty")
    for r in residues:
        if not (isinstance(r, int) and 0 <= r < p):
            raise InvalidInput(f"invalid residue {r!r} mod {p}", {"residue": r})
    A = sorted(set(residues))
    sums, products = _sum_product_sizes(p, A)
    exponent = math.log(max(sums, products)) / math.log(len(A)) if len(A) > 1 else None

    values = {
        "p": p,
        "size": len(A),
        "sumset": sums,
        "productset": products,
        "growth_exponent": exponent,
    }
    if minimizer_size is not None:
        require(p <= 13, "exhaustive minimizer is limited to p <= 13")
        require(1 <= minimizer_size <= p, f"minimizer size must lie in [1, {p}]")
        best, best_set = None, None
        for subset in itertools.combinations(range(p), minimizer_size):
            growth = max(_sum_product_sizes(p, subset))
            if best is None or growth < best:
                best, best_set = growth, list(subset)
        values["minimizer"] = best_set
        values["minimizer_growth"] = best
    return Report(name="sumproduct", values=values)
