"""
Progressions and growth
Progressions P(x; L), box progressions, nilprogressions and coset
nilprogressions, growth profiles and the multi-scale doubling experiments.
"""

import itertools
import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from errors import InvalidInput, check, ensure_cap, require
from group_core import Element, ElementSet, GroupHandle, GroupSpec, make_group
from reports import Report
from setcalc import approx_constant, power_set, product_set

logger = logging.getLogger(__name__)


@dataclass
class ProgressionSpec:
    """P(x_1..x_r; L_1..L_r), optionally multiplied by a finite normal kernel"""

    group: GroupHandle
    generators: Tuple[Element, ...]
    lengths: Tuple[int, ...]
    kernel: Optional[ElementSet] = None

    def __post_init__(self):
        G = self.group
        self.generators = tuple(self.generators)
        self.lengths = tuple(self.lengths)
        require(len(self.generators) >= 1, "a progression needs at least one generator")
        ensure_cap(len(self.generators), config.MAX_PROGRESSION_RANK, "progression rank")
        require(len(self.lengths) == len(self.generators), "one length per generator is required")
        for L in self.lengths:
            require(isinstance(L, int) and L >= 0, f"side lengths must be nonnegative integers, got {L!r}")
        for x in self.generators:
            require(G.is_canonical(x), f"generator {x!r} is not a canonical element of {G.spec.label()}")
        if self.kernel is not None:
            require(self.kernel.group == G, "kernel lives in another group")
            require(self.kernel.is_subgroup(), "kernel is not a subgroup")
            for x in self.generators:
                conjugate = self.kernel.left_translate(x).right_translate(G.inv(x))
                require(conjugate == self.kernel, "kernel is not normalized by the generators")

    @property
    def rank(self) -> int:
        return len(self.generators)

    def scaled(self, factor: int) -> "ProgressionSpec":
        return ProgressionSpec(self.group, self.generators, tuple(factor * L for L in self.lengths), self.kernel)

    def to_dict(self) -> Dict:
        G = self.group
        return {
            "group": G.spec.to_json(),
            "generators": [G.literal(x) for x in self.generators],
            "lengths": list(self.lengths),
            "kernel": self.kernel.literals() if self.kernel is not None else None,
        }


@dataclass
class GrowthProfile:
    label: str
    sizes: Dict[int, int]
    exponent: Optional[float]
    window: Tuple[int, int]
    stabilized_at: Optional[int] = None

    def to_report(self) -> Report:
        return Report(
            name="growth",
            values={
                "set": self.label,
                "exponent": self.exponent,
                "window": list(self.window),
                "stabilized_at": self.stabilized_at,
            },
            table=[{"n": n, "size": s} for n, s in sorted(self.sizes.items())],
        )


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def enumerate_progression(spec: ProgressionSpec) -> ElementSet:
    """
    Values of all words with at most L_i letters x_i^{±1}

    Breadth-first over (element, letters-used vector) states, one letter per
    layer; a state is dropped when the same element was already reached with
    a componentwise smaller budget.
    """
    G = spec.group
    mul = G.mul
    letters = [(i, x) for i, g in enumerate(spec.generators) for x in sorted({g, G.inv(g)})]
    zero = (0,) * spec.rank
    fronts: Dict[Element, List[Tuple[int, ...]]] = {G.identity: [zero]}
    layer = [(G.identity, zero)]
    states = 1
    while layer:
        nxt = []
        for g, used in layer:
            for i, x in letters:
                if used[i] >= spec.lengths[i]:
                    continue
                bumped = used[:i] + (used[i] + 1,) + used[i + 1:]
                h = mul(g, x)
                front = fronts.setdefault(h, [])
                if any(all(a <= b for a, b in zip(v, bumped)) for v in front):
                    continue
                front.append(bumped)
                nxt.append((h, bumped))
                states += 1
        ensure_cap(states, config.CAP_STATES, "progression state count")
        ensure_cap(len(fronts), config.CAP_ELEMENTS, "progression size")
        layer = nxt

    P = ElementSet(G, fronts.keys(), validate=False)
    if spec.kernel is not None:
        P = product_set(spec.kernel, P)
    return P


def box_progression(G: GroupHandle, images: Sequence[Element], lengths: Sequence[int]) -> ElementSet:
    """
    Image of the box ∏[-L_i, L_i] under the homomorphism Z^d -> G sending e_i to images[i]

    The doubling bound |PP| <= 2^d |P| is checked on the result.
    """
    images = list(images)
    require(len(images) == len(lengths) and images, "one length per image is required")
    for x in images:
        require(G.is_canonical(x), f"image {x!r} is not a canonical element of {G.spec.label()}")
    for x, y in itertools.combinations(images, 2):
        require(G.mul(x, y) == G.mul(y, x), "non-commuting images", x=G.literal(x), y=G.literal(y))
    ensure_cap(math.prod(2 * L + 1 for L in lengths), config.CAP_ELEMENTS, "box volume")

    points = {G.identity}
    for x, L in zip(images, lengths):
        steps = [G.power(x, k) for k in range(-L, L + 1)]
        points = {G.mul(p, s) for p in points for s in steps}
    P = ElementSet(G, points, validate=False)

    PP = power_set(P, 2)
    d = len(images)
    check(len(PP) <= 2 ** d * len(P), "|PP| exceeds 2^d |P|", size=len(P), square=len(PP), d=d)
    logger.debug(f"box progression of size {len(P)}, doubling {Fraction(len(PP), len(P))}")
    return P


def box_bound_sweep(max_rank: int = 3, max_side: int = 3) -> Report:
    """Every box with d <= max_rank, L_i <= max_side into Z^d and two cyclic targets"""
    targets = []
    for d in range(1, max_rank + 1):
        Z = make_group(GroupSpec(kind="free-abelian", param=d))
        targets.append((f"free-abelian:{d}", Z, Z.standard_generators()))
        for n in (5, 12):
            C = make_group(GroupSpec(kind="cyclic", param=n))
            targets.append((f"cyclic:{n}^{d}", C, [(k % n,) for k in (1, 2, 3)[:d]]))

    rows = []
    worst = Fraction(0)
    for name, G, images in targets:
        d = len(images)
        count = 0
        for lengths in itertools.product(range(max_side + 1), repeat=d):
            P = box_progression(G, images, lengths)
            worst = max(worst, Fraction(len(power_set(P, 2)), 2 ** d * len(P)))
            count += 1
        rows.append({"target": name, "d": d, "boxes": count})
    return Report(name="box-bound", values={"boxes": sum(r["boxes"] for r in rows), "worst_ratio": worst, "violations": 0}, table=rows)


# ---------------------------------------------------------------------------
# Nilprogressions
# ---------------------------------------------------------------------------

def nilpotency_class(G: GroupHandle, generators: Sequence[Element], cap: Optional[int] = None) -> int:
    """
    Class of <generators>: the least c such that every left-normed commutator
    of weight c + 1 in the generators is trivial

    Raises:
        InvalidInput: not nilpotent within the class cap
    """
    cap = config.NILPOTENCY_CLASS_CAP if cap is None else cap
    gens = sorted({g for g in generators if g != G.identity})
    if not gens:
        return 0
    if G.abelian:
        return 1
    layer = set(gens)
    for c in range(1, cap + 1):
        layer = {G.commutator(u, x) for u in layer for x in gens} - {G.identity}
        if not layer:
            return c
        ensure_cap(len(layer), config.CAP_ELEMENTS, "commutator layer")
    raise InvalidInput(f"generators are not nilpotent of class <= {cap}", {"cap": cap})


def nilprogression_check(spec: ProgressionSpec, containment_power: int = 0) -> Report:
    """
    Nilpotency class, size and measured approximate constant of a (coset)
    nilprogression; side lengths below NILPROG_MIN_SIDE are flagged.

    With containment_power = m the inclusions P^n ⊆ P(x; nL) are checked for n <= m.
    """
    s = nilpotency_class(spec.group, spec.generators)
    P = enumerate_progression(spec)
    check(P.is_symmetric() and P.contains_identity(), "progression is not symmetric with identity", size=len(P))
    constant = approx_constant(P)

    rows = []
    for n in range(2, containment_power + 1):
        Pn = power_set(P, n)
        scaled = enumerate_progression(spec.scaled(n))
        check(Pn.issubset(scaled), "P^n is not inside P(x; nL)", n=n)
        rows.append({"n": n, "power_size": len(Pn), "scaled_size": len(scaled)})

    small = min(spec.lengths) < config.NILPROG_MIN_SIDE
    if small:
        logger.warning(f"side lengths {list(spec.lengths)} are below {config.NILPROG_MIN_SIDE}; the constant is informational")
    return Report(
        name="nilprog",
        values={
            "rank": spec.rank,
            "class": s,
            "lengths": list(spec.lengths),
            "size": len(P),
            "kernel_size": len(spec.kernel) if spec.kernel is not None else 1,
            "k_greedy": constant.k_greedy,
            "small_sides": small,
        },
        table=rows,
    )


# ---------------------------------------------------------------------------
# Growth
# ---------------------------------------------------------------------------

def growth_profile(S: ElementSet, n_max: int, fit_window: Optional[Tuple[int, int]] = None) -> GrowthProfile:
    """Exact table n -> |S^n| and the least-squares slope of log|S^n| against log n"""
    require(n_max >= 1, "n_max must be positive")
    lo, hi = fit_window if fit_window is not None else (max(1, n_max // 2), n_max)
    require(1 <= lo < hi <= n_max, f"fit window {lo}..{hi} must lie inside 1..{n_max}")

    sizes: Dict[int, int] = {}
    stabilized = None
    for n in range(1, n_max + 1):
        sizes[n] = len(power_set(S, n))
        if stabilized is None and n > 1 and S.contains_identity() and sizes[n] == sizes[n - 1]:
            stabilized = n - 1
            logger.info(f"growth stabilized at n = {stabilized}")

    ns = np.arange(lo, hi + 1, dtype=float)
    logs = np.log([sizes[n] for n in range(lo, hi + 1)])
    slope = float(np.polyfit(np.log(ns), logs, 1)[0])
    return GrowthProfile(label=f"{S.group.spec.label()}:|S|={len(S)}", sizes=sizes, exponent=slope, window=(lo, hi), stabilized_at=stabilized)


def _exceeds(big: int, small: int, D: Fraction) -> bool:
    """big > 5^D · small, exactly"""
    return big ** D.denominator > 5 ** D.numerator * small ** D.denominator


def doubling_scale_finder(S: ElementSet, D, n_max: int) -> Optional[int]:
    """
    Least n <= n_max with |S^4n| <= 5^D |S^n|, or None

    When S contains the identity the powers are nested, so a scale is
    abandoned as soon as some S^m with n < m <= 4n already exceeds the bound.
    """
    D = Fraction(D)
    require(D >= 0, "D must be nonnegative")
    nested = S.contains_identity()
    for n in range(1, n_max + 1):
        base = len(power_set(S, n))
        failed = False
        if nested:
            for m in range(n + 1, 4 * n):
                if _exceeds(len(power_set(S, m)), base, D):
                    failed = True
                    break
        if not failed and not _exceeds(len(power_set(S, 4 * n)), base, D):
            return n
    return None


def all_scales_report(S: ElementSet, n_range: Tuple[int, int]) -> Report:
    """K_greedy(S^m) across m in n_range; no bound is asserted"""
    require(S.is_symmetric() and S.contains_identity(), "S must be symmetric and contain the identity")
    lo, hi = n_range
    require(1 <= lo <= hi, f"scale range {lo}..{hi} is empty")
    rows = []
    for m in range(lo, hi + 1):
        Sm = power_set(S, m)
        rows.append({"m": m, "size": len(Sm), "k_greedy": approx_constant(Sm).k_greedy})
    return Report(
        name="all-scales",
        values={"set": f"{S.group.spec.label()}:|S|={len(S)}", "range": [lo, hi], "max_k_greedy": max(r["k_greedy"] for r in rows)},
        table=rows,
    )


# ---------------------------------------------------------------------------
# Free groups
# ---------------------------------------------------------------------------

def free_group_bounds(A: ElementSet, n: int) -> Report:
    """
    Checks |A^n| >= (1/62)^n |A|^floor((n+1)/2) exactly for A in a free group

    Raises:
        InvalidInput: A is not in a free group or lies in a cyclic subgroup
    """
    G = A.group
    require(G.kind == "free-group", "free group bounds need a set in a free group")
    require(n >= 1, "n must be positive")
    require(len(A) >= 2, "set must have at least two elements")
    # in a free group two elements commute iff they are powers of a common word
    commuting = all(G.mul(a, b) == G.mul(b, a) for a, b in itertools.combinations(A.sorted(), 2))
    require(not commuting, "cyclic degenerate: all elements are powers of one word")

    size = len(power_set(A, n))
    exponent = (n + 1) // 2
    check(size * 62 ** n >= len(A) ** exponent, "lower bound with c = 1/62 violated", n=n, size=size, A=A.literals())
    return Report(
        name="free-group-bounds",
        values={
            "size": len(A),
            "n": n,
            "power_size": size,
            "ratio": Fraction(size, len(A) ** exponent),
            "tripling_over_square": Fraction(len(power_set(A, 3)), len(A) ** 2) if n >= 3 else None,
        },
        checks={"lower_bound": True},
    )


def extremal_free_set(N: int) -> ElementSet:
    """{x} ∪ {y^i : |i| < N} in the free group on x = 1, y = 2"""
    require(N >= 1, "N must be positive")
    G = make_group(GroupSpec(kind="free-group", param=2))
    words = [(1,)] + [(2,) * i if i >= 0 else (-2,) * (-i) for i in range(-N + 1, N)]
    return ElementSet(G, words, validate=False)


def _random_free_set(G: GroupHandle, rng: random.Random, target: int, max_length: int) -> ElementSet:
    letters = [1, -1, 2, -2]
    words = set()
    while len(words) < target:
        raw = [rng.choice(letters) for _ in range(rng.randint(1, max_length))]
        words.add(G.canonicalize(raw))
    words.discard(G.identity)
    return ElementSet(G, words, validate=False)


def _commutative(A: ElementSet) -> bool:
    G = A.group
    return all(G.mul(a, b) == G.mul(b, a) for a, b in itertools.combinations(A.sorted(), 2))


def free_group_sweep(trials: int = 100, seed: int = 0, max_size: int = 50, max_length: int = 4) -> Report:
    """
    Random A in free-group(2) with n in {3, 4}, plus the extremal example with N = 10

    Samples that are too small or commute are redrawn, up to FREE_SWEEP_REDRAWS
    times per trial; a trial that never draws a usable set is reported as skipped.
    """
    rng = random.Random(seed)
    G = make_group(GroupSpec(kind="free-group", param=2))
    checked = redrawn = skipped = 0
    for t in range(trials):
        n = 3 if t % 2 == 0 else 4
        # keep |A|^n within the product caps
        limit = max_size if n == 3 else min(max_size, 12)
        for attempt in range(config.FREE_SWEEP_REDRAWS + 1):
            A = _random_free_set(G, rng, rng.randint(2, limit), max_length)
            if len(A) >= 2 and not _commutative(A):
                break
        else:
            skipped += 1
            logger.warning(f"free group trial {t}: no noncommuting sample after {attempt + 1} draws")
            continue
        redrawn += attempt
        free_group_bounds(A, n)
        checked += 1

    extremal = extremal_free_set(10)
    cube = len(power_set(extremal, 3))
    ratio = Fraction(cube, len(extremal) ** 2)
    check(Fraction(1, 5) <= ratio <= 5, "extremal example does not grow like |A|^2", ratio=str(ratio))
    return Report(
        name="safin",
        values={
            "trials": trials,
            "checked": checked,
            "redrawn": redrawn,
            "skipped": skipped,
            "seed": seed,
            "extremal_size": len(extremal),
            "extremal_cube": cube,
            "extremal_ratio": ratio,
            "violations": 0,
        },
    )
