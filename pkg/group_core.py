"""
Group core for the approximate-group toolkit
Exact-arithmetic ambient groups with canonical element encodings.

Every element is a hashable tuple whose Python ordering is the canonical
total order used as the tie-breaker by all greedy algorithms downstream.
"""

import itertools
import json
import logging
import math
import os
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import reduce
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from sympy import Matrix, isprime

import config
from errors import InvalidInput, check, ensure_cap, require

logger = logging.getLogger(__name__)

Element = Tuple
INFINITE = math.inf

KINDS = (
    "cyclic",
    "direct-product",
    "permutation",
    "matrix-mod-q",
    "psl2",
    "heisenberg-Z",
    "free-abelian",
    "free-group",
    "fp-ring",
)

# JSON name of the integer parameter carried by each kind
PARAM_NAMES = {
    "cyclic": "n",
    "permutation": "degree",
    "matrix-mod-q": "dimension",
    "psl2": "p",
    "free-abelian": "d",
    "free-group": "rank",
    "fp-ring": "p",
}

ALLOWED_FIELDS = {
    "cyclic": {"n"},
    "direct-product": {"factors"},
    "permutation": {"degree", "generators"},
    "matrix-mod-q": {"dimension", "modulus", "generators"},
    "psl2": {"p"},
    "heisenberg-Z": set(),
    "free-abelian": {"d"},
    "free-group": {"rank"},
    "fp-ring": {"p"},
}


def freeze(value: Any) -> Any:
    """Turn nested lists into nested tuples so literals become hashable"""
    if isinstance(value, (list, tuple)):
        return tuple(freeze(v) for v in value)
    return value


def thaw(value: Any) -> Any:
    """Inverse of freeze, for JSON output"""
    if isinstance(value, tuple):
        return [thaw(v) for v in value]
    return value


# ---------------------------------------------------------------------------
# Group specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupSpec:
    """Serializable description of an ambient group"""

    kind: str
    param: int = 0
    modulus: int = 0
    generators: Tuple = ()
    factors: Tuple["GroupSpec", ...] = ()

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "GroupSpec":
        """
        Build a spec from its JSON object form

        Args:
            data: {"kind": "...", ...parameters}

        Returns:
            GroupSpec

        Raises:
            InvalidInput naming the offending field
        """
        require(isinstance(data, dict), "group spec must be a JSON object")
        kind = data.get("kind")
        require(kind in KINDS, f"group spec field 'kind': unknown kind {kind!r}", field="kind")
        for name in data:
            if name != "kind" and name not in ALLOWED_FIELDS[kind]:
                raise InvalidInput(
                    f"group spec field '{name}' is not accepted by kind {kind}", {"field": name}
                )

        if kind == "direct-product":
            factors = data.get("factors")
            require(
                isinstance(factors, list) and len(factors) >= 1,
                "group spec field 'factors' must be a nonempty list",
                field="factors",
            )
            return cls(kind=kind, factors=tuple(cls.from_json(f) for f in factors))

        param = 0
        if kind in PARAM_NAMES:
            name = PARAM_NAMES[kind]
            param = data.get(name)
            require(
                isinstance(param, int) and not isinstance(param, bool) and param >= 1,
                f"group spec field '{name}' must be a positive integer",
                field=name,
            )

        modulus = 0
        if kind == "matrix-mod-q":
            modulus = data.get("modulus")
            require(
                isinstance(modulus, int) and modulus >= 1,
                "group spec field 'modulus' must be a positive integer",
                field="modulus",
            )

        generators: Tuple = ()
        if kind in ("permutation", "matrix-mod-q"):
            raw = data.get("generators")
            require(
                isinstance(raw, list) and len(raw) >= 1,
                "group spec field 'generators' must be a nonempty list",
                field="generators",
            )
            generators = freeze(raw)

        return cls(kind=kind, param=param, modulus=modulus, generators=generators)

    def to_json(self) -> Dict[str, Any]:
        """JSON object form, inverse of from_json"""
        data: Dict[str, Any] = {"kind": self.kind}
        if self.kind == "direct-product":
            data["factors"] = [f.to_json() for f in self.factors]
            return data
        if self.kind in PARAM_NAMES:
            data[PARAM_NAMES[self.kind]] = self.param
        if self.kind == "matrix-mod-q":
            data["modulus"] = self.modulus
        if self.generators:
            data["generators"] = thaw(self.generators)
        return data

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """
        Parse a group spec given inline as JSON, as a path to a JSON file,
        or in short form (cyclic:6, psl2:5, symmetric:4, cyclic:24*cyclic:2, ...)
        """
        text = text.strip()
        if text.startswith("{"):
            try:
                return cls.from_json(json.loads(text))
            except json.JSONDecodeError as e:
                raise InvalidInput(f"group spec is not valid JSON: {e}")
        if text.endswith(".json") and os.path.exists(text):
            with open(text, "r", encoding="utf-8") as f:
                return cls.from_json(json.load(f))
        if "*" in text:
            return cls(kind="direct-product", factors=tuple(cls.parse(t) for t in text.split("*")))
        return short_form_spec(text)

    def label(self) -> str:
        """Short human-readable name used in reports"""
        if self.kind == "direct-product":
            return "*".join(f.label() for f in self.factors)
        if self.kind in ("permutation", "matrix-mod-q"):
            return f"{self.kind}:{self.param}:{len(self.generators)}gens"
        if self.kind in PARAM_NAMES:
            return f"{self.kind}:{self.param}"
        return self.kind


def _short_int(name: str, arg: Optional[str]) -> int:
    try:
        return int(arg)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise InvalidInput(f"group spec '{name}' needs an integer argument, got {arg!r}", {"field": name})


def short_form_spec(text: str) -> GroupSpec:
    """Resolve a short-form group name such as psl2:5 or quaternion"""
    name, _, arg = text.partition(":")
    arg = arg or None
    if name in ("heisenberg", "heisenberg-Z"):
        return GroupSpec(kind="heisenberg-Z")
    if name == "quaternion":
        return quaternion_group()
    if name == "symmetric":
        return symmetric_group(_short_int(name, arg))
    if name == "dihedral":
        return dihedral_group(_short_int(name, arg))
    if name == "heisenberg-mod":
        return heisenberg_mod(_short_int(name, arg))
    if name in PARAM_NAMES and name not in ("permutation", "matrix-mod-q"):
        return GroupSpec.from_json({"kind": name, PARAM_NAMES[name]: _short_int(name, arg)})
    raise InvalidInput(f"group spec field 'kind': unknown group name {name!r}", {"field": "kind"})


def symmetric_group(n: int) -> GroupSpec:
    """S_n as a permutation group generated by (0 1) and (0 1 ... n-1)"""
    require(n >= 1, "symmetric group degree must be positive")
    transposition = list(range(n))
    if n >= 2:
        transposition[0], transposition[1] = 1, 0
    cycle = [(i + 1) % n for i in range(n)]
    return GroupSpec(kind="permutation", param=n, generators=freeze([transposition, cycle]))


def dihedral_group(n: int) -> GroupSpec:
    """Symmetries of the n-gon (order 2n) acting on its vertices"""
    require(n >= 3, "dihedral group needs n >= 3")
    rotation = [(i + 1) % n for i in range(n)]
    reflection = [(-i) % n for i in range(n)]
    return GroupSpec(kind="permutation", param=n, generators=freeze([rotation, reflection]))


def quaternion_group() -> GroupSpec:
    """Q8 inside SL2(F3): i = [[0,-1],[1,0]], j = [[1,1],[1,-1]]"""
    return GroupSpec(
        kind="matrix-mod-q",
        param=2,
        modulus=3,
        generators=freeze([[[0, 2], [1, 0]], [[1, 1], [1, 2]]]),
    )


def heisenberg_mod(n: int) -> GroupSpec:
    """H3(Z/nZ), generated by the two elementary unitriangular 3x3 matrices"""
    require(n >= 2, "heisenberg-mod needs modulus >= 2")
    x = [[1, 1, 0], [0, 1, 0], [0, 0, 1]]
    y = [[1, 0, 0], [0, 1, 1], [0, 0, 1]]
    return GroupSpec(kind="matrix-mod-q", param=3, modulus=n, generators=freeze([x, y]))


# ---------------------------------------------------------------------------
# Group handles
# ---------------------------------------------------------------------------

class GroupHandle(ABC):
    """An ambient group with canonical encodings and exact arithmetic"""

    kind = ""
    torsion_free = False
    abelian = False

    def __init__(self, spec: GroupSpec):
        self.spec = spec
        self._order: Optional[int] = None

    @property
    @abstractmethod
    def identity(self) -> Element:
        ...

    @property
    @abstractmethod
    def finite(self) -> bool:
        ...

    @abstractmethod
    def mul(self, a: Element, b: Element) -> Element:
        ...

    @abstractmethod
    def inv(self, a: Element) -> Element:
        ...

    @abstractmethod
    def canonicalize(self, raw: Any) -> Element:
        """Turn a literal (ints / nested lists) into the canonical encoding"""

    @abstractmethod
    def is_canonical(self, g: Any) -> bool:
        ...

    def literal(self, g: Element) -> Any:
        return list(g)

    def standard_generators(self) -> List[Element]:
        """Default generating set (not symmetrized)"""
        return []

    @property
    def order(self) -> Optional[int]:
        """Group order for finite kinds, None otherwise"""
        if not self.finite:
            return None
        if self._order is None:
            self._order = len(self.elements())
        return self._order

    def elements(self) -> List[Element]:
        """All elements in canonical order (finite groups only)"""
        require(self.finite, f"{self.spec.label()} is infinite; cannot list its elements")
        found = _closure(self, self.standard_generators(), config.CAP_ELEMENTS, "group enumeration")
        return sorted(found)

    def power(self, g: Element, k: int) -> Element:
        if k < 0:
            return self.power(self.inv(g), -k)
        result = self.identity
        base = g
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def commutator(self, g: Element, h: Element) -> Element:
        """[g, h] = g h g^-1 h^-1"""
        return self.mul(self.mul(g, h), self.mul(self.inv(g), self.inv(h)))

    def conjugate(self, s: Element, g: Element) -> Element:
        """g s g^-1"""
        return self.mul(self.mul(g, s), self.inv(g))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GroupHandle) and self.spec == other.spec

    def __hash__(self) -> int:
        return hash(self.spec)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.spec.label()}>"


def _closure(G: GroupHandle, generators: Iterable[Element], cap: int, what: str) -> set:
    """Elements of the subgroup generated by `generators`, by BFS on right multiplication"""
    gens = set(generators)
    gens |= {G.inv(s) for s in gens}
    gens.discard(G.identity)
    steps = sorted(gens)
    found = {G.identity}
    frontier = [G.identity]
    while frontier:
        nxt = []
        for g in frontier:
            for s in steps:
                h = G.mul(g, s)
                if h not in found:
                    found.add(h)
                    nxt.append(h)
        ensure_cap(len(found), cap, what)
        frontier = nxt
    return found


class CyclicGroup(GroupHandle):
    kind = "cyclic"
    abelian = True

    def __init__(self, spec: GroupSpec):
        super().__init__(spec)
        self.n = spec.param
        self._order = self.n

    @property
    def identity(self) -> Element:
        return (0,)

    @property
    def finite(self) -> bool:
        return True

    def mul(self, a: Element, b: Element) -> Element:
        return ((a[0] + b[0]) % self.n,)

    def inv(self, a: Element) -> Element:
        return ((-a[0]) % self.n,)

    def canonicalize(self, raw: Any) -> Element:
        if isinstance(raw, (list, tuple)):
            require(len(raw) == 1, "cyclic literal must be an integer or a one-element array")
            raw = raw[0]
        require(isinstance(raw, int) and not isinstance(raw, bool), f"bad cyclic literal {raw!r}")
        return (raw % self.n,)

    def is_canonical(self, g: Any) -> bool:
        return isinstance(g, tuple) and len(g) == 1 and isinstance(g[0], int) and 0 <= g[0] < self.n

    def literal(self, g: Element) -> Any:
        return g[0]

    def standard_generators(self) -> List[Element]:
        return [(1 % self.n,)]

    def elements(self) -> List[Element]:
        return [(k,) for k in range(self.n)]


class DirectProduct(GroupHandle):
    kind = "direct-product"

    def __init__(self, spec: GroupSpec, factors: List[GroupHandle]):
        super().__init__(spec)
        self.factors = factors
        self.abelian = all(f.abelian for f in factors)
        self.torsion_free = all(f.torsion_free for f in factors)

    @property
    def identity(self) -> Element:
        return tuple(f.identity for f in self.factors)

    @property
    def finite(self) -> bool:
        return all(f.finite for f in self.factors)

    @property
    def order(self) -> Optional[int]:
        if not self.finite:
            return None
        return math.prod(f.order for f in self.factors)

    def mul(self, a: Element, b: Element) -> Element:
        return tuple(f.mul(x, y) for f, x, y in zip(self.factors, a, b))

    def inv(self, a: Element) -> Element:
        return tuple(f.inv(x) for f, x in zip(self.factors, a))

    def canonicalize(self, raw: Any) -> Element:
        require(
            isinstance(raw, (list, tuple)) and len(raw) == len(self.factors),
            f"direct-product literal needs {len(self.factors)} components",
        )
        return tuple(f.canonicalize(x) for f, x in zip(self.factors, raw))

    def is_canonical(self, g: Any) -> bool:
        return (
            isinstance(g, tuple)
            and len(g) == len(self.factors)
            and all(f.is_canonical(x) for f, x in zip(self.factors, g))
        )

    def literal(self, g: Element) -> Any:
        return [f.literal(x) for f, x in zip(self.factors, g)]

    def standard_generators(self) -> List[Element]:
        gens = []
        for i, f in enumerate(self.factors):
            for s in f.standard_generators():
                g = list(self.identity)
                g[i] = s
                gens.append(tuple(g))
        return gens

    def elements(self) -> List[Element]:
        require(self.finite, f"{self.spec.label()} is infinite; cannot list its elements")
        ensure_cap(self.order, config.CAP_ELEMENTS, "group enumeration")
        return sorted(itertools.product(*(f.elements() for f in self.factors)))


class PermutationGroup(GroupHandle):
    """Subgroup of S_m generated by the given image arrays (0-indexed)"""

    kind = "permutation"

    def __init__(self, spec: GroupSpec):
        super().__init__(spec)
        self.degree = spec.param
        self.generators = [self.canonicalize(g) for g in spec.generators]

    @property
    def identity(self) -> Element:
        return tuple(range(self.degree))

    @property
    def finite(self) -> bool:
        return True

    def mul(self, a: Element, b: Element) -> Element:
        # (a b)(i) = a(b(i))
        return tuple(a[i] for i in b)

    def inv(self, a: Element) -> Element:
        result = [0] * len(a)
        for i, image in enumerate(a):
            result[image] = i
        return tuple(result)

    def canonicalize(self, raw: Any) -> Element:
        require(isinstance(raw, (list, tuple)), f"permutation literal must be an image array, got {raw!r}")
        images = tuple(raw)
        require(
            len(images) == self.degree and sorted(images) == list(range(self.degree)),
            f"invalid generator: {list(images)} is not a permutation of degree {self.degree}",
        )
        return images

    def is_canonical(self, g: Any) -> bool:
        return isinstance(g, tuple) and len(g) == self.degree and sorted(g) == list(range(self.degree))

    def standard_generators(self) -> List[Element]:
        return list(self.generators)


class MatrixGroup(GroupHandle):
    """Subgroup of GL_n(Z/qZ) generated by the given matrices (row-major residues)"""

    kind = "matrix-mod-q"

    def __init__(self, spec: GroupSpec):
        super().__init__(spec)
        self.dimension = spec.param
        self.modulus = spec.modulus
        self._inverses: Dict[Element, Element] = {}
        self.generators = [self.canonicalize(g) for g in spec.generators]

    @property
    def identity(self) -> Element:
        n = self.dimension
        return tuple(1 % self.modulus if i == j else 0 for i in range(n) for j in range(n))

    @property
    def finite(self) -> bool:
        return True

    def mul(self, a: Element, b: Element) -> Element:
        n, q = self.dimension, self.modulus
        return tuple(
            sum(a[i * n + k] * b[k * n + j] for k in range(n)) % q
            for i in range(n)
            for j in range(n)
        )

    def inv(self, a: Element) -> Element:
        cached = self._inverses.get(a)
        if cached is None:
            n = self.dimension
            inverse = Matrix(n, n, list(a)).inv_mod(self.modulus)
            cached = tuple(int(x) % self.modulus for x in inverse)
            self._inverses[a] = cached
        return cached

    def canonicalize(self, raw: Any) -> Element:
        n, q = self.dimension, self.modulus
        require(isinstance(raw, (list, tuple)), f"matrix literal must be an array, got {raw!r}")
        flat = list(itertools.chain.from_iterable(raw)) if raw and isinstance(raw[0], (list, tuple)) else list(raw)
        require(len(flat) == n * n, f"matrix literal needs {n * n} entries")
        entries = tuple(int(x) % q for x in flat)
        det = int(Matrix(n, n, list(entries)).det()) % q
        require(math.gcd(det, q) == 1, f"invalid generator: matrix {list(entries)} is not invertible mod {q}")
        return entries

    def is_canonical(self, g: Any) -> bool:
        n, q = self.dimension, self.modulus
        if not (isinstance(g, tuple) and len(g) == n * n and all(isinstance(x, int) and 0 <= x < q for x in g)):
            return False
        return math.gcd(int(Matrix(n, n, list(g)).det()) % q, q) == 1

    def literal(self, g: Element) -> Any:
        n = self.dimension
        return [list(g[i * n:(i + 1) * n]) for i in range(n)]

    def standard_generators(self) -> List[Element]:
        return list(self.generators)


class PSL2Group(GroupHandle):
    """PSL2(p): 2x2 determinant-one matrices mod p up to sign"""

    kind = "psl2"

    def __init__(self, spec: GroupSpec):
        super().__init__(spec)
        self.p = spec.param
        self._order = self.p * (self.p * self.p - 1) // 2

    def normalize(self, entries: Sequence[int]) -> Element:
        """Pick the sign making the first nonzero entry at most (p-1)/2"""
        p = self.p
        m = tuple(x % p for x in entries)
        for x in m:
            if x:
                if x > (p - 1) // 2:
                    return tuple((-y) % p for y in m)
                break
        return m

    @property
    def identity(self) -> Element:
        return (1, 0, 0, 1)

    @property
    def finite(self) -> bool:
        return True

    def mul(self, a: Element, b: Element) -> Element:
        return self.normalize((
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ))

    def inv(self, a: Element) -> Element:
        return self.normalize((a[3], -a[1], -a[2], a[0]))

    def canonicalize(self, raw: Any) -> Element:
        require(isinstance(raw, (list, tuple)), f"psl2 literal must be an array, got {raw!r}")
        flat = list(itertools.chain.from_iterable(raw)) if raw and isinstance(raw[0], (list, tuple)) else list(raw)
        require(len(flat) == 4, "psl2 literal needs 4 entries")
        a, b, c, d = (int(x) % self.p for x in flat)
        require((a * d - b * c) % self.p == 1, f"psl2 literal {flat} does not have determinant 1 mod {self.p}")
        return self.normalize((a, b, c, d))

    def is_canonical(self, g: Any) -> bool:
        if not (isinstance(g, tuple) and len(g) == 4 and all(isinstance(x, int) and 0 <= x < self.p for x in g)):
            return False
        return (g[0] * g[3] - g[1] * g[2]) % self.p == 1 and self.normalize(g) == g

    def literal(self, g: Element) -> Any:
        return [[g[0], g[1]], [g[2], g[3]]]

    def standard_generators(self) -> List[Element]:
        # U and its transpose L; their inverses come from symmetrization
        return [self.normalize((1, 1, 0, 1)), self.normalize((1, 0, 1, 1))]


class HeisenbergGroup(GroupHandle):
    """Integer unitriangular 3x3 matrices, encoded as (x, y, z)"""

    kind = "heisenberg-Z"
    torsion_free = True

    @property
    def identity(self) -> Element:
        return (0, 0, 0)

    @property
    def finite(self) -> bool:
        return False

    def mul(self, a: Element, b: Element) -> Element:
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])

    def inv(self, a: Element) -> Element:
        return (-a[0], -a[1], -a[2] + a[0] * a[1])

    def canonicalize(self, raw: Any) -> Element:
        require(
            isinstance(raw, (list, tuple)) and len(raw) == 3 and all(isinstance(x, int) for x in raw),
            f"heisenberg literal must be [x, y, z], got {raw!r}",
        )
        return tuple(raw)

    def is_canonical(self, g: Any) -> bool:
        return isinstance(g, tuple) and len(g) == 3 and all(isinstance(x, int) and not isinstance(x, bool) for x in g)

    def standard_generators(self) -> List[Element]:
        return [(1, 0, 0), (0, 1, 0)]


class FreeAbelianGroup(GroupHandle):
    kind = "free-abelian"
    torsion_free = True
    abelian = True

    def __init__(self, spec: GroupSpec):
        super().__init__(spec)
        self.d = spec.param

    @property
    def identity(self) -> Element:
        return (0,) * self.d

    @property
    def finite(self) -> bool:
        return False

    def mul(self, a: Element, b: Element) -> Element:
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a: Element) -> Element:
        return tuple(-x for x in a)

    def canonicalize(self, raw: Any) -> Element:
        if isinstance(raw, int) and not isinstance(raw, bool) and self.d == 1:
            return (raw,)
        require(
            isinstance(raw, (list, tuple)) and len(raw) == self.d and all(isinstance(x, int) for x in raw),
            f"free-abelian literal must be {self.d} integers, got {raw!r}",
        )
        return tuple(raw)

    def is_canonical(self, g: Any) -> bool:
        return isinstance(g, tuple) and len(g) == self.d and all(isinstance(x, int) and not isinstance(x, bool) for x in g)

    def literal(self, g: Element) -> Any:
        return g[0] if self.d == 1 else list(g)

    def standard_generators(self) -> List[Element]:
        return [tuple(1 if i == j else 0 for j in range(self.d)) for i in range(self.d)]


class FreeGroup(GroupHandle):
    """Free group on letters 1..rank; words are freely reduced tuples of signed letters"""

    kind = "free-group"
    torsion_free = True

    def __init__(self, spec: GroupSpec):
        super().__init__(spec)
        self.rank = spec.param

    @property
    def identity(self) -> Element:
        return ()

    @property
    def finite(self) -> bool:
        return False

    def mul(self, a: Element, b: Element) -> Element:
        # both factors are reduced, so cancellation only happens at the junction
        i = 0
        la, lb = len(a), len(b)
        while i < la and i < lb and a[la - 1 - i] == -b[i]:
            i += 1
        return a[:la - i] + b[i:]

    def inv(self, a: Element) -> Element:
        return tuple(-x for x in reversed(a))

    def canonicalize(self, raw: Any) -> Element:
        require(isinstance(raw, (list, tuple)), f"free-group literal must be a word array, got {raw!r}")
        stack: List[int] = []
        for letter in raw:
            require(
                isinstance(letter, int) and letter != 0 and abs(letter) <= self.rank,
                f"bad letter {letter!r} for free group of rank {self.rank}",
            )
            if stack and stack[-1] == -letter:
                stack.pop()
            else:
                stack.append(letter)
        return tuple(stack)

    def is_canonical(self, g: Any) -> bool:
        if not isinstance(g, tuple):
            return False
        for i, letter in enumerate(g):
            if not (isinstance(letter, int) and letter != 0 and abs(letter) <= self.rank):
                return False
            if i and g[i - 1] == -letter:
                return False
        return True

    def standard_generators(self) -> List[Element]:
        return [(i,) for i in range(1, self.rank + 1)]


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def make_group(spec: GroupSpec) -> GroupHandle:
    """
    Construct a group handle, enforcing the desk-scale caps

    Args:
        spec: the group description

    Returns:
        GroupHandle with working identity, multiplication and inversion

    Raises:
        CapExceeded: a parameter is over its configured cap
        InvalidInput: invalid parameter or generator, or an fp-ring spec
    """
    kind = spec.kind
    if kind == "cyclic":
        return CyclicGroup(spec)
    if kind == "direct-product":
        return DirectProduct(spec, [make_group(f) for f in spec.factors])
    if kind == "permutation":
        ensure_cap(spec.param, config.MAX_PERMUTATION_DEGREE, "permutation degree")
        return PermutationGroup(spec)
    if kind == "matrix-mod-q":
        require(spec.modulus >= config.MIN_MATRIX_MODULUS, f"matrix modulus must be >= {config.MIN_MATRIX_MODULUS}")
        ensure_cap(spec.param, config.MAX_MATRIX_DIMENSION, "matrix dimension")
        return MatrixGroup(spec)
    if kind == "psl2":
        p = spec.param
        require(p % 2 == 1 and isprime(p), f"psl2 needs an odd prime, got {p}", field="p")
        ensure_cap(p, config.MAX_PSL2_PRIME, "psl2 prime")
        return PSL2Group(spec)
    if kind == "heisenberg-Z":
        return HeisenbergGroup(spec)
    if kind == "free-abelian":
        ensure_cap(spec.param, config.MAX_FREE_ABELIAN_RANK, "free-abelian rank")
        return FreeAbelianGroup(spec)
    if kind == "free-group":
        ensure_cap(spec.param, config.MAX_FREE_RANK, "free-group rank")
        return FreeGroup(spec)
    if kind == "fp-ring":
        raise InvalidInput("fp-ring is a ring, not a group; it is accepted only by sum-product statistics")
    raise InvalidInput(f"group spec field 'kind': unknown kind {kind!r}", {"field": "kind"})


def arith(G: GroupHandle, op: str, *args: Any) -> Element:
    """
    Group law entry point with input validation

    Args:
        G: the ambient group
        op: one of mul, inv, canonicalize
        args: canonical elements (a raw literal for canonicalize)
    """
    if op == "canonicalize":
        require(len(args) == 1, "canonicalize takes one literal")
        return G.canonicalize(args[0])
    for g in args:
        require(G.is_canonical(g), f"element {g!r} does not belong to {G.spec.label()} in canonical form")
    if op == "mul":
        require(len(args) >= 1, "mul needs at least one element")
        return reduce(G.mul, args)
    if op == "inv":
        require(len(args) == 1, "inv takes one element")
        return G.inv(args[0])
    raise InvalidInput(f"unknown group operation {op!r}")


def element_order(G: GroupHandle, g: Element, cap: Optional[int] = None) -> float:
    """Least n >= 1 with g^n = identity, or INFINITE"""
    if g == G.identity:
        return 1
    if G.torsion_free:
        return INFINITE
    cap = config.CAP_ORDER_SEARCH if cap is None else cap
    h = g
    n = 1
    while n <= cap:
        if h == G.identity:
            return n
        h = G.mul(h, g)
        n += 1
    logger.warning(f"element order search stopped at cap {cap}")
    return INFINITE


# ---------------------------------------------------------------------------
# Element sets
# ---------------------------------------------------------------------------

class ElementSet:
    """
    Finite set of canonical elements of one group

    Immutable; caches its canonical ordering and its powers.
    """

    __slots__ = ("group", "_elements", "_sorted", "_powers")

    def __init__(self, group: GroupHandle, elements: Iterable[Element] = (), validate: bool = True):
        items = frozenset(elements)
        if validate:
            for g in items:
                require(g is not None and group.is_canonical(g), f"element {g!r} is not a canonical element of {group.spec.label()}")
        self.group = group
        self._elements = items
        self._sorted: Optional[Tuple[Element, ...]] = None
        self._powers: Dict[int, "ElementSet"] = {}

    @classmethod
    def from_literals(cls, group: GroupHandle, literals: Iterable[Any]) -> "ElementSet":
        return cls(group, (group.canonicalize(x) for x in literals), validate=False)

    @property
    def elements(self) -> frozenset:
        return self._elements

    @property
    def power_cache(self) -> Dict[int, "ElementSet"]:
        """Memoized powers A^k, filled by setcalc.power_set"""
        return self._powers

    def sorted(self) -> Tuple[Element, ...]:
        """Elements in canonical order"""
        if self._sorted is None:
            self._sorted = tuple(sorted(self._elements))
        return self._sorted

    def __len__(self) -> int:
        return len(self._elements)

    def __contains__(self, g: object) -> bool:
        return g in self._elements

    def __iter__(self) -> Iterator[Element]:
        return iter(self.sorted())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ElementSet) and self.group == other.group and self._elements == other._elements

    def __hash__(self) -> int:
        return hash((self.group.spec, self._elements))

    def __repr__(self) -> str:
        return f"ElementSet({self.group.spec.label()}, size={len(self)})"

    def _same_group(self, other: "ElementSet") -> None:
        require(self.group == other.group, "group mismatch between element sets")

    def min(self) -> Element:
        require(len(self) > 0, "empty set has no canonical-least element")
        return self.sorted()[0]

    def inverse(self) -> "ElementSet":
        inv = self.group.inv
        return ElementSet(self.group, (inv(g) for g in self._elements), validate=False)

    def union(self, other: "ElementSet") -> "ElementSet":
        self._same_group(other)
        return ElementSet(self.group, self._elements | other._elements, validate=False)

    def intersection(self, other: "ElementSet") -> "ElementSet":
        self._same_group(other)
        return ElementSet(self.group, self._elements & other._elements, validate=False)

    def issubset(self, other: "ElementSet") -> bool:
        self._same_group(other)
        return self._elements <= other._elements

    def left_translate(self, g: Element) -> "ElementSet":
        mul = self.group.mul
        return ElementSet(self.group, (mul(g, a) for a in self._elements), validate=False)

    def right_translate(self, g: Element) -> "ElementSet":
        mul = self.group.mul
        return ElementSet(self.group, (mul(a, g) for a in self._elements), validate=False)

    def contains_identity(self) -> bool:
        return self.group.identity in self._elements

    def is_symmetric(self) -> bool:
        inv = self.group.inv
        return all(inv(g) in self._elements for g in self._elements)

    def is_subgroup(self) -> bool:
        """Closed under multiplication and inversion, and nonempty"""
        if not self._elements or not self.contains_identity():
            return False
        mul, items = self.group.mul, self._elements
        return self.is_symmetric() and all(mul(a, b) in items for a in items for b in items)

    def literals(self) -> List[Any]:
        return [self.group.literal(g) for g in self.sorted()]


def whole_group(G: GroupHandle) -> ElementSet:
    return ElementSet(G, G.elements(), validate=False)


def subgroup_closure(G: GroupHandle, S: ElementSet, cap: Optional[int] = None) -> ElementSet:
    """
    Smallest subgroup containing S

    Raises:
        CapExceeded: the closure grows past the cap (infinite or too large)
    """
    require(S.group == G, "group mismatch between set and ambient group")
    cap = config.CAP_ELEMENTS if cap is None else cap
    found = _closure(G, S, cap, "subgroup closure")
    H = ElementSet(G, found, validate=False)
    check(all(G.inv(h) in found for h in found), "closure is not inverse-closed", size=len(found))
    return H


def small_group_family(max_order: int = 10) -> List[Tuple[str, GroupHandle]]:
    """Cyclic groups, S3, D4 and Q8 of order at most max_order"""
    family: List[Tuple[str, GroupHandle]] = []
    for n in range(1, max_order + 1):
        family.append((f"cyclic:{n}", make_group(GroupSpec(kind="cyclic", param=n))))
    named = [("symmetric:3", symmetric_group(3), 6), ("dihedral:4", dihedral_group(4), 8), ("quaternion", quaternion_group(), 8)]
    for name, spec, order in named:
        if order <= max_order:
            family.append((name, make_group(spec)))
    return family


def parse_elements(G: GroupHandle, text: str) -> ElementSet:
    """Parse a JSON array of element literals"""
    try:
        literals = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidInput(f"set literal is not valid JSON: {e}")
    require(isinstance(literals, list), "set literal must be a JSON array")
    return ElementSet.from_literals(G, literals)


def random_subset(elements: Sequence[Element], size: int, rng) -> List[Element]:
    """Uniform random subset of the given size (deterministic for a seeded rng)"""
    return rng.sample(list(elements), size)

