"""
Root systems, Weyl groups and Bruhat order for finite types at small rank.

Weights are stored in the fundamental-weight basis of the simply connected
group, coroots in the simple-coroot basis. The Cartan matrix follows the
convention C[i][j] = <alpha_j, alpha_i^vee>, so the simple root alpha_i has
fundamental-weight coordinates given by column i.
"""

import logging
import re
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Set, Tuple

from sympy import Matrix

from .errors import ConfigError

logger = logging.getLogger(__name__)

IntMatrix = Tuple[Tuple[int, ...], ...]

SUPPORTED_FAMILIES = ("A", "B", "C", "G")
DEFAULT_MAX_RANK = 3


@dataclass(frozen=True)
class RootSystemSpec:
    """Family letter plus rank, e.g. A2."""

    family: str
    rank: int

    @property
    def name(self) -> str:
        return f"{self.family}{self.rank}"


@dataclass(frozen=True)
class Weight:
    """Integral weight in fundamental-weight coordinates."""

    coords: Tuple[int, ...]

    def __add__(self, other: "Weight") -> "Weight":
        _check_dims(self.coords, other.coords)
        return Weight(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "Weight") -> "Weight":
        return self + (-other)

    def __neg__(self) -> "Weight":
        return Weight(tuple(-a for a in self.coords))

    def scale(self, k: int) -> "Weight":
        return Weight(tuple(k * a for a in self.coords))

    @property
    def is_zero(self) -> bool:
        return not any(self.coords)


@dataclass(frozen=True)
class Coroot:
    """Element of the coroot lattice in simple-coroot coordinates."""

    coords: Tuple[int, ...]

    @property
    def height(self) -> int:
        return sum(self.coords)

    @property
    def is_positive(self) -> bool:
        return all(c >= 0 for c in self.coords) and any(self.coords)

    def scale(self, k: int) -> "Coroot":
        return Coroot(tuple(k * a for a in self.coords))


@dataclass(frozen=True)
class PositiveRoot:
    """A positive root together with its coroot."""

    root_coords: Tuple[int, ...]
    weight: Weight
    coroot: Coroot

    @property
    def height(self) -> int:
        return sum(self.root_coords)


@dataclass(frozen=True)
class WeylElement:
    """
    Element of the Weyl group.

    Equality and hashing use the action matrix only; the reduced word and
    length are memoized alongside.
    """

    action: IntMatrix
    word: Tuple[int, ...] = field(compare=False, default=())
    length: int = field(compare=False, default=0)

    def __str__(self) -> str:
        if not self.word:
            return "e"
        return "".join(f"s{i + 1}" for i in self.word)


def _check_dims(a: Sequence[int], b: Sequence[int]) -> None:
    if len(a) != len(b):
        raise ValueError(f"Dimension mismatch: {len(a)} vs {len(b)}")


def _matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    n = len(b[0])
    return tuple(tuple(sum(row[k] * b[k][j] for k in range(len(b))) for j in range(n)) for row in a)


def _matvec(a: IntMatrix, v: Sequence[int]) -> Tuple[int, ...]:
    return tuple(sum(row[k] * v[k] for k in range(len(v))) for row in a)


def _identity(n: int) -> IntMatrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def parse_root_system(text: str, max_rank: int = DEFAULT_MAX_RANK) -> RootSystemSpec:
    """
    Parse a config string such as "A2" or "g2".

    Args:
        text: Family letter followed by rank digits
        max_rank: Configurable rank ceiling

    Returns:
        Validated RootSystemSpec

    Raises:
        ConfigError: For malformed or unsupported systems
    """
    match = re.fullmatch(r"\s*([A-Za-z])\s*(\d+)\s*", text or "")
    if not match:
        raise ConfigError(f"Cannot parse root system '{text}' (expected e.g. A2)")
    spec = RootSystemSpec(match.group(1).upper(), int(match.group(2)))
    _validate_spec(spec, max_rank)
    return spec


def _validate_spec(spec: RootSystemSpec, max_rank: int) -> None:
    if spec.family not in SUPPORTED_FAMILIES:
        raise ConfigError(f"Unsupported root system family: {spec.family}")
    if spec.rank < 1 or spec.rank > max_rank:
        raise ConfigError(f"Rank {spec.rank} outside supported range 1..{max_rank}")
    if spec.family in ("B", "C") and spec.rank < 2:
        raise ConfigError(f"{spec.name} is not a valid system (rank must be at least 2)")
    if spec.family == "G" and spec.rank != 2:
        raise ConfigError("Only G2 is supported among exceptional types")


def cartan_matrix(spec: RootSystemSpec) -> IntMatrix:
    """Cartan matrix with C[i][j] = <alpha_j, alpha_i^vee>."""
    n = spec.rank
    rows = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
    if spec.family == "G":
        return ((2, -3), (-1, 2))
    for i in range(n - 1):
        rows[i][i + 1] = -1
        rows[i + 1][i] = -1
    if spec.family == "B":
        rows[n - 1][n - 2] = -2
    elif spec.family == "C":
        rows[n - 2][n - 1] = -2
    return tuple(tuple(r) for r in rows)


def validate_cartan(cartan: IntMatrix) -> None:
    """Check the generalized Cartan axioms plus finite type."""
    n = len(cartan)
    for i in range(n):
        if cartan[i][i] != 2:
            raise ConfigError("Cartan matrix must have 2 on the diagonal")
        for j in range(n):
            if i != j and (cartan[i][j] > 0 or (cartan[i][j] == 0) != (cartan[j][i] == 0)):
                raise ConfigError("Cartan matrix off-diagonal entries are invalid")
    m = Matrix(cartan)
    for k in range(1, n + 1):
        if m[:k, :k].det() <= 0:
            raise ConfigError("Cartan matrix is not of finite type")


class RootSystem:
    """
    Root datum with Weyl group, built once and then read-only.

    Attributes:
        spec: The family and rank
        cartan: Cartan matrix
        simple_roots: Simple roots as weights
        positive_roots: Positive roots sorted by height
        positive_coroots: Coroots of the positive roots, same order
        elements: Weyl group sorted by (length, word)
    """

    def __init__(self, spec: RootSystemSpec):
        self.spec = spec
        self.cartan = cartan_matrix(spec)
        validate_cartan(self.cartan)
        self.rank = spec.rank
        n = self.rank
        self.simple_roots = [Weight(tuple(self.cartan[k][i] for k in range(n))) for i in range(n)]
        self.positive_roots = self._enumerate_roots()
        self.positive_coroots = [beta.coroot for beta in self.positive_roots]
        self._root_signs: Dict[Tuple[int, ...], int] = {}
        self._root_coords: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
        for beta in self.positive_roots:
            self._root_signs[beta.weight.coords] = 1
            self._root_signs[(-beta.weight).coords] = -1
            self._root_coords[beta.weight.coords] = beta.root_coords
            self._root_coords[(-beta.weight).coords] = tuple(-x for x in beta.root_coords)
        self._simple_actions = [self._simple_reflection_matrix(i) for i in range(n)]
        self.elements = self._enumerate_group()
        self._by_action = {w.action: w for w in self.elements}
        self._index = {w: k for k, w in enumerate(self.elements)}
        self._intervals: Dict[WeylElement, Set[WeylElement]] = {}
        logger.debug("Built %s: %d positive roots, |W| = %d", spec.name, len(self.positive_roots), len(self.elements))

    @property
    def pairing_table(self) -> IntMatrix:
        """The table <varpi_i, alpha_j^vee>, always the identity."""
        return tuple(tuple(self.pair(Weight(row), Coroot(_identity(self.rank)[j])) for j in range(self.rank)) for row in _identity(self.rank))

    def root_weight(self, root_coords: Sequence[int]) -> Weight:
        """Fundamental-weight coordinates of a root given in simple-root coordinates."""
        n = self.rank
        return Weight(tuple(sum(root_coords[i] * self.cartan[j][i] for i in range(n)) for j in range(n)))

    def _enumerate_roots(self) -> List[PositiveRoot]:
        n = self.rank
        unit = _identity(n)
        seen: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
        queue = deque((unit[i], unit[i]) for i in range(n))
        while queue:
            root, coroot = queue.popleft()
            if root in seen:
                continue
            seen[root] = coroot
            for j in range(n):
                r_pair = sum(root[k] * self.cartan[j][k] for k in range(n))
                c_pair = sum(coroot[k] * self.cartan[k][j] for k in range(n))
                new_root = tuple(root[k] - (r_pair if k == j else 0) for k in range(n))
                new_coroot = tuple(coroot[k] - (c_pair if k == j else 0) for k in range(n))
                if new_root not in seen:
                    queue.append((new_root, new_coroot))
        positive = [PositiveRoot(r, self.root_weight(r), Coroot(c)) for r, c in seen.items() if all(x >= 0 for x in r)]
        positive.sort(key=lambda beta: (beta.height, tuple(-x for x in beta.root_coords)))
        return positive

    def _simple_reflection_matrix(self, i: int) -> IntMatrix:
        n = self.rank
        return tuple(tuple((1 if k == m else 0) - (self.cartan[k][i] if m == i else 0) for m in range(n)) for k in range(n))

    def _enumerate_group(self) -> List[WeylElement]:
        identity = WeylElement(_identity(self.rank), (), 0)
        found = {identity.action: identity}
        frontier = [identity]
        while frontier:
            next_frontier = []
            for w in frontier:
                for i, s in enumerate(self._simple_actions):
                    action = _matmul(w.action, s)
                    if action not in found:
                        element = WeylElement(action, w.word + (i,), w.length + 1)
                        found[action] = element
                        next_frontier.append(element)
            frontier = next_frontier
        return sorted(found.values(), key=lambda w: (w.length, w.word))

    # Group structure

    def identity(self) -> WeylElement:
        return self.elements[0]

    def longest(self) -> WeylElement:
        return self.elements[-1]

    def index(self, w: WeylElement) -> int:
        return self._index[w]

    def simple_reflection(self, i: int) -> WeylElement:
        return self._by_action[self._simple_actions[i]]

    def element_from_action(self, action: IntMatrix) -> WeylElement:
        return self._by_action[action]

    def multiply(self, x: WeylElement, y: WeylElement) -> WeylElement:
        return self._by_action[_matmul(x.action, y.action)]

    def inverse(self, w: WeylElement) -> WeylElement:
        action = _identity(self.rank)
        for i in reversed(w.word):
            action = _matmul(action, self._simple_actions[i])
        return self._by_action[action]

    def from_word(self, word: Sequence[int]) -> WeylElement:
        action = _identity(self.rank)
        for i in word:
            action = _matmul(action, self._simple_actions[i])
        return self._by_action[action]

    def elements_by_length(self) -> Dict[int, List[WeylElement]]:
        levels: Dict[int, List[WeylElement]] = {}
        for w in self.elements:
            levels.setdefault(w.length, []).append(w)
        return levels

    # Pairings and actions

    def pair(self, b: Weight, a: Coroot) -> int:
        """Bilinear pairing <b, a> with <varpi_i, alpha_j^vee> = delta_ij."""
        _check_dims(b.coords, a.coords)
        return sum(x * y for x, y in zip(b.coords, a.coords))

    def act(self, w: WeylElement, chi: Weight) -> Weight:
        _check_dims(w.action[0], chi.coords)
        return Weight(_matvec(w.action, chi.coords))

    def root_sign(self, chi: Weight) -> int:
        """+1 for a positive root, -1 for a negative root, 0 otherwise."""
        return self._root_signs.get(chi.coords, 0)

    def root_coordinates(self, chi: Weight) -> Tuple[int, ...]:
        """Simple-root coordinates of a root given as a weight."""
        if chi.coords not in self._root_coords:
            raise ValueError(f"{chi.coords} is not a root")
        return self._root_coords[chi.coords]

    def reflection(self, beta: PositiveRoot) -> WeylElement:
        """s_beta(chi) = chi - <chi, beta^vee> beta."""
        n = self.rank
        action = tuple(tuple((1 if k == m else 0) - beta.weight.coords[k] * beta.coroot.coords[m] for m in range(n)) for k in range(n))
        return self._by_action[action]

    def conjugator(self, beta: PositiveRoot) -> Tuple[WeylElement, int]:
        """Shortest u and simple index i with u(alpha_i) = beta."""
        for u in self.elements:
            for i, alpha in enumerate(self.simple_roots):
                if self.act(u, alpha) == beta.weight:
                    return u, i
        raise ValueError(f"No conjugator found for root {beta.root_coords}")

    def conjugators(self, beta: PositiveRoot) -> List[Tuple[WeylElement, int]]:
        """All pairs (u, i) with u(alpha_i) = beta."""
        return [(u, i) for u in self.elements for i, alpha in enumerate(self.simple_roots) if self.act(u, alpha) == beta.weight]

    def inversion_count(self, w: WeylElement) -> int:
        """Number of positive roots sent to negative roots."""
        return sum(1 for beta in self.positive_roots if self.root_sign(self.act(w, beta.weight)) < 0)

    # Bruhat order

    def lower_interval(self, w: WeylElement) -> Set[WeylElement]:
        """All v <= w, as products of subwords of the reduced word of w."""
        if w not in self._intervals:
            reached = {self.identity()}
            for i in w.word:
                s = self.simple_reflection(i)
                reached |= {self.multiply(x, s) for x in reached}
            self._intervals[w] = reached
        return self._intervals[w]

    def bruhat_leq(self, v: WeylElement, w: WeylElement) -> bool:
        return v in self.lower_interval(w)

    def bruhat_leq_by_reflections(self, v: WeylElement, w: WeylElement) -> bool:
        """Bruhat comparison through chains of length-decreasing reflections."""
        reflections = [self.reflection(beta) for beta in self.positive_roots]
        seen = {w}
        stack = [w]
        while stack:
            x = stack.pop()
            if x == v:
                return True
            for r in reflections:
                y = self.multiply(x, r)
                if y.length < x.length and y.length >= v.length and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False

    def describe(self) -> List[str]:
        """Human-readable root table lines."""
        lines = [f"# root system {self.spec.name}", f"cartan = {[list(r) for r in self.cartan]}", f"|W| = {len(self.elements)}"]
        for beta in self.positive_roots:
            lines.append(f"root {list(beta.root_coords)} height={beta.height} weight={list(beta.weight.coords)} coroot={list(beta.coroot.coords)}")
        return lines


@lru_cache(maxsize=None)
def build_root_system(spec: RootSystemSpec) -> RootSystem:
    """Build (and memoize) the root system for a validated spec."""
    _validate_spec(spec, max(spec.rank, DEFAULT_MAX_RANK))
    return RootSystem(spec)


@dataclass(frozen=True)
class TorusLattice:
    """
    Lattice in which equivariant parameters live.

    kind "sc" uses the fundamental weights themselves (m = rank); kind "gl"
    is only available in type A and works with the GL_{n+1} torus
    (m = rank + 1): roots become e_i - e_j and varpi_i lifts to the
    character e_1 + ... + e_i. The lift is not W-equivariant on its own, so
    divisor restrictions are computed as A_w E(chi) and roots through their
    simple-root coordinates.
    """

    kind: str
    embedding: IntMatrix

    @property
    def dimension(self) -> int:
        return len(self.embedding)

    def coefficients(self, chi: Weight) -> Tuple[int, ...]:
        """The lift E(chi) of a weight."""
        return _matvec(self.embedding, chi.coords)

    def root_coefficients(self, system: "RootSystem", chi: Weight) -> Tuple[int, ...]:
        """Coefficients of a root; alpha_i -> e_i - e_{i+1} for gl."""
        if self.kind == "sc":
            return chi.coords
        out = [0] * self.dimension
        for i, c in enumerate(system.root_coordinates(chi)):
            out[i] += c
            out[i + 1] -= c
        return tuple(out)

    def weight_at(self, system: "RootSystem", w: WeylElement, chi: Weight) -> Tuple[int, ...]:
        """A_w E(chi), the restriction of the divisor chi to the fixed point w."""
        if self.kind == "sc":
            return system.act(w, chi).coords
        return _matvec(self.action(system, w), self.coefficients(chi))

    def action(self, system: RootSystem, w: WeylElement) -> IntMatrix:
        """Matrix A_w on the lambda-lattice with E w = A_w E."""
        if self.kind == "sc":
            return w.action
        m = self.dimension
        action = _identity(m)
        for i in w.word:
            swap = [list(r) for r in _identity(m)]
            swap[i][i] = swap[i + 1][i + 1] = 0
            swap[i][i + 1] = swap[i + 1][i] = 1
            action = _matmul(action, tuple(tuple(r) for r in swap))
        return action


def torus_lattice(system: RootSystem, kind: str) -> TorusLattice:
    """Build the lattice of the given kind for the root system."""
    r = system.rank
    if kind == "sc":
        return TorusLattice("sc", _identity(r))
    if kind == "gl":
        if system.spec.family != "A":
            raise ConfigError(f"torus = gl is only available in type A, not {system.spec.name}")
        return TorusLattice("gl", tuple(tuple(1 if j <= i else 0 for i in range(r)) for j in range(r + 1)))
    raise ConfigError(f"Unknown torus kind: {kind}")


def fundamental_weight(system: RootSystem, i: int) -> Weight:
    return Weight(_identity(system.rank)[i])


def rho(system: RootSystem) -> Weight:
    return Weight(tuple(1 for _ in range(system.rank)))


def optional_weight(coords: Optional[Sequence[int]], system: RootSystem) -> Weight:
    """Weight from config coordinates, defaulting to rho."""
    if not coords:
        return rho(system)
    if len(coords) != system.rank:
        raise ConfigError(f"Divisor needs {system.rank} coordinates, got {len(coords)}")
    return Weight(tuple(int(c) for c in coords))
