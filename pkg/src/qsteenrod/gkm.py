"""
Fixed-point model of the equivariant cohomology of T*(G/B).

Fixed points are Weyl group elements. At w the base directions carry the
weights w(alpha) and the cotangent directions hbar - w(alpha), alpha ranging
over the negative roots, hbar = +-h.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from sympy.polys.rings import PolyElement

from .errors import ChamberDegeneracyError, ConfigError, PrimeDegeneracyError
from .exactring import CoefficientRing, LinearForm, RatFun, coefficient_ring, vanishes_on
from .rootdata import PositiveRoot, RootSystem, TorusLattice, Weight, WeylElement, torus_lattice

logger = logging.getLogger(__name__)


def admissibility_problem(system: RootSystem, lattice: TorusLattice, prime: int) -> Optional[str]:
    """
    Reason why the lattice is unusable at p, or None.

    Every positive root must give a nonzero form mod p and no two positive
    roots may be proportional mod p.
    """
    forms = []
    for beta in system.positive_roots:
        coeffs = tuple(c % prime for c in lattice.root_coefficients(system, beta.weight)) + (0,)
        form = LinearForm(coeffs, prime)
        if form.is_zero:
            return f"root {list(beta.root_coords)} vanishes mod {prime}"
        for other_beta, other in forms:
            if form.proportional_to(other):
                return f"roots {list(other_beta.root_coords)} and {list(beta.root_coords)} are proportional mod {prime}"
        forms.append((beta, form))
    return None


def choose_torus(system: RootSystem, prime: int, kind: str = "auto") -> TorusLattice:
    """
    Pick the lattice of equivariant parameters.

    Raises:
        PrimeDegeneracyError: If no admissible lattice exists at this prime
    """
    if kind not in ("auto", "sc", "gl"):
        raise ConfigError(f"torus must be auto, sc or gl, not {kind}")
    candidates = ["sc", "gl"] if kind == "auto" else [kind]
    if kind == "auto" and system.spec.family != "A":
        candidates = ["sc"]
    problems = []
    for candidate in candidates:
        lattice = torus_lattice(system, candidate)
        problem = admissibility_problem(system, lattice, prime)
        if problem is None:
            if candidate != candidates[0]:
                logger.info("Using the %s torus for %s at p = %d (%s)", candidate, system.spec.name, prime, problems[-1])
            return lattice
        problems.append(f"{candidate}: {problem}")
    raise PrimeDegeneracyError(f"{system.spec.name} is degenerate at p = {prime} ({'; '.join(problems)}); choose a larger prime")


@dataclass(frozen=True)
class TangentData:
    """Base and fiber tangent weights at one fixed point, paired by index."""

    base: Tuple[LinearForm, ...]
    fiber: Tuple[LinearForm, ...]

    @property
    def all_weights(self) -> Tuple[LinearForm, ...]:
        return self.base + self.fiber


@dataclass(frozen=True)
class Edge:
    """Moment-graph edge {source, source * s_root} labeled by source(root)."""

    source: WeylElement
    target: WeylElement
    root: PositiveRoot
    label: LinearForm


@dataclass(frozen=True)
class GkmClass:
    """Restrictions to the fixed points, ordered like RootSystem.elements."""

    values: Tuple[Any, ...]

    def __getitem__(self, index: int) -> Any:
        return self.values[index]

    def __len__(self) -> int:
        return len(self.values)


class GkmModel:
    """
    Tangent weights, Euler classes and the moment graph of T*(G/B).

    Args:
        system: Root system
        prime: Characteristic
        lattice: Lattice of equivariant parameters
        h_sign: +1 or -1, the sign of the cotangent scaling weight
        chamber: Cocharacter in fundamental-coweight coordinates
    """

    def __init__(self, system: RootSystem, prime: int, lattice: TorusLattice, h_sign: int = 1, chamber: Optional[Sequence[int]] = None):
        self.system = system
        self.prime = prime
        self.lattice = lattice
        self.h_sign = h_sign
        self.chamber = tuple(chamber) if chamber else tuple(1 for _ in range(system.rank))
        if len(self.chamber) != system.rank:
            raise ConfigError(f"chamber needs {system.rank} coordinates")
        self.ring: CoefficientRing = coefficient_ring(prime, lattice.dimension)
        self.elements = system.elements
        self.negative_roots = [-beta.weight for beta in system.positive_roots]
        self._tangent = {w: self._compute_tangent(w) for w in self.elements}
        self._edges = self._compute_edges()
        self._neighbors: Dict[WeylElement, List[Tuple[WeylElement, LinearForm]]] = {w: [] for w in self.elements}
        for edge in self._edges:
            self._neighbors[edge.source].append((edge.target, edge.label))
            self._neighbors[edge.target].append((edge.source, edge.label))

    @property
    def dim(self) -> int:
        return len(self.elements)

    @property
    def hbar(self) -> PolyElement:
        return self.ring.h * self.h_sign

    def index(self, w: WeylElement) -> int:
        return self.system.index(w)

    def root_form(self, chi: Weight) -> LinearForm:
        """Linear form of a root, e.g. a tangent weight or an edge label."""
        return self.ring.form(self.lattice.root_coefficients(self.system, chi) + (0,))

    def divisor_poly(self, w: WeylElement, chi: Weight) -> PolyElement:
        """Restriction of the canonical lift of chi to the fixed point w."""
        return self.ring.form(self.lattice.weight_at(self.system, w, chi) + (0,)).to_poly(self.ring)

    def _compute_tangent(self, w: WeylElement) -> TangentData:
        base = []
        fiber = []
        for alpha in self.negative_roots:
            form = self.root_form(self.system.act(w, alpha))
            if form.is_zero:
                raise PrimeDegeneracyError(f"tangent weight {self.system.act(w, alpha).coords} at {w} vanishes mod {self.prime}")
            base.append(form)
            fiber.append(self.ring.form((0,) * self.lattice.dimension + (self.h_sign,)) - form)
        return TangentData(tuple(base), tuple(fiber))

    def _compute_edges(self) -> List[Edge]:
        edges = []
        for w in self.elements:
            for beta in self.system.positive_roots:
                v = self.system.multiply(w, self.system.reflection(beta))
                if self.index(w) < self.index(v):
                    label = self.root_form(self.system.act(w, beta.weight))
                    if label.is_zero:
                        raise PrimeDegeneracyError(f"edge label between {w} and {v} vanishes mod {self.prime}")
                    edges.append(Edge(w, v, beta, label))
        return edges

    def tangent_weights(self, w: WeylElement) -> TangentData:
        return self._tangent[w]

    def euler_forms(self, w: WeylElement) -> Tuple[LinearForm, ...]:
        return self._tangent[w].all_weights

    def euler_classes(self, w: WeylElement) -> Tuple[PolyElement, PolyElement]:
        """(e_full, e_w): product of all tangent weights, and of the fiber T-parts."""
        data = self._tangent[w]
        e_full = self.ring.one
        for form in data.all_weights:
            e_full *= form.to_poly(self.ring)
        e_w = self.ring.one
        for form in data.fiber:
            e_w *= form.t_part().to_poly(self.ring)
        return e_full, e_w

    def chamber_pairing(self, chi: Weight) -> int:
        """<chi, chamber> for a root chi."""
        return sum(r * b for r, b in zip(self.system.root_coordinates(chi), self.chamber))

    def normal_split(self, w: WeylElement, direction: int = 1) -> Tuple[Tuple[LinearForm, ...], Tuple[LinearForm, ...]]:
        """
        Split the tangent weights at w into (N_plus, N_minus).

        Direction -1 uses the opposite cocharacter.
        """
        data = self._tangent[w]
        plus, minus = [], []
        for alpha, base, fiber in zip(self.negative_roots, data.base, data.fiber):
            sign = self.chamber_pairing(self.system.act(w, alpha)) * direction
            if sign == 0:
                raise ChamberDegeneracyError(f"chamber {list(self.chamber)} is not generic: it kills {self.system.act(w, alpha).coords}")
            if sign < 0:
                minus.append(base)
                plus.append(fiber)
            else:
                plus.append(base)
                minus.append(fiber)
        return tuple(plus), tuple(minus)

    def edges(self) -> List[Edge]:
        return list(self._edges)

    def neighbors(self, w: WeylElement) -> List[Tuple[WeylElement, LinearForm]]:
        return list(self._neighbors[w])

    def gkm_check(self, cls: GkmClass) -> bool:
        """True iff every edge congruence f_w = f_v mod label holds."""
        for edge in self._edges:
            diff = cls[self.index(edge.source)] - cls[self.index(edge.target)]
            if not vanishes_on(self.ring, diff, edge.label):
                return False
        return True

    def loc_pairing(self, x: GkmClass, y: GkmClass) -> RatFun:
        """sum_w x|_w y|_w / e_full(w), reduced."""
        total = RatFun.from_poly(self.ring, self.ring.zero)
        for k, w in enumerate(self.elements):
            if not x[k] or not y[k]:
                continue
            total = total + RatFun(self.ring, x[k] * y[k], self.euler_forms(w))
        return total

    def divisor_class(self, chi: Weight, shift: Optional[PolyElement] = None) -> GkmClass:
        """Canonical equivariant lift w -> w(chi), plus an optional constant."""
        extra = shift if shift is not None else self.ring.zero
        return GkmClass(tuple(self.divisor_poly(w, chi) + extra for w in self.elements))

    def unit_class(self) -> GkmClass:
        return GkmClass(tuple(self.ring.one for _ in self.elements))

    def twist(self, f: PolyElement, w: WeylElement) -> PolyElement:
        """Apply w to the equivariant parameters: form(chi) -> form(w chi)."""
        action = self.lattice.action(self.system, w)
        m = self.lattice.dimension
        replacements = []
        for k in range(m):
            image = self.ring.zero
            for j in range(m):
                if action[j][k]:
                    image += self.ring.lambdas[j] * action[j][k]
            replacements.append((self.ring.lambdas[k], image))
        return f.compose(replacements) if f else f


def build_gkm(system: RootSystem, prime: int, torus: str = "auto", h_sign: int = 1, chamber: Optional[Sequence[int]] = None) -> GkmModel:
    lattice = choose_torus(system, prime, torus)
    return GkmModel(system, prime, lattice, h_sign, chamber)
