"""
The mod-p equivariant quantum connection of T*(G/B).

Quantum multiplication by a divisor b is

    b cup  +  hbar * sum_{beta > 0} <b, beta^vee> q^{beta^vee} / (1 - q^{beta^vee}) ([s_beta] - 1)

and the connection is nabla_b = t d_b + sign * (b *). Matrices live in the
stable basis unless stated otherwise.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from sympy.polys.polyerrors import ExactQuotientFailed
from sympy.polys.rings import PolyElement

from .errors import ConfigError, ConventionError, WeylGateError
from .exactring import NovikovSeries, RatFun, format_value, geometric_expand, h_component, is_linear_form, specialize
from .gkm import GkmClass, GkmModel
from .linalg import Mat, diagonal, from_rows, identity, mat_add, mat_mul, mat_power, mat_scale, mat_sub
from .rootdata import PositiveRoot, Weight, fundamental_weight
from .stable import StabBasis, change_basis, change_basis_inverse, demazure_lusztig, stable_coordinates

logger = logging.getLogger(__name__)

WEYL_MODES = ("su-corrected", "literal")


@dataclass(frozen=True)
class DivisorClass:
    """Weight chi with the canonical lift w -> w(chi), shifted by a constant."""

    chi: Weight
    shift: Optional[PolyElement] = None

    def restrictions(self, model: GkmModel) -> GkmClass:
        return model.divisor_class(self.chi, self.shift)

    def shifted(self, shift: PolyElement) -> "DivisorClass":
        return DivisorClass(self.chi, shift)


@dataclass(frozen=True)
class WeylOperator:
    """Matrix of [s_beta] in the stable basis."""

    root: PositiveRoot
    mode: str
    matrix: Mat


@dataclass
class GateReport:
    """Involutivity, braid and conjugation-independence outcomes."""

    involutive: bool = True
    braid: bool = True
    conjugation: bool = True
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.involutive and self.braid and self.conjugation


@dataclass(frozen=True)
class ConnectionOperator:
    """
    nabla_b = t d_b + sign * B.

    Attributes:
        divisor: The divisor b
        B: Quantum multiplication matrix over Novikov series
        sign: +1 or -1
        basis: "stable" or "fixed-point"
        hbar: The cotangent scaling weight, +h or -h
    """

    divisor: DivisorClass
    B: Mat
    sign: int = 1
    basis: str = "stable"
    hbar: Any = None

    @property
    def matrix(self) -> Mat:
        return self.B if self.sign == 1 else mat_scale(self.B, -1)

    @property
    def order(self) -> int:
        return self.B.zero.order


def braid_order(cartan: Sequence[Sequence[int]], i: int, j: int) -> int:
    return {0: 2, 1: 3, 2: 4, 3: 6}[cartan[i][j] * cartan[j][i]]


class ConnectionBuilder:
    """
    Assembles cup products, Weyl operators and quantum multiplication for one
    solved pair of stable bases.
    """

    def __init__(self, model: GkmModel, plus: StabBasis, minus: StabBasis, order: int, weyl_mode: str = "su-corrected", nabla_sign: int = 1):
        if weyl_mode not in WEYL_MODES:
            raise ConfigError(f"weyl_mode must be one of {', '.join(WEYL_MODES)}")
        if order < 1:
            raise ConfigError("truncation must be at least 1")
        self.model = model
        self.plus = plus
        self.minus = minus
        self.order = order
        self.weyl_mode = weyl_mode
        self.nabla_sign = nabla_sign
        self.ring = model.ring
        self.system = model.system
        self.rank = model.system.rank
        self._weyl: Optional[Dict[PositiveRoot, WeylOperator]] = None
        self._fixed_weyl: Optional[Dict[PositiveRoot, Mat]] = None
        self.gates = GateReport()

    # Constants

    def series_zero(self) -> NovikovSeries:
        return NovikovSeries.zero(self.ring, self.rank, self.order)

    def series_const(self, value) -> NovikovSeries:
        return NovikovSeries.constant(self.ring, self.rank, self.order, value)

    def poly_identity(self) -> Mat:
        return identity(self.model.dim, self.ring.zero, self.ring.one)

    # Classical part

    def cup_matrix_fixed(self, divisor: DivisorClass) -> Mat:
        """diag(w(chi) + c) in the fixed-point basis."""
        values = divisor.restrictions(self.model).values
        return diagonal(values, self.ring.zero, self.ring.one, "fixed-point")

    def cup_matrix(self, divisor: DivisorClass) -> Mat:
        """Cup product by the lifted divisor, conjugated into the stable basis."""
        fixed = self.cup_matrix_fixed(divisor).map(lambda e: RatFun.from_poly(self.ring, e))
        return change_basis(self.model, fixed, self.plus, self.minus)

    # Weyl operators

    def _simple_matrix_corrected(self, i: int) -> Mat:
        n = self.model.dim
        columns = []
        for w in range(n):
            image = demazure_lusztig(self.model, i, self.plus.rows[w])
            coords = stable_coordinates(self.model, GkmClass(tuple(image)), self.minus)
            try:
                columns.append([c.to_poly() for c in coords])
            except ValueError as e:
                raise ConventionError(f"[s_{i + 1}] has non-polynomial stable coefficients") from e
        return from_rows([[columns[j][r] for j in range(n)] for r in range(n)], self.ring.zero, self.ring.one)

    def _literal_matrix(self, beta: PositiveRoot) -> Mat:
        """Column w holds -1 at w and -1 at w s_beta."""
        n = self.model.dim
        reflection = self.system.reflection(beta)
        rows = [[self.ring.zero] * n for _ in range(n)]
        for w in self.model.elements:
            col = self.model.index(w)
            rows[col][col] -= self.ring.one
            rows[self.model.index(self.system.multiply(w, reflection))][col] -= self.ring.one
        return from_rows(rows, self.ring.zero, self.ring.one)

    def _word_matrix(self, simple: Dict[int, Mat], word: Sequence[int], base: Mat) -> Mat:
        result = base
        for j in word:
            result = mat_mul(result, simple[j])
        return result

    def weyl_operators(self) -> Dict[PositiveRoot, WeylOperator]:
        """[s_beta] for every positive root, gates evaluated on first use."""
        if self._weyl is not None:
            return self._weyl
        weyl: Dict[PositiveRoot, WeylOperator] = {}
        if self.weyl_mode == "literal":
            for beta in self.system.positive_roots:
                weyl[beta] = WeylOperator(beta, self.weyl_mode, self._literal_matrix(beta))
            simple = {i: self._literal_matrix(self._simple_root(i)) for i in range(self.rank)}
            self.gates = self._check_gates(simple)
            if not self.gates.ok:
                logger.warning("literal Weyl operators fail the gates: %s", "; ".join(self.gates.failures[:3]))
        else:
            simple = {i: self._simple_matrix_corrected(i) for i in range(self.rank)}
            self.gates = self._check_gates(simple)
            for beta in self.system.positive_roots:
                weyl[beta] = WeylOperator(beta, self.weyl_mode, self._conjugated(simple, beta, self.poly_identity()))
            if not self.gates.ok:
                raise WeylGateError("su-corrected Weyl operators fail the gates", witness="; ".join(self.gates.failures))
        self._weyl = weyl
        return weyl

    def _simple_root(self, i: int) -> PositiveRoot:
        return next(beta for beta in self.system.positive_roots if beta.weight == self.system.simple_roots[i])

    def _conjugated(self, simple: Dict[int, Mat], beta: PositiveRoot, one: Mat) -> Mat:
        """rho(u) [s_i] rho(u)^-1 for u(alpha_i) = beta; independence of u is checked."""
        candidates = self.system.conjugators(beta)
        results = []
        for u, i in candidates:
            left = self._word_matrix(simple, u.word, one)
            right = self._word_matrix(simple, tuple(reversed(u.word)), one)
            results.append(mat_mul(mat_mul(left, simple[i]), right))
        first = results[0]
        if any(r.rows != first.rows for r in results[1:]):
            self.gates.conjugation = False
            self.gates.failures.append(f"[s_beta] for root {list(beta.root_coords)} depends on the conjugating element")
        return first

    def _check_gates(self, simple: Dict[int, Mat]) -> GateReport:
        report = GateReport()
        one = identity(self.model.dim, simple[0].zero, simple[0].one)
        for i, m in simple.items():
            if mat_mul(m, m).rows != one.rows:
                report.involutive = False
                report.failures.append(f"[s_{i + 1}]^2 != 1")
        for i in range(self.rank):
            for j in range(i + 1, self.rank):
                m_ij = braid_order(self.system.cartan, i, j)
                if mat_power(mat_mul(simple[i], simple[j]), m_ij).rows != one.rows:
                    report.braid = False
                    report.failures.append(f"([s_{i + 1}][s_{j + 1}])^{m_ij} != 1")
        return report

    # Fixed-point versions for the cross-basis oracle

    def _simple_matrix_fixed(self, i: int) -> Mat:
        model = self.model
        zero = RatFun.from_poly(self.ring, self.ring.zero)
        one = RatFun.from_poly(self.ring, self.ring.one)
        s = self.system.simple_reflection(i)
        rows = [[zero] * model.dim for _ in range(model.dim)]
        for v in model.elements:
            r = model.index(v)
            c = model.index(self.system.multiply(v, s))
            label = model.root_form(self.system.act(v, self.system.simple_roots[i]))
            rows[r][c] = RatFun(self.ring, -label.to_poly(self.ring) - model.hbar, [label])
            rows[r][r] = RatFun(self.ring, model.hbar, [label])
        return from_rows(rows, zero, one, "fixed-point")

    def weyl_operators_fixed(self) -> Dict[PositiveRoot, Mat]:
        if self._fixed_weyl is not None:
            return self._fixed_weyl
        if self.weyl_mode == "literal":
            fixed = {beta: change_basis_inverse(self.model, op.matrix.map(lambda e: RatFun.from_poly(self.ring, e)), self.plus, self.minus) for beta, op in self.weyl_operators().items()}
        else:
            simple = {i: self._simple_matrix_fixed(i) for i in range(self.rank)}
            one = identity(self.model.dim, simple[0].zero, simple[0].one, "fixed-point")
            fixed = {beta: self._conjugated(simple, beta, one) for beta in self.system.positive_roots}
        self._fixed_weyl = fixed
        return fixed

    # Quantum multiplication

    def _assemble(self, divisor: DivisorClass, cup: Mat, weyl: Dict[PositiveRoot, Mat], basis: str) -> Mat:
        n = self.model.dim
        to_series = self.series_const
        rows = [[to_series(cup.rows[i][j]) if cup.rows[i][j] else self.series_zero() for j in range(n)] for i in range(n)]
        hbar = self.model.hbar
        for beta, matrix in weyl.items():
            k = self.system.pair(divisor.chi, beta.coroot) % self.model.prime
            if not k:
                continue
            geom = geometric_expand(beta.coroot, self.order, self.ring)
            if not geom:
                continue
            for i in range(n):
                for j in range(n):
                    entry = matrix.rows[i][j] - (matrix.one if i == j else matrix.zero)
                    if entry:
                        rows[i][j] = rows[i][j] + geom.scale(entry * hbar * k)
        zero = self.series_zero()
        return Mat(tuple(tuple(r) for r in rows), zero, to_series(cup.one), basis)

    def quantum_mult_matrix(self, divisor: DivisorClass) -> ConnectionOperator:
        """The operator nabla_b in the stable basis, truncated at the builder order."""
        weyl = {beta: op.matrix for beta, op in self.weyl_operators().items()}
        B = self._assemble(divisor, self.cup_matrix(divisor), weyl, "stable")
        return ConnectionOperator(divisor, B, self.nabla_sign, "stable", self.model.hbar)

    def quantum_mult_matrix_fixed(self, divisor: DivisorClass) -> ConnectionOperator:
        """Same operator in the fixed-point basis, rational-function coefficients."""
        cup = self.cup_matrix_fixed(divisor).map(lambda e: RatFun.from_poly(self.ring, e))
        B = self._assemble(divisor, cup, self.weyl_operators_fixed(), "fixed-point")
        return ConnectionOperator(divisor, B, self.nabla_sign, "fixed-point", self.model.hbar)

    def fundamental_divisors(self) -> List[DivisorClass]:
        return [DivisorClass(fundamental_weight(self.system, i)) for i in range(self.rank)]


def decompose(op: ConnectionOperator) -> Tuple[Mat, Mat, Mat]:
    """
    Split B = h B0_cl + B1_cl + h B0_q.

    Raises:
        ConventionError: If the quantum part is not divisible by h
    """
    B = op.B
    ring = B.zero.ring
    cl_h, cl_lin, quantum = [], [], []
    for row in B.rows:
        r_h, r_lin, r_q = [], [], []
        for entry in row:
            const = entry.constant_term() or ring.zero
            r_lin.append(specialize(const, {"h": 0}))
            r_h.append(h_component(ring, const, 1))
            q_terms = {}
            for exp, c in entry.terms.items():
                if not any(exp):
                    continue
                try:
                    q_terms[exp] = c.exquo(ring.h)
                except ExactQuotientFailed as e:
                    raise ConventionError(f"quantum coefficient {format_value(c)} is not divisible by h") from e
            r_q.append(NovikovSeries(ring, entry.rank, entry.order, q_terms))
        cl_h.append(r_h)
        cl_lin.append(r_lin)
        quantum.append(r_q)
    return (
        from_rows(cl_h, ring.zero, ring.one),
        from_rows(cl_lin, ring.zero, ring.one),
        from_rows(quantum, B.zero, B.one),
    )


def nabla_apply(op: ConnectionOperator, section: Sequence[NovikovSeries]) -> List[NovikovSeries]:
    """t d_b(section) + sign * B * section."""
    if any(s.order != op.order for s in section):
        raise ValueError("section truncation does not match the operator")
    t = op.B.zero.ring.t
    m = op.matrix
    out = []
    for row in m.rows:
        acc = op.B.zero
        for x, y in zip(row, section):
            if x and y:
                acc = acc + x * y
        out.append(acc)
    return [acc + s.derive(op.divisor.chi).scale(t) for acc, s in zip(out, section)]


def derive_matrix(m: Mat, b: Weight) -> Mat:
    """t d_b applied entrywise."""
    t = m.zero.ring.t
    return m.map(lambda e: e.derive(b).scale(t), zero=m.zero, one=m.one)


@dataclass
class FlatnessResult:
    ok: bool
    witness: Optional[str] = None


def flatness_check(op_a: ConnectionOperator, op_b: ConnectionOperator) -> FlatnessResult:
    """t d_a M_b - t d_b M_a + [M_a, M_b] = 0 to the truncation order."""
    m_a, m_b = op_a.matrix, op_b.matrix
    curvature = mat_add(mat_sub(derive_matrix(m_b, op_a.divisor.chi), derive_matrix(m_a, op_b.divisor.chi)), mat_sub(mat_mul(m_a, m_b), mat_mul(m_b, m_a)))
    for i, row in enumerate(curvature.rows):
        for j, entry in enumerate(row):
            if entry:
                return FlatnessResult(False, f"curvature[{i}][{j}] = {format_value(entry)}")
    return FlatnessResult(True)


@dataclass
class IntegralityResult:
    ok: bool
    witnesses: List[str] = field(default_factory=list)


def integrality_check(op: ConnectionOperator) -> IntegralityResult:
    """
    Quantum coefficients must be integer multiples of h and the classical part
    a t-free linear form.
    """
    B = op.B
    ring = B.zero.ring
    result = IntegralityResult(True)
    for i, row in enumerate(B.rows):
        for j, entry in enumerate(row):
            for exp, c in entry.terms.items():
                if isinstance(c, RatFun):
                    result.ok = False
                    result.witnesses.append(f"entry [{i}][{j}] has rational coefficients")
                    break
                if not any(exp):
                    if not is_linear_form(ring, c):
                        result.ok = False
                        result.witnesses.append(f"classical entry [{i}][{j}] = {format_value(c)} is not a linear form")
                    continue
                if set(c.keys()) - {ring.h.LM}:
                    result.ok = False
                    result.witnesses.append(f"quantum entry [{i}][{j}] at q{list(exp)} = {format_value(c)} is not an integer times h")
    return result
