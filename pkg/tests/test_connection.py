"""
Tests for quantum multiplication and the connection at A1, p = 3, plus rank
two flatness.
"""

from unittest import TestCase

from qsteenrod.connection import (
    ConnectionBuilder,
    DivisorClass,
    braid_order,
    decompose,
    derive_matrix,
    flatness_check,
    integrality_check,
    nabla_apply,
)
from qsteenrod.errors import ConfigError
from qsteenrod.exactring import NovikovSeries
from qsteenrod.gkm import build_gkm
from qsteenrod.rootdata import Weight, build_root_system, cartan_matrix, parse_root_system
from qsteenrod.stable import MINUS, PLUS, solve_stab_basis


def builder_for(name, prime, order, **kwargs):
    model = build_gkm(build_root_system(parse_root_system(name)), prime)
    plus = solve_stab_basis(model, PLUS)
    minus = solve_stab_basis(model, MINUS)
    return ConnectionBuilder(model, plus, minus, order, **kwargs)


class TestA1Connection(TestCase):
    """Test B = cup + hbar q/(1-q) ([s] - 1) for A1 at N = 2."""

    def setUp(self):
        """Build the A1 connection."""
        self.builder = builder_for("A1", 3, 2)
        self.ring = self.builder.ring
        self.l1, self.h = self.ring.lambdas[0], self.ring.h
        self.divisor = DivisorClass(Weight((1,)))
        self.op = self.builder.quantum_mult_matrix(self.divisor)

    def test_cup_matrix(self):
        """Test cup by varpi in the stable basis."""
        cup = self.builder.cup_matrix(self.divisor)
        self.assertEqual(cup.rows, ((self.l1, self.h), (self.ring.zero, -self.l1)))

    def test_su_corrected_weyl_operator(self):
        """Test [s] is the swap matrix and passes the gates."""
        ops = self.builder.weyl_operators()
        self.assertEqual(len(ops), 1)
        (op,) = ops.values()
        one, zero = self.ring.one, self.ring.zero
        self.assertEqual(op.matrix.rows, ((zero, one), (one, zero)))
        self.assertTrue(self.builder.gates.ok)

    def test_literal_weyl_operator_fails_gates(self):
        """Test the literal operator is all -1 and only warns."""
        builder = builder_for("A1", 3, 2, weyl_mode="literal")
        with self.assertLogs("qsteenrod.connection", level="WARNING"):
            ops = builder.weyl_operators()
        (op,) = ops.values()
        minus_one = -builder.ring.one
        self.assertEqual(op.matrix.rows, ((minus_one, minus_one), (minus_one, minus_one)))
        self.assertFalse(builder.gates.involutive)
        self.assertFalse(builder.gates.ok)

    def test_quantum_entries(self):
        """Test every entry of B to order q^2."""
        B = self.op.B
        h, l1 = self.h, self.l1
        expected = {
            (0, 0): {(0,): l1, (1,): -h, (2,): -h},
            (0, 1): {(0,): h, (1,): h, (2,): h},
            (1, 0): {(1,): h, (2,): h},
            (1, 1): {(0,): -l1, (1,): -h, (2,): -h},
        }
        for (i, j), terms in expected.items():
            with self.subTest(entry=(i, j)):
                self.assertEqual(B.rows[i][j].terms, terms)
        self.assertEqual(self.op.order, 2)
        self.assertEqual(self.op.basis, "stable")

    def test_decompose(self):
        """Test B = h B0_cl + B1_cl + h B0_q."""
        b0_cl, b1_cl, b0_q = decompose(self.op)
        zero, one = self.ring.zero, self.ring.one
        self.assertEqual(b0_cl.rows, ((zero, one), (zero, zero)))
        self.assertEqual(b1_cl.rows, ((self.l1, zero), (zero, -self.l1)))
        self.assertEqual(b0_q.rows[0][0].terms, {(1,): -one, (2,): -one})
        self.assertEqual(b0_q.rows[1][0].terms, {(1,): one, (2,): one})

    def test_integrality(self):
        """Test the quantum part is an integer multiple of h."""
        result = integrality_check(self.op)
        self.assertTrue(result.ok, result.witnesses)

    def test_nabla_on_constant_section(self):
        """Test nabla of a constant section is the matching column of B."""
        one = NovikovSeries.constant(self.ring, 1, 2, self.ring.one)
        zero = NovikovSeries.zero(self.ring, 1, 2)
        image = nabla_apply(self.op, [one, zero])
        self.assertEqual(image, [self.op.B.rows[0][0], self.op.B.rows[1][0]])
        with self.assertRaises(ValueError):
            nabla_apply(self.op, [NovikovSeries.zero(self.ring, 1, 3), zero])

    def test_derive_matrix(self):
        """Test t d_b weighs q^k by k."""
        derived = derive_matrix(self.op.B, Weight((1,)))
        t, h = self.ring.t, self.h
        self.assertEqual(derived.rows[0][0].terms, {(1,): -h * t, (2,): -h * t * 2})

    def test_flatness_with_itself(self):
        """Test a single operator commutes with itself."""
        self.assertTrue(flatness_check(self.op, self.op).ok)

    def test_negative_sign(self):
        """Test nabla_sign = -1 negates the operator matrix."""
        builder = builder_for("A1", 3, 2, nabla_sign=-1)
        op = builder.quantum_mult_matrix(self.divisor)
        self.assertEqual(op.matrix.rows[0][0], -self.op.B.rows[0][0])
        self.assertEqual(op.B.rows, self.op.B.rows)

    def test_bad_settings(self):
        """Test unknown Weyl modes and empty truncations are refused."""
        with self.assertRaises(ConfigError):
            builder_for("A1", 3, 2, weyl_mode="other")
        with self.assertRaises(ConfigError):
            builder_for("A1", 3, 0)


class TestBraidOrder(TestCase):
    """Test braid orders from Cartan entries."""

    def test_rank_two(self):
        """Test m_12 for A2, B2 and G2."""
        for name, expected in [("A2", 3), ("B2", 4), ("G2", 6)]:
            with self.subTest(name=name):
                self.assertEqual(braid_order(cartan_matrix(parse_root_system(name)), 0, 1), expected)
        self.assertEqual(braid_order(((2, 0), (0, 2)), 0, 1), 2)


class TestRankTwoConnection(TestCase):
    """Test gates and flatness for A2 at p = 5."""

    def setUp(self):
        """Build the A2 connection at N = 2."""
        self.builder = builder_for("A2", 5, 2)

    def test_gates(self):
        """Test involutivity, braid relation and conjugation independence."""
        self.builder.weyl_operators()
        self.assertTrue(self.builder.gates.ok, self.builder.gates.failures)

    def test_fundamental_divisors_are_flat(self):
        """Test the two fundamental operators commute up to derivatives."""
        ops = [self.builder.quantum_mult_matrix(d) for d in self.builder.fundamental_divisors()]
        result = flatness_check(ops[0], ops[1])
        self.assertTrue(result.ok, result.witness)
        for op in ops:
            self.assertTrue(integrality_check(op).ok)


class TestFlatnessAcrossTypes(TestCase):
    """Test flatness beyond A2 at low order."""

    def assert_flat(self, builder):
        ops = [builder.quantum_mult_matrix(d) for d in builder.fundamental_divisors()]
        result = flatness_check(ops[0], ops[1])
        self.assertTrue(result.ok, result.witness)

    def test_b2(self):
        """Test B2 at p = 5 passes the gates and is flat."""
        builder = builder_for("B2", 5, 2)
        builder.weyl_operators()
        self.assertTrue(builder.gates.ok, builder.gates.failures)
        self.assert_flat(builder)

    def test_a2_at_order_six(self):
        """Test A2 at p = 5 stays flat through q^6."""
        self.assert_flat(builder_for("A2", 5, 6))

    def test_weyl_operators_are_signed_permutations(self):
        """Test every [s_beta] for A2 has one entry +-1 per column."""
        builder = builder_for("A2", 5, 2)
        one = builder.ring.one
        for op in builder.weyl_operators().values():
            for j in range(builder.model.dim):
                column = [e for e in op.matrix.column(j) if e]
                self.assertEqual(len(column), 1)
                self.assertIn(column[0], (one, -one))
