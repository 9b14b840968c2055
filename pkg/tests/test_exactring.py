"""
Tests for exact coefficient arithmetic over F_p.
"""

from unittest import TestCase

from qsteenrod.exactring import (
    LinearForm,
    NovikovSeries,
    RatFun,
    coefficient_ring,
    degree_in,
    exact_divide,
    format_poly,
    format_ratfun,
    format_series,
    frobenius,
    geometric_expand,
    h_component,
    is_homogeneous,
    is_linear_form,
    parse_poly,
    parse_ratfun,
    shift_h,
    specialize,
    vanishes_on,
)
from qsteenrod.rootdata import Coroot, Weight


class TestCoefficientRing(TestCase):
    """Test the polynomial ring F_p[l, h, t]."""

    def setUp(self):
        """Create F_3[l1, h, t]."""
        self.ring = coefficient_ring(3, 1)
        self.l1 = self.ring.lambdas[0]

    def test_generators(self):
        """Test generator names and order."""
        self.assertEqual(self.ring.names, ["l1", "h", "t"])
        self.assertEqual(self.ring.ngens, 3)

    def test_scalars_reduce_mod_p(self):
        """Test scalars and coefficients are reduced mod p."""
        self.assertEqual(self.ring.scalar(4), self.ring.one)
        self.assertEqual(self.ring.coeff(-1), 2)
        self.assertEqual(self.ring.inverse(2), 2)
        with self.assertRaises(ZeroDivisionError):
            self.ring.inverse(3)

    def test_memoized(self):
        """Test the same ring object is returned for the same parameters."""
        self.assertIs(coefficient_ring(3, 1), self.ring)


class TestLinearForm(TestCase):
    """Test linear forms over (l, h)."""

    def setUp(self):
        """Create F_3[l1, h, t]."""
        self.ring = coefficient_ring(3, 1)
        self.l1, self.h = self.ring.lambdas[0], self.ring.h

    def test_monic(self):
        """Test scaling to a leading coefficient of 1."""
        scalar, monic = self.ring.form((2, 1)).monic()
        self.assertEqual(scalar, 2)
        self.assertEqual(monic, LinearForm((1, 2), 3))

    def test_proportional(self):
        """Test proportionality mod p."""
        self.assertTrue(self.ring.form((1, 1)).proportional_to(self.ring.form((2, 2))))
        self.assertFalse(self.ring.form((1, 1)).proportional_to(self.ring.form((1, 2))))
        self.assertFalse(self.ring.form((0, 0)).proportional_to(self.ring.form((1, 0))))

    def test_t_part_and_poly(self):
        """Test dropping h and conversion to a polynomial."""
        form = self.ring.form((1, 1))
        self.assertEqual(form.to_poly(self.ring), self.l1 + self.h)
        self.assertEqual(form.t_part().to_poly(self.ring), self.l1)
        self.assertEqual(str(form), "h + l1")

    def test_divisibility(self):
        """Test vanishing on a hyperplane and exact division."""
        f = self.l1 * self.h + self.l1**2 * 2
        self.assertTrue(vanishes_on(self.ring, f, self.ring.form((1, 0))))
        self.assertTrue(vanishes_on(self.ring, f, self.ring.form((2, 1))))
        self.assertFalse(vanishes_on(self.ring, f, self.ring.form((0, 1))))
        self.assertEqual(exact_divide(self.ring, f, self.ring.form((1, 0))), self.h + self.l1 * 2)


class TestRatFun(TestCase):
    """Test rational functions with linear-form denominators."""

    def setUp(self):
        """Create F_3[l1, h, t]."""
        self.ring = coefficient_ring(3, 1)
        self.l1, self.h = self.ring.lambdas[0], self.ring.h
        self.L = self.ring.form((1, 0))
        self.LH = self.ring.form((1, 1))

    def test_reduction(self):
        """Test common linear factors cancel."""
        x = RatFun(self.ring, self.l1 * self.h, [self.L])
        self.assertTrue(x.is_polynomial)
        self.assertEqual(x.to_poly(), self.h)

    def test_denominator_normalization(self):
        """Test denominators are made monic."""
        self.assertEqual(RatFun(self.ring, self.h, [self.ring.form((2, 0))]), RatFun(self.ring, self.h * 2, [self.L]))

    def test_addition(self):
        """Test 1/l1 - 1/(l1 + h) = h / (l1 (l1 + h))."""
        a = RatFun(self.ring, self.ring.one, [self.L])
        b = RatFun(self.ring, self.ring.one, [self.LH])
        self.assertEqual(a - b, RatFun(self.ring, self.h, [self.L, self.LH]))

    def test_cancellation_to_zero(self):
        """Test x - x is zero with an empty denominator."""
        x = RatFun(self.ring, self.h, [self.L])
        diff = x - x
        self.assertFalse(diff)
        self.assertTrue(diff.is_polynomial)

    def test_multiplication_with_polynomials(self):
        """Test products with polynomials and integers."""
        x = RatFun(self.ring, self.h, [self.L])
        self.assertEqual(x * self.l1, self.h)
        self.assertEqual((x * 3).num, self.ring.zero)

    def test_not_a_polynomial(self):
        """Test to_poly refuses a genuine denominator."""
        with self.assertRaises(ValueError):
            RatFun(self.ring, self.h, [self.L]).to_poly()

    def test_zero_denominator(self):
        """Test a vanishing denominator factor is refused."""
        with self.assertRaises(ZeroDivisionError):
            RatFun(self.ring, self.h, [self.ring.form((3, 0))])

    def test_text_form(self):
        """Test the canonical text of a rational function."""
        x = RatFun(self.ring, self.h, [self.L])
        self.assertEqual(format_ratfun(x), "(h) / {l1}")
        self.assertEqual(parse_ratfun("(h) / {l1}", self.ring), x)


class TestNovikovSeries(TestCase):
    """Test truncated Novikov series."""

    def setUp(self):
        """Create rank-1 series over F_3[l1, h, t]."""
        self.ring = coefficient_ring(3, 1)
        self.l1, self.h = self.ring.lambdas[0], self.ring.h

    def series(self, terms, order=3):
        return NovikovSeries(self.ring, 1, order, terms)

    def test_geometric_expand(self):
        """Test q^a / (1 - q^a) up to the truncation height."""
        geom = geometric_expand(Coroot((1,)), 3, self.ring)
        self.assertEqual(set(geom.terms), {(1,), (2,), (3,)})
        rank_two = geometric_expand(Coroot((1, 1)), 3, coefficient_ring(3, 2))
        self.assertEqual(set(rank_two.terms), {(1, 1)})
        with self.assertRaises(ValueError):
            geometric_expand(Coroot((0,)), 3, self.ring)

    def test_truncated_product(self):
        """Test products drop terms above the order."""
        q = self.series({(1,): self.ring.one})
        q3 = self.series({(3,): self.ring.one})
        self.assertFalse(q * q3)
        self.assertEqual((q * q).terms, {(2,): self.ring.one})

    def test_derive(self):
        """Test q^k -> k q^k, with k reduced mod p."""
        f = self.series({(1,): self.h, (3,): self.h})
        self.assertEqual(f.derive(Weight((1,))), self.series({(1,): self.h}))
        self.assertEqual(f.derive(Weight((2,))), self.series({(1,): self.h * 2}))

    def test_shift_q(self):
        """Test multiplication by a monomial q^A."""
        f = self.series({(0,): self.l1, (2,): self.h})
        self.assertEqual(f.shift_q(Coroot((1,))), self.series({(1,): self.l1, (3,): self.h}))

    def test_truncation_mismatch(self):
        """Test adding series of different orders raises."""
        with self.assertRaises(ValueError):
            self.series({}, 2) + self.series({}, 3)

    def test_frobenius_is_pth_power(self):
        """Test the freshman's dream against repeated multiplication."""
        f = self.series({(0,): self.l1, (1,): self.h})
        cube = f * f * f
        self.assertEqual(frobenius(f.truncate(1), 3), cube)
        self.assertEqual(cube.terms, {(0,): self.l1**3, (3,): self.h**3})

    def test_equality_uses_order(self):
        """Test series with different truncations are not equal."""
        self.assertNotEqual(self.series({(0,): self.l1}, 2), self.series({(0,): self.l1}, 3))


class TestSpecialize(TestCase):
    """Test exact substitution."""

    def setUp(self):
        """Create F_3[l1, h, t]."""
        self.ring = coefficient_ring(3, 1)
        self.l1, self.h, self.t = self.ring.lambdas[0], self.ring.h, self.ring.t

    def test_polynomial(self):
        """Test substituting zero, integers and polynomials."""
        f = self.l1 * self.h + self.t**2
        self.assertEqual(specialize(f, {"t": 0}), self.l1 * self.h)
        self.assertEqual(specialize(f, {"h": 2, "t": 0}), self.l1 * 2)
        self.assertEqual(specialize(f, {"h": self.l1}), self.l1**2 + self.t**2)

    def test_series(self):
        """Test q -> 0 keeps the constant term only."""
        f = NovikovSeries(self.ring, 1, 2, {(0,): self.l1 + self.t, (1,): self.h})
        self.assertEqual(specialize(f, {"q": 0}).terms, {(0,): self.l1 + self.t})
        self.assertEqual(specialize(f, {"t": 0}).terms, {(0,): self.l1, (1,): self.h})

    def test_refusals(self):
        """Test rational functions, unknown names and q != 0 are refused."""
        with self.assertRaises(TypeError):
            specialize(RatFun.from_poly(self.ring, self.h), {"h": 0})
        with self.assertRaises(ValueError):
            specialize(self.h, {"l7": 0})
        with self.assertRaises(ValueError):
            specialize(self.h, {"q": 1})

    def test_shift_h(self):
        """Test h -> h - t."""
        self.assertEqual(shift_h(self.h**2), (self.h - self.t) ** 2)
        self.assertEqual(shift_h(self.l1), self.l1)


class TestPolynomialHelpers(TestCase):
    """Test degree, homogeneity and h-components."""

    def setUp(self):
        """Create F_3[l1, h, t]."""
        self.ring = coefficient_ring(3, 1)
        self.l1, self.h, self.t = self.ring.lambdas[0], self.ring.h, self.ring.t

    def test_h_component(self):
        """Test the h-free coefficient of h^k."""
        f = self.l1 * self.h**2 + self.h + self.t
        self.assertEqual(h_component(self.ring, f, 2), self.l1)
        self.assertEqual(h_component(self.ring, f, 1), self.ring.one)
        self.assertEqual(h_component(self.ring, f, 0), self.t)

    def test_degrees(self):
        """Test degree_in and homogeneity."""
        self.assertEqual(degree_in(self.ring, self.l1 * self.h**2, "h"), 2)
        self.assertEqual(degree_in(self.ring, self.ring.zero, "h"), -1)
        self.assertTrue(is_homogeneous(self.l1 * self.h + self.t**2, 2))
        self.assertFalse(is_homogeneous(self.l1 + self.t**2))

    def test_linear_forms(self):
        """Test linear form detection with and without t."""
        self.assertTrue(is_linear_form(self.ring, self.l1 + self.h))
        self.assertFalse(is_linear_form(self.ring, self.l1 + self.t))
        self.assertTrue(is_linear_form(self.ring, self.l1 + self.t, allow_t=True))
        self.assertFalse(is_linear_form(self.ring, self.l1 * self.h))
        self.assertTrue(is_linear_form(self.ring, self.ring.zero))


class TestCanonicalText(TestCase):
    """Test canonical printing and parsing."""

    def setUp(self):
        """Create F_3[l1, h, t]."""
        self.ring = coefficient_ring(3, 1)
        self.l1, self.h, self.t = self.ring.lambdas[0], self.ring.h, self.ring.t

    def test_format_poly(self):
        """Test term order and coefficients in 0..p-1."""
        self.assertEqual(format_poly(self.h - self.l1 * 2), "h + l1")
        self.assertEqual(format_poly(self.l1 * 2), "2*l1")
        self.assertEqual(format_poly(self.h * self.l1**2 + self.t), "h*l1^2 + t")
        self.assertEqual(format_poly(self.ring.one), "1")
        self.assertEqual(format_poly(self.ring.zero), "0")

    def test_parse_poly(self):
        """Test parsing canonical text back."""
        f = self.t**2 * self.h + self.l1 * 2 + 1
        self.assertEqual(parse_poly(format_poly(f), self.ring), f)
        self.assertEqual(parse_poly("0", self.ring), self.ring.zero)
        with self.assertRaises(ValueError):
            parse_poly("x", self.ring)

    def test_format_series(self):
        """Test Novikov exponents print in descending order."""
        f = NovikovSeries(self.ring, 1, 2, {(0,): self.l1, (1,): self.h})
        self.assertEqual(format_series(f), "q[1]*h + l1")
        self.assertEqual(format_series(NovikovSeries(self.ring, 1, 2)), "0")
