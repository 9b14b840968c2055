"""
Tests for stable envelopes, duality and basis changes.
"""

from unittest import TestCase
from unittest.mock import patch

from qsteenrod.errors import AxiomDegeneracyError, ChamberDegeneracyError
from qsteenrod.exactring import RatFun, specialize
from qsteenrod.gkm import build_gkm
from qsteenrod.linalg import diagonal
from qsteenrod.rootdata import Weight, build_root_system, parse_root_system
from qsteenrod.stable import (
    MINUS,
    PLUS,
    _StabRecursion,
    change_basis,
    change_basis_inverse,
    chamber_is_w0_symmetric,
    demazure_lusztig,
    duality_sign,
    polarization,
    relabel_check,
    solve_stab,
    solve_stab_basis,
    stable_coordinates,
    support,
    verify_duality,
    verify_stab_basis,
)


def model_for(name, prime, **kwargs):
    return build_gkm(build_root_system(parse_root_system(name)), prime, **kwargs)


class TestA1StableEnvelopes(TestCase):
    """Test the A1 stable bases against hand computations."""

    def setUp(self):
        """Solve both directions for A1 at p = 3."""
        self.model = model_for("A1", 3)
        self.ring = self.model.ring
        self.l1, self.h = self.ring.lambdas[0], self.ring.h
        self.alpha = self.l1 * 2
        self.plus = solve_stab_basis(self.model, PLUS)
        self.minus = solve_stab_basis(self.model, MINUS)

    def test_plus_rows(self):
        """Test Stab+(e) = (alpha, 0) and Stab+(s) = (h, h - alpha)."""
        self.assertEqual(self.plus.rows[0], (self.alpha, self.ring.zero))
        self.assertEqual(self.plus.rows[1], (self.h, self.h - self.alpha))
        self.assertEqual(self.plus.signs, (-1, 1))

    def test_minus_rows(self):
        """Test Stab-(e) = (h + alpha, h) and Stab-(s) = (0, -alpha)."""
        self.assertEqual(self.minus.rows[0], (self.h + self.alpha, self.h))
        self.assertEqual(self.minus.rows[1], (self.ring.zero, -self.alpha))

    def test_demazure_lusztig_steps(self):
        """Test T_1 carries Stab+(e) to Stab+(s) and back."""
        step = demazure_lusztig(self.model, 0, self.plus.rows[0])
        self.assertEqual(step, [self.h, self.h - self.alpha])
        self.assertEqual(demazure_lusztig(self.model, 0, step), [self.alpha, self.ring.zero])

    def test_demazure_lusztig_minus(self):
        """Test T_1 carries Stab-(s) to Stab-(e)."""
        self.assertEqual(demazure_lusztig(self.model, 0, self.minus.rows[1]), [self.h + self.alpha, self.h])

    def test_solve_single_row(self):
        """Test one row solves like the whole basis."""
        s = self.model.elements[1]
        self.assertEqual(solve_stab(self.model, PLUS, s), self.plus.rows[1])
        self.assertEqual(solve_stab(self.model, MINUS, s), self.minus.rows[1])

    def test_axioms(self):
        """Test the independent axiom check finds nothing."""
        self.assertEqual(verify_stab_basis(self.model, self.plus), [])
        self.assertEqual(verify_stab_basis(self.model, self.minus), [])

    def test_duality(self):
        """Test <Stab+(w), Stab-(v)> = -delta_vw for dim G/B = 1."""
        self.assertEqual(duality_sign(self.model), -1)
        result = verify_duality(self.model, self.plus, self.minus)
        self.assertTrue(result.ok)
        self.assertEqual(result.expected, -1)
        self.assertEqual(result.failures, [])

    def test_duality_detects_wrong_basis(self):
        """Test pairing Stab+ with itself fails."""
        result = verify_duality(self.model, self.plus, self.plus)
        self.assertFalse(result.ok)
        self.assertTrue(result.failures)

    def test_relabel(self):
        """Test the w0 relabeling between the two directions."""
        self.assertTrue(chamber_is_w0_symmetric(self.model))
        self.assertEqual(relabel_check(self.model, self.plus, self.minus), [])

    def test_cup_product_in_stable_basis(self):
        """Test diag(l1, -l1) becomes [[l1, h], [0, -l1]]."""
        zero = RatFun.from_poly(self.ring, self.ring.zero)
        one = RatFun.from_poly(self.ring, self.ring.one)
        cup = diagonal([RatFun.from_poly(self.ring, self.l1), RatFun.from_poly(self.ring, -self.l1)], zero, one, "fixed-point")
        stable = change_basis(self.model, cup, self.plus, self.minus)
        self.assertEqual(stable.rows, ((self.l1, self.h), (self.ring.zero, -self.l1)))
        self.assertEqual(stable.basis, "stable")
        back = change_basis_inverse(self.model, stable, self.plus, self.minus)
        self.assertEqual(back.rows[0][0], self.l1)
        self.assertEqual(back.rows[1][1], -self.l1)
        self.assertFalse(back.rows[0][1])
        self.assertEqual(back.basis, "fixed-point")

    def test_stable_coordinates(self):
        """Test a stable envelope has unit coordinates on itself."""
        coords = stable_coordinates(self.model, self.plus.row(1), self.minus)
        self.assertEqual(coords[0], 0)
        self.assertEqual(coords[1], 1)

    def test_unit_has_rational_coordinates(self):
        """Test the unit class is not an integral combination of stable envelopes."""
        coords = stable_coordinates(self.model, self.model.unit_class(), self.minus)
        self.assertFalse(coords[0].is_polynomial)


class TestSupportAndPolarization(TestCase):
    """Test support sets and diagonal restrictions."""

    def test_support(self):
        """Test Stab+ lives below w and Stab- above w in Bruhat order."""
        model = model_for("A2", 5)
        system = model.system
        e, w0 = system.identity(), system.longest()
        self.assertEqual(support(model, e, PLUS), {e})
        self.assertEqual(support(model, w0, PLUS), set(model.elements))
        self.assertEqual(support(model, w0, MINUS), {w0})

    def test_polarization_restricts_to_fiber_euler_class(self):
        """Test the diagonal agrees with +-e_w at h = 0."""
        model = model_for("A2", 5)
        for w in model.elements:
            for direction in (PLUS, MINUS):
                sign, diag = polarization(model, w, direction)
                self.assertIn(sign, (1, -1))
                self.assertEqual(specialize(diag, {"h": 0}), model.euler_classes(w)[1])


class TestRankTwo(TestCase):
    """Test solving and duality in rank two."""

    def test_a2_at_five(self):
        """Test A2 at p = 5 solves uniquely and satisfies duality."""
        model = model_for("A2", 5)
        plus = solve_stab_basis(model, PLUS)
        minus = solve_stab_basis(model, MINUS)
        self.assertEqual(verify_stab_basis(model, plus), [])
        self.assertEqual(verify_stab_basis(model, minus), [])
        result = verify_duality(model, plus, minus)
        self.assertTrue(result.ok, result.failures[:1])
        self.assertEqual(result.expected, -1)
        self.assertEqual(relabel_check(model, plus, minus), [])

    def test_non_symmetric_chamber_skips_relabel(self):
        """Test relabeling is not applicable when -w0 moves the chamber."""
        model = model_for("A2", 5, chamber=[1, 2])
        self.assertFalse(chamber_is_w0_symmetric(model))
        plus = solve_stab_basis(model, PLUS)
        minus = solve_stab_basis(model, MINUS)
        self.assertIsNone(relabel_check(model, plus, minus))
        self.assertTrue(verify_duality(model, plus, minus).ok)

    def test_divisor_in_stable_basis_is_polynomial(self):
        """Test cup products by divisors conjugate to polynomial matrices."""
        model = model_for("A2", 5)
        plus = solve_stab_basis(model, PLUS)
        minus = solve_stab_basis(model, MINUS)
        ring = model.ring
        values = [RatFun.from_poly(ring, v) for v in model.divisor_class(Weight((1, 0))).values]
        cup = diagonal(values, RatFun.from_poly(ring, ring.zero), RatFun.from_poly(ring, ring.one), "fixed-point")
        stable = change_basis(model, cup, plus, minus)
        for row in stable.rows:
            for entry in row:
                self.assertNotIsInstance(entry, RatFun)


def solve_both(model):
    return solve_stab_basis(model, PLUS), solve_stab_basis(model, MINUS)


class TestHigherRank(TestCase):
    """Test the recursion past rank one, where the axioms alone do not pin a row."""

    def assert_stable_pair(self, model, plus, minus):
        self.assertEqual(verify_stab_basis(model, plus), [])
        self.assertEqual(verify_stab_basis(model, minus), [])
        result = verify_duality(model, plus, minus)
        self.assertTrue(result.ok, result.failures[:1])
        self.assertEqual(result.expected, duality_sign(model))

    def test_rows_vanish_off_the_support(self):
        """Test every A2 row is zero outside its Bruhat interval."""
        model = model_for("A2", 5)
        for basis in solve_both(model):
            for w, row in zip(model.elements, basis.rows):
                allowed = support(model, w, basis.direction)
                for v, entry in zip(model.elements, row):
                    if v not in allowed:
                        self.assertFalse(entry, f"Stab({w}) at {v}")

    def test_demazure_lusztig_is_an_involution(self):
        """Test T_i T_i = 1 on every A2 stable envelope."""
        model = model_for("A2", 5)
        plus = solve_stab_basis(model, PLUS)
        for row in plus.rows:
            for i in range(model.system.rank):
                self.assertEqual(demazure_lusztig(model, i, demazure_lusztig(model, i, row)), list(row))

    def test_a2_on_the_gl_torus(self):
        """Test A2 at p = 3 with three equivariant parameters."""
        model = model_for("A2", 3)
        self.assertEqual(model.ring.nlambda, 3)
        self.assert_stable_pair(model, *solve_both(model))

    def test_b2_and_c2(self):
        """Test both rank-two non-simply-laced systems at p = 5."""
        for name in ("B2", "C2"):
            model = model_for(name, 5)
            self.assert_stable_pair(model, *solve_both(model))

    def test_a3(self):
        """Test all 24 rows of A3 at p = 5 in both directions."""
        model = model_for("A3", 5)
        plus, minus = solve_both(model)
        self.assertEqual(plus.dim, 24)
        self.assert_stable_pair(model, plus, minus)
        self.assertEqual(relabel_check(model, plus, minus), [])

    def test_single_row_matches_basis(self):
        """Test solving one A2 row gives the basis row."""
        model = model_for("A2", 5)
        plus, minus = solve_both(model)
        w = model.elements[3]
        self.assertEqual(solve_stab(model, PLUS, w), plus.rows[3])
        self.assertEqual(solve_stab(model, MINUS, w), minus.rows[3])

    def test_non_dominant_chamber(self):
        """Test a chamber with a negative coordinate is refused."""
        with self.assertRaises(ChamberDegeneracyError):
            solve_stab_basis(model_for("A2", 5, chamber=[2, -1]), PLUS)

    def test_disagreeing_descents(self):
        """Test two reduced words giving different rows is a degeneracy."""
        step_row = _StabRecursion._step_row

        def perturbed(recursion, w, i, u, diagonal):
            row = step_row(recursion, w, i, u, diagonal)
            if w == recursion.system.longest() and i == 1:
                row = (row[0] + recursion.model.ring.h,) + row[1:]
            return row

        with patch.object(_StabRecursion, "_step_row", perturbed):
            with self.assertRaises(AxiomDegeneracyError) as ctx:
                solve_stab_basis(model_for("A2", 5), PLUS)
        self.assertEqual(ctx.exception.exit_code, 3)
        self.assertIn("disagree", str(ctx.exception))
