"""
Tests for pipeline orchestration, verification and emission.
"""

import json
import shutil
import tempfile
from pathlib import Path
from unittest import TestCase

from qsteenrod.config import load_config
from qsteenrod.errors import ConfigError, PrimeDegeneracyError
from qsteenrod.gkm import build_gkm
from qsteenrod.pcurv import PASS, SKIPPED
from qsteenrod.pipeline import build_context, dump_report, emit, parse_shift, run_verify
from qsteenrod.rootdata import build_root_system, parse_root_system


class TestParseShift(TestCase):
    """Test lift shift parsing."""

    def setUp(self):
        """Build the A2 model at p = 5."""
        self.model = build_gkm(build_root_system(parse_root_system("A2")), 5)

    def test_linear_forms(self):
        """Test shifts in the lambdas and h."""
        ring = self.model.ring
        self.assertEqual(parse_shift("h", self.model), ring.h)
        self.assertEqual(parse_shift("l1 + 2*h", self.model), ring.lambdas[0] + ring.h * 2)
        self.assertFalse(parse_shift("0", self.model))

    def test_invalid_shifts(self):
        """Test non-linear, t-dependent and unparsable shifts."""
        for text in ["h^2", "t", "x"]:
            with self.subTest(text=text):
                with self.assertRaises(ConfigError):
                    parse_shift(text, self.model)


class TestVerify(TestCase):
    """Test the full verification run at A1, p = 3."""

    def setUp(self):
        """Create a temporary cache directory."""
        self.temp_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        """Clean up the temporary directory."""
        shutil.rmtree(self.temp_dir)

    def test_a1_passes(self):
        """Test every hard check passes and the verdict is 0."""
        config = load_config(overrides=[f"cache_dir={self.temp_dir / 'stab'}"], system="A1")
        document, verdict, ctx = run_verify(config)
        self.assertEqual(verdict, 0, [c for c in document["checks"] if c["status"] != PASS])
        names = [c["name"] for c in document["checks"]]
        self.assertIn("lift_shift[h]", names)
        self.assertIn("lift_shift[l1]", names)
        self.assertEqual(document["system"], "A1")
        self.assertEqual(document["torus"], "sc")
        self.assertEqual(document["dimension"], 2)
        flatness = next(c for c in document["checks"] if c["name"] == "flatness")
        self.assertEqual(flatness["status"], SKIPPED)
        self.assertIn("p_curvature", ctx.timings)
        self.assertEqual(len(list((self.temp_dir / "stab").iterdir())), 2)

    def test_selected_checks_and_matrices(self):
        """Test only enabled checks run and matrices are reported on request."""
        config = load_config(overrides=['checks=["duality", "check_q0"]', "report_matrices=true", "N=2"], system="A1")
        document, verdict, _ = run_verify(config)
        self.assertEqual(verdict, 0)
        self.assertEqual([c["name"] for c in document["checks"]], ["duality", "check_q0"])
        self.assertEqual(document["matrices"]["stab_plus"], "2*l1 | 0\nh | h + l1")
        parsed = json.loads(dump_report(document))
        self.assertEqual(parsed["truncation"], 2)

    def test_report_is_deterministic(self):
        """Test a second run, served from the cache, writes the same document."""
        overrides = [f"cache_dir={self.temp_dir / 'stab'}", "N=3", "seed=7"]
        first, _, _ = run_verify(load_config(overrides=overrides, system="A1"))
        second, _, _ = run_verify(load_config(overrides=overrides, system="A1"))
        self.assertEqual(dump_report(first), dump_report(second))

    def test_hard_charpoly_gate(self):
        """Test charpoly_gate = hard drops the soft marker from the report."""
        config = load_config(overrides=['checks=["charpoly_shift", "discriminant"]', "charpoly_gate=hard", "N=2"], system="A1")
        document, verdict, _ = run_verify(config)
        self.assertEqual(verdict, 0)
        self.assertEqual(document["checks"][0], {"name": "charpoly_shift", "status": PASS})
        self.assertEqual(document["config"]["charpoly_gate"], "hard")

    def test_degenerate_prime(self):
        """Test G2 at p = 3 stops before any check."""
        config = load_config(system="G2")
        with self.assertRaises(PrimeDegeneracyError):
            build_context(config)


class TestEmit(TestCase):
    """Test the canonical text of each subcommand."""

    def test_roots(self):
        """Test the root table."""
        text = emit("roots", load_config(system="A2"))
        self.assertTrue(text.startswith("# root system A2"))

    def test_stab(self):
        """Test the Stab+ restriction matrix for A1."""
        text = emit("stab", load_config(system="A1"))
        self.assertIn("# order e, s1\n", text)
        self.assertIn("2*l1 | 0\nh | h + l1", text)

    def test_connection_and_pcurv(self):
        """Test connection and p-curvature matrices are emitted."""
        config = load_config(overrides=["N=2"], system="A1")
        self.assertIn("quantum multiplication by b = [1], N = 2, stable basis", emit("connection", config))
        self.assertIn("p-curvature of b = [1]", emit("pcurv", config))

    def test_steenrod(self):
        """Test the Steenrod operation opens with its provenance header."""
        text = emit("steenrod", load_config(overrides=["N=2"], system="A1"))
        self.assertTrue(text.startswith("# QSt via Cor. 5.2: Sigma_b(1) for b = [1], N = 2, stable basis\n"))
        self.assertIn("Stab+(e):", text)
        self.assertIn("Stab+(s1):", text)

    def test_unknown_subcommand(self):
        """Test unknown subcommands are refused."""
        with self.assertRaises(ConfigError):
            emit("bogus", load_config(system="A1"))
