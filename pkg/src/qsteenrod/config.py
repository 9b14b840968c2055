"""
Run configuration: a flat TOML file plus key=value overrides.
"""

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from sympy import isprime

from .errors import ConfigError

logger = logging.getLogger(__name__)

ALIASES = {"p": "prime", "N": "truncation", "b": "divisor"}

CHECK_NAMES = (
    "duality",
    "stab_axioms",
    "relabel",
    "weyl_gates",
    "flatness",
    "integrality",
    "check_t0",
    "check_q0",
    "h_expansion",
    "charpoly_shift",
    "ev_prediction",
    "lift_shift",
    "discriminant",
    "horizontality",
    "additivity",
    "cross_basis",
)

_STRING_KEYS = ("system", "lift_shift", "cache_dir", "output", "weyl_mode", "nabla_sign", "h_sign", "basis", "torus", "lambda_slice", "charpoly_gate")

_CHOICES = {
    "weyl_mode": ("su-corrected", "literal"),
    "nabla_sign": ("plus", "minus"),
    "h_sign": ("plus", "minus"),
    "basis": ("stable", "fixed-point"),
    "torus": ("auto", "sc", "gl"),
    "lambda_slice": ("auto", "full", "zero", "point"),
    "charpoly_gate": ("soft", "hard"),
}


@dataclass
class RunConfig:
    """Configuration of one verification or emission run."""

    system: str = ""
    prime: int = 3
    truncation: int = 6
    divisor: List[int] = field(default_factory=list)
    weyl_mode: str = "su-corrected"
    nabla_sign: str = "plus"
    h_sign: str = "plus"
    lift_shift: str = "0"
    lift_shift_tests: List[str] = field(default_factory=lambda: ["h", "l1"])
    basis: str = "stable"
    checks: Union[str, List[str]] = "all"
    cache_dir: str = ""
    output: str = ""
    seed: int = 0
    chamber: List[int] = field(default_factory=list)
    max_rank: int = 3
    torus: str = "auto"
    lambda_slice: str = "auto"
    slice_points: int = 3
    charpoly_gate: str = "soft"
    discriminant_max_dim: int = 6
    report_matrices: bool = False
    cross_basis_max_dim: int = 6

    @property
    def nabla_sign_value(self) -> int:
        return 1 if self.nabla_sign == "plus" else -1

    @property
    def h_sign_value(self) -> int:
        return 1 if self.h_sign == "plus" else -1

    @property
    def charpoly_hard(self) -> bool:
        return self.charpoly_gate == "hard"

    @property
    def cache_path(self) -> Optional[Path]:
        return Path(self.cache_dir) if self.cache_dir else None

    @property
    def enabled_checks(self) -> List[str]:
        if self.checks == "all":
            return list(CHECK_NAMES)
        return [name for name in CHECK_NAMES if name in self.checks]

    def enabled(self, name: str) -> bool:
        return name in self.enabled_checks

    def validate(self) -> "RunConfig":
        """
        Check types and ranges.

        Raises:
            ConfigError: On the first invalid value
        """
        if not self.system:
            raise ConfigError("system is required (for example A2)")
        for f in fields(self):
            value = getattr(self, f.name)
            if f.type is int and (isinstance(value, bool) or not isinstance(value, int)):
                raise ConfigError(f"{f.name} must be an integer, got {value!r}")
            if f.type is str and not isinstance(value, str):
                raise ConfigError(f"{f.name} must be a string, got {value!r}")
        if not isprime(self.prime) or self.prime <= 2:
            raise ConfigError(f"prime must be an odd prime, got {self.prime}")
        if self.truncation < 1:
            raise ConfigError(f"truncation must be at least 1, got {self.truncation}")
        if self.slice_points < 1:
            raise ConfigError(f"slice_points must be at least 1, got {self.slice_points}")
        for name in ("divisor", "chamber"):
            value = getattr(self, name)
            if not isinstance(value, list) or any(isinstance(c, bool) or not isinstance(c, int) for c in value):
                raise ConfigError(f"{name} must be a list of integers, got {value!r}")
        for name, allowed in _CHOICES.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {', '.join(allowed)}, got {getattr(self, name)!r}")
        if not isinstance(self.lift_shift_tests, list) or not all(isinstance(s, str) for s in self.lift_shift_tests):
            raise ConfigError("lift_shift_tests must be a list of strings")
        if not isinstance(self.report_matrices, bool):
            raise ConfigError("report_matrices must be true or false")
        if self.checks != "all":
            if not isinstance(self.checks, list):
                raise ConfigError('checks must be "all" or a list of check names')
            unknown = [c for c in self.checks if c not in CHECK_NAMES]
            if unknown:
                raise ConfigError(f"Unknown checks: {', '.join(map(str, unknown))}")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def parse_override(text: str) -> tuple:
    """
    Split key=value; the value is read as a TOML value, falling back to a
    bare string.
    """
    if "=" not in text:
        raise ConfigError(f"Override must look like key=value, got '{text}'")
    key, raw = (part.strip() for part in text.split("=", 1))
    key = ALIASES.get(key, key)
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    # lift_shift=0 and output=1.json stay strings
    if key in _STRING_KEYS and not isinstance(value, str):
        value = raw
    return key, value


def _apply(data: Dict[str, Any], updates: Dict[str, Any]) -> None:
    known = {f.name for f in fields(RunConfig)}
    for key, value in updates.items():
        key = ALIASES.get(key, key)
        if key not in known:
            raise ConfigError(f"Unknown configuration key: {key}")
        data[key] = value


def load_config(path: Optional[Path] = None, overrides: Sequence[str] = (), system: Optional[str] = None) -> RunConfig:
    """
    Build a validated RunConfig.

    Args:
        path: Optional TOML file with flat keys
        overrides: key=value strings applied after the file
        system: Root system given on the command line, wins over the file

    Returns:
        RunConfig after validation

    Raises:
        ConfigError: On unreadable files, unknown keys or invalid values
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "rb") as f:
                _apply(data, tomllib.load(f))
        except FileNotFoundError as e:
            raise ConfigError(f"Config file not found: {path}") from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"Cannot parse {path}: {e}") from e
        logger.debug("Loaded config from %s", path)
    _apply(data, dict(parse_override(o) for o in overrides))
    if system:
        data["system"] = system
    return RunConfig(**data).validate()
