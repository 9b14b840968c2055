"""
qsteenrod: mod-p quantum connection, p-curvature and stable envelopes of T*(G/B).
"""

from importlib.metadata import version, PackageNotFoundError

try:
    __version__ = version(__name__)
except PackageNotFoundError:
    # package not installed, fallback to a dev default
    __version__ = "0.0.0+dev"

__author__ = "Georg Hildebrand"
__email__ = "noreply@github.com"

from .errors import (
    QSteenrodError,
    ConfigError,
    DegeneracyError,
    ConventionError,
    WeylGateError,
    InternalCheckError,
)
from .rootdata import RootSystem, build_root_system, parse_root_system
from .gkm import GkmModel, build_gkm
from .stable import PLUS, MINUS, StabBasis, solve_stab_basis, verify_duality
from .connection import ConnectionBuilder, ConnectionOperator, DivisorClass
from .pcurv import PCurvMatrix, PCurvReport, p_curvature, steenrod_output
from .config import RunConfig, load_config
from .pipeline import run_verify, emit
from .output import handle_output

__all__ = [
    "QSteenrodError",
    "ConfigError",
    "DegeneracyError",
    "ConventionError",
    "WeylGateError",
    "InternalCheckError",
    "RootSystem",
    "build_root_system",
    "parse_root_system",
    "GkmModel",
    "build_gkm",
    "PLUS",
    "MINUS",
    "StabBasis",
    "solve_stab_basis",
    "verify_duality",
    "ConnectionBuilder",
    "ConnectionOperator",
    "DivisorClass",
    "PCurvMatrix",
    "PCurvReport",
    "p_curvature",
    "steenrod_output",
    "RunConfig",
    "load_config",
    "run_verify",
    "emit",
    "handle_output",
]
