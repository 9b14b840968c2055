"""
On-disk cache of solved stable bases.

One text file per (system, prime, torus, conventions, direction). The first
line is a version stamp; a stale stamp or an unreadable body means the
basis is solved again.
"""

import logging
from pathlib import Path
from typing import Dict, Optional

from . import __version__
from .exactring import format_poly, parse_poly
from .gkm import GkmModel
from .stable import StabBasis, solve_stab_basis

logger = logging.getLogger(__name__)

CACHE_FORMAT = 2


def version_stamp() -> str:
    return f"qsteenrod-stab-cache format={CACHE_FORMAT} version={__version__}"


def cache_key(model: GkmModel, direction: int) -> str:
    chamber = "_".join(str(c) for c in model.chamber)
    h = "hplus" if model.h_sign == 1 else "hminus"
    d = "plus" if direction == 1 else "minus"
    return f"stab-{model.system.spec.name}-p{model.prime}-{model.lattice.kind}-{h}-c{chamber}-{d}"


def serialize_basis(model: GkmModel, basis: StabBasis) -> str:
    """Canonical text: stamp, header, sign lines, then w|v = polynomial."""
    lines = [version_stamp(), f"key {cache_key(model, basis.direction)}"]
    for w, sign in zip(model.elements, basis.signs):
        lines.append(f"sign {w} {sign}")
    for i, w in enumerate(model.elements):
        for j, v in enumerate(model.elements):
            lines.append(f"{w}|{v} = {format_poly(basis.rows[i][j], model.ring)}")
    return "\n".join(lines) + "\n"


class CorruptCacheError(ValueError):
    pass


def parse_basis(model: GkmModel, direction: int, text: str) -> StabBasis:
    """
    Inverse of serialize_basis; the stamp line must already have been checked.

    Raises:
        CorruptCacheError: If any line is malformed or an entry is missing
    """
    labels = {str(w): k for k, w in enumerate(model.elements)}
    n = model.dim
    signs: Dict[int, int] = {}
    entries: Dict[tuple, object] = {}
    lines = text.splitlines()[1:]
    if not lines or lines[0] != f"key {cache_key(model, direction)}":
        raise CorruptCacheError("cache key line does not match")
    try:
        for line in lines[1:]:
            if line.startswith("sign "):
                _, label, value = line.split(" ")
                signs[labels[label]] = int(value)
                continue
            lhs, rhs = line.split(" = ", 1)
            w, v = lhs.split("|")
            entries[(labels[w], labels[v])] = parse_poly(rhs, model.ring)
    except (KeyError, ValueError) as e:
        raise CorruptCacheError(f"malformed cache line: {e}") from e
    if len(signs) != n or len(entries) != n * n:
        raise CorruptCacheError("cache file is incomplete")
    rows = tuple(tuple(entries[(i, j)] for j in range(n)) for i in range(n))
    return StabBasis(direction, rows, tuple(signs[i] for i in range(n)), model.chamber)


class StabCache:
    """
    Directory of cached stable bases.

    Args:
        directory: Cache directory, created on first store
    """

    def __init__(self, directory: Path):
        self.directory = Path(directory)

    def path(self, model: GkmModel, direction: int) -> Path:
        return self.directory / f"{cache_key(model, direction)}.txt"

    def load(self, model: GkmModel, direction: int) -> Optional[StabBasis]:
        path = self.path(model, direction)
        if not path.exists():
            logger.debug("Cache miss: %s", path)
            return None
        try:
            text = path.read_text(encoding="utf-8")
        except (IOError, OSError, UnicodeDecodeError) as e:
            logger.warning("Cannot read cache file %s (%s); recomputing", path, e)
            return None
        stamp = text.split("\n", 1)[0]
        if stamp != version_stamp():
            logger.info("Stale cache file %s (%s); recomputing", path, stamp)
            return None
        try:
            basis = parse_basis(model, direction, text)
        except CorruptCacheError as e:
            logger.warning("Corrupt cache file %s (%s); recomputing", path, e)
            return None
        logger.info("Loaded stable basis from %s", path)
        return basis

    def store(self, model: GkmModel, basis: StabBasis) -> Path:
        path = self.path(model, basis.direction)
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            path.write_text(serialize_basis(model, basis), encoding="utf-8")
        except (IOError, OSError) as e:
            logger.warning("Cannot write cache file %s: %s", path, e)
        return path


def cache_roundtrip(cache: Optional[StabCache], model: GkmModel, direction: int) -> StabBasis:
    """Load the basis from the cache, solving and storing it on a miss."""
    if cache is not None:
        basis = cache.load(model, direction)
        if basis is not None:
            return basis
    basis = solve_stab_basis(model, direction)
    if cache is not None:
        cache.store(model, basis)
    return basis
