"""
Division-free linear algebra over the coefficient rings.

Entries may be polynomials, rational functions or Novikov series; every
operation only uses ring addition and multiplication, so the same code
serves all three.
"""

from dataclasses import dataclass
from typing import Any, Callable, List, Sequence, Tuple

from .exactring import format_value


@dataclass(frozen=True)
class Mat:
    """
    Square matrix with entries in one commutative ring.

    Attributes:
        rows: Entries, rows[i][j]
        zero: Additive identity of the entry ring
        one: Multiplicative identity of the entry ring
        basis: "fixed-point" or "stable"
    """

    rows: Tuple[Tuple[Any, ...], ...]
    zero: Any
    one: Any
    basis: str = "stable"

    def __post_init__(self) -> None:
        if any(len(row) != len(self.rows) for row in self.rows):
            raise ValueError("matrix must be square")

    @property
    def dim(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> Any:
        return self.rows[i][j]

    def column(self, j: int) -> List[Any]:
        return [row[j] for row in self.rows]

    def map(self, fn: Callable[[Any], Any], zero: Any = None, one: Any = None) -> "Mat":
        return Mat(
            tuple(tuple(fn(e) for e in row) for row in self.rows),
            fn(self.zero) if zero is None else zero,
            fn(self.one) if one is None else one,
            self.basis,
        )

    def transpose(self) -> "Mat":
        return Mat(tuple(zip(*self.rows)), self.zero, self.one, self.basis)

    def is_zero(self) -> bool:
        return not any(e for row in self.rows for e in row)

    def with_basis(self, basis: str) -> "Mat":
        return Mat(self.rows, self.zero, self.one, basis)


@dataclass(frozen=True)
class CharPoly:
    """Monic characteristic polynomial, coeffs = (a_0, ..., a_n)."""

    coeffs: Tuple[Any, ...]
    zero: Any
    one: Any

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def map(self, fn: Callable[[Any], Any]) -> "CharPoly":
        return CharPoly(tuple(fn(c) for c in self.coeffs), fn(self.zero), fn(self.one))


def from_rows(rows: Sequence[Sequence[Any]], zero: Any, one: Any, basis: str = "stable") -> Mat:
    return Mat(tuple(tuple(r) for r in rows), zero, one, basis)


def identity(n: int, zero: Any, one: Any, basis: str = "stable") -> Mat:
    return Mat(tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)), zero, one, basis)


def zeros(n: int, zero: Any, one: Any, basis: str = "stable") -> Mat:
    return Mat(tuple(tuple(zero for _ in range(n)) for _ in range(n)), zero, one, basis)


def diagonal(entries: Sequence[Any], zero: Any, one: Any, basis: str = "stable") -> Mat:
    n = len(entries)
    return Mat(tuple(tuple(entries[i] if i == j else zero for j in range(n)) for i in range(n)), zero, one, basis)


def _check_shapes(a: Mat, b: Mat) -> None:
    if a.dim != b.dim:
        raise ValueError(f"Shape mismatch: {a.dim} vs {b.dim}")


def mat_add(a: Mat, b: Mat) -> Mat:
    _check_shapes(a, b)
    return Mat(tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a.rows, b.rows)), a.zero, a.one, a.basis)


def mat_sub(a: Mat, b: Mat) -> Mat:
    _check_shapes(a, b)
    return Mat(tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a.rows, b.rows)), a.zero, a.one, a.basis)


def mat_neg(a: Mat) -> Mat:
    return Mat(tuple(tuple(-x for x in row) for row in a.rows), a.zero, a.one, a.basis)


def mat_scale(a: Mat, c: Any) -> Mat:
    return Mat(tuple(tuple(x * c for x in row) for row in a.rows), a.zero, a.one, a.basis)


def _dot(row: Sequence[Any], vec: Sequence[Any], zero: Any) -> Any:
    acc = zero
    for x, y in zip(row, vec):
        if x and y:
            acc = acc + x * y
    return acc


def mat_mul(a: Mat, b: Mat) -> Mat:
    _check_shapes(a, b)
    cols = [b.column(j) for j in range(b.dim)]
    return Mat(tuple(tuple(_dot(row, col, a.zero) for col in cols) for row in a.rows), a.zero, a.one, a.basis)


def mat_apply(a: Mat, v: Sequence[Any]) -> List[Any]:
    if len(v) != a.dim:
        raise ValueError(f"Shape mismatch: matrix {a.dim} vs vector {len(v)}")
    return [_dot(row, v, a.zero) for row in a.rows]


def mat_power(a: Mat, k: int) -> Mat:
    result = identity(a.dim, a.zero, a.one, a.basis)
    for _ in range(k):
        result = mat_mul(result, a)
    return result


def commutator(a: Mat, b: Mat) -> Mat:
    return mat_sub(mat_mul(a, b), mat_mul(b, a))


def charpoly_berkowitz(m: Mat) -> CharPoly:
    """
    Characteristic polynomial det(xI - M) without divisions.

    Builds the Toeplitz factors of the bottom-right principal submatrices and
    multiplies them together, which needs ring operations only.
    """
    n = m.dim
    zero, one = m.zero, m.one
    vec: List[Any] = [one]
    for k in range(n - 1, -1, -1):
        size = n - k
        a = m.rows[k][k]
        r = [m.rows[k][j] for j in range(k + 1, n)]
        c = [m.rows[i][k] for i in range(k + 1, n)]
        sub = [[m.rows[i][j] for j in range(k + 1, n)] for i in range(k + 1, n)]
        diags = [one, -a]
        power_c = c
        for _ in range(size - 1):
            diags.append(-_dot(r, power_c, zero))
            power_c = [_dot(row, power_c, zero) for row in sub]
        new_vec = []
        for i in range(size + 1):
            acc = zero
            for j in range(min(i + 1, size)):
                d = diags[i - j]
                if d and vec[j]:
                    acc = acc + d * vec[j]
            new_vec.append(acc)
        vec = new_vec
    return CharPoly(tuple(reversed(vec)), zero, one)


def charpoly_evaluate(p: CharPoly, m: Mat) -> Mat:
    """Substitute the matrix into the polynomial (Horner)."""
    result = zeros(m.dim, m.zero, m.one, m.basis)
    for c in reversed(p.coeffs):
        result = mat_add(mat_mul(result, m), mat_scale(identity(m.dim, m.zero, m.one, m.basis), c))
    return result


def determinant(m: Mat) -> Any:
    sign = -1 if m.dim % 2 else 1
    return charpoly_berkowitz(m).coeffs[0] * sign


def sylvester(p: CharPoly) -> Mat:
    """Sylvester matrix of P and its formal derivative."""
    n = p.degree
    high = list(reversed(p.coeffs))
    deriv = [p.coeffs[k] * k for k in range(n, 0, -1)]
    size = 2 * n - 1
    rows = []
    for i in range(n - 1):
        rows.append([p.zero] * i + high + [p.zero] * (size - n - 1 - i))
    for i in range(n):
        rows.append([p.zero] * i + deriv + [p.zero] * (size - n - i))
    return from_rows(rows, p.zero, p.one)


def discriminant(p: CharPoly) -> Any:
    """(-1)^{n(n-1)/2} Res(P, P') for monic P."""
    n = p.degree
    if n < 1:
        raise ValueError("discriminant needs degree at least 1")
    res = determinant(sylvester(p))
    return -res if (n * (n - 1) // 2) % 2 else res


def format_matrix(m: Mat) -> str:
    """One row per line, entries separated by ' | '."""
    return "\n".join(" | ".join(format_value(e) for e in row) for row in m.rows)


def parse_matrix(text: str, parse_entry: Callable[[str], Any], zero: Any, one: Any, basis: str = "stable") -> Mat:
    rows = [[parse_entry(cell) for cell in line.split(" | ")] for line in text.strip().splitlines()]
    return from_rows(rows, zero, one, basis)
