"""
Exact coefficient arithmetic over F_p.

Polynomials in (l1..lm, h, t) are sympy PolyElements over GF(p). Rational
functions only ever have products of linear forms as denominators, and
Novikov series are truncated by coroot height.
"""

import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from sympy.polys.domains import GF
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

from .rootdata import Coroot, Weight

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]
Exponent = Tuple[int, ...]


class CoefficientRing:
    """
    The polynomial ring F_p[l1..lm, h, t].

    Generator order inside sympy is (l1, ..., lm, h, t); canonical printing
    uses the graded order with l1 < ... < lm < h < t.
    """

    def __init__(self, prime: int, nlambda: int):
        self.prime = prime
        self.nlambda = nlambda
        self.names = [f"l{i + 1}" for i in range(nlambda)] + ["h", "t"]
        self.ring = PolyRing(",".join(self.names), GF(prime), grlex)
        gens = self.ring.gens
        self.lambdas: Tuple[PolyElement, ...] = tuple(gens[:nlambda])
        self.h: PolyElement = gens[nlambda]
        self.t: PolyElement = gens[nlambda + 1]
        self.h_index = nlambda
        self.t_index = nlambda + 1

    @property
    def zero(self) -> PolyElement:
        return self.ring.zero

    @property
    def one(self) -> PolyElement:
        return self.ring.one

    @property
    def ngens(self) -> int:
        return self.nlambda + 2

    def scalar(self, value: int) -> PolyElement:
        return self.ring(value % self.prime)

    def coeff(self, value: Any) -> int:
        """Coefficient as an integer in 0..p-1."""
        return int(value) % self.prime

    def inverse(self, value: int) -> int:
        value %= self.prime
        if value == 0:
            raise ZeroDivisionError("0 has no inverse mod p")
        return pow(value, -1, self.prime)

    def from_terms(self, terms: Mapping[Monomial, int]) -> PolyElement:
        return self.ring.from_dict({m: c % self.prime for m, c in terms.items() if c % self.prime})

    def form(self, coeffs: Sequence[int]) -> "LinearForm":
        """Linear form from coefficients over (l1..lm, h)."""
        if len(coeffs) != self.nlambda + 1:
            raise ValueError(f"Linear form needs {self.nlambda + 1} coefficients, got {len(coeffs)}")
        return LinearForm(tuple(c % self.prime for c in coeffs), self.prime)


@lru_cache(maxsize=None)
def coefficient_ring(prime: int, nlambda: int) -> CoefficientRing:
    return CoefficientRing(prime, nlambda)


@dataclass(frozen=True)
class LinearForm:
    """Linear form over (l1..lm, h), coefficients reduced mod p."""

    coeffs: Tuple[int, ...]
    prime: int

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def lead_index(self) -> int:
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        raise ValueError("zero linear form has no leading coefficient")

    def monic(self) -> Tuple[int, "LinearForm"]:
        """Return (s, L) with self = s * L and L's first nonzero coefficient 1."""
        lead = self.coeffs[self.lead_index()]
        inv = pow(lead, -1, self.prime)
        return lead, LinearForm(tuple(c * inv % self.prime for c in self.coeffs), self.prime)

    def t_part(self) -> "LinearForm":
        """The form with its h-coefficient dropped."""
        return LinearForm(self.coeffs[:-1] + (0,), self.prime)

    def __add__(self, other: "LinearForm") -> "LinearForm":
        return LinearForm(tuple((a + b) % self.prime for a, b in zip(self.coeffs, other.coeffs)), self.prime)

    def __neg__(self) -> "LinearForm":
        return self.scale(-1)

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + (-other)

    def scale(self, k: int) -> "LinearForm":
        return LinearForm(tuple(k * c % self.prime for c in self.coeffs), self.prime)

    def to_poly(self, ring: CoefficientRing) -> PolyElement:
        poly = ring.zero
        for gen, c in zip(ring.lambdas + (ring.h,), self.coeffs):
            if c:
                poly += gen * c
        return poly

    def proportional_to(self, other: "LinearForm") -> bool:
        if self.is_zero or other.is_zero:
            return False
        return self.monic()[1] == other.monic()[1]

    def __str__(self) -> str:
        return format_poly(self.to_poly(coefficient_ring(self.prime, len(self.coeffs) - 1)))


def kernel_substitution(ring: CoefficientRing, form: LinearForm) -> List[Tuple[PolyElement, PolyElement]]:
    """
    Substitution x_k -> -c_k^{-1} sum_{j != k} c_j x_j solving form = 0, where
    x_k is the first variable with nonzero coefficient.
    """
    k = form.lead_index()
    gens = ring.lambdas + (ring.h,)
    inv = ring.inverse(form.coeffs[k])
    image = ring.zero
    for j, c in enumerate(form.coeffs):
        if j != k and c:
            image += gens[j] * (-c * inv % ring.prime)
    return [(gens[k], image)]


def vanishes_on(ring: CoefficientRing, f: PolyElement, form: LinearForm) -> bool:
    """True iff the linear form divides f."""
    if not f:
        return True
    return not f.compose(kernel_substitution(ring, form))


def exact_divide(ring: CoefficientRing, f: PolyElement, form: LinearForm) -> PolyElement:
    return f.exquo(form.to_poly(ring))


class RatFun:
    """
    Numerator polynomial over a multiset of monic linear forms.

    Instances are kept reduced: no denominator factor divides the numerator.
    """

    __slots__ = ("ring", "num", "den")

    def __init__(self, ring: CoefficientRing, num: PolyElement, den: Iterable[LinearForm] = (), reduce: bool = True):
        self.ring = ring
        factors = []
        for form in den:
            if form.is_zero:
                raise ZeroDivisionError("denominator factor vanishes mod p")
            scalar, monic = form.monic()
            if scalar != 1:
                num = num * ring.inverse(scalar)
            factors.append(monic)
        self.num = num
        self.den: Tuple[LinearForm, ...] = tuple(sorted(factors, key=lambda f: f.coeffs))
        if reduce:
            self._reduce()

    @classmethod
    def from_poly(cls, ring: CoefficientRing, poly: PolyElement) -> "RatFun":
        return cls(ring, poly, (), reduce=False)

    def _reduce(self) -> None:
        if not self.num:
            self.den = ()
            return
        kept = []
        num = self.num
        for form in self.den:
            if vanishes_on(self.ring, num, form):
                num = exact_divide(self.ring, num, form)
            else:
                kept.append(form)
        self.num = num
        self.den = tuple(kept)

    @property
    def is_polynomial(self) -> bool:
        return not self.den

    def to_poly(self) -> PolyElement:
        if self.den:
            raise ValueError(f"not a polynomial: {format_ratfun(self)}")
        return self.num

    def _den_poly(self, forms: Iterable[LinearForm]) -> PolyElement:
        poly = self.ring.one
        for form in forms:
            poly *= form.to_poly(self.ring)
        return poly

    def _lift(self, other: Any) -> "RatFun":
        if isinstance(other, RatFun):
            return other
        if isinstance(other, int):
            return RatFun.from_poly(self.ring, self.ring.scalar(other))
        return RatFun.from_poly(self.ring, other)

    def __add__(self, other: Any) -> "RatFun":
        other = self._lift(other)
        if not other.num:
            return self
        if not self.num:
            return other
        mine = list(self.den)
        theirs = list(other.den)
        common = []
        for form in list(mine):
            if form in theirs:
                theirs.remove(form)
                mine.remove(form)
                common.append(form)
        num = self.num * self._den_poly(theirs) + other.num * self._den_poly(mine)
        return RatFun(self.ring, num, common + mine + theirs)

    __radd__ = __add__

    def __neg__(self) -> "RatFun":
        return RatFun(self.ring, -self.num, self.den, reduce=False)

    def __sub__(self, other: Any) -> "RatFun":
        return self + (-self._lift(other))

    def __rsub__(self, other: Any) -> "RatFun":
        return self._lift(other) + (-self)

    def __mul__(self, other: Any) -> Any:
        if isinstance(other, NovikovSeries):
            return other.scale(self)
        other = self._lift(other)
        if not self.num or not other.num:
            return RatFun.from_poly(self.ring, self.ring.zero)
        return RatFun(self.ring, self.num * other.num, self.den + other.den)

    __rmul__ = __mul__

    def divide_by_forms(self, forms: Iterable[LinearForm]) -> "RatFun":
        return RatFun(self.ring, self.num, self.den + tuple(forms))

    def __bool__(self) -> bool:
        return bool(self.num)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RatFun):
            return self.num == other.num and self.den == other.den
        if isinstance(other, int):
            return not self.den and self.num == self.ring.scalar(other)
        if isinstance(other, PolyElement):
            return not self.den and self.num == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __repr__(self) -> str:
        return f"RatFun({format_ratfun(self)})"


def ratfun_reduce(x: RatFun) -> RatFun:
    """Cancel every denominator factor dividing the numerator exactly."""
    return RatFun(x.ring, x.num, x.den)


Coefficient = Union[PolyElement, RatFun]


def _height(exponent: Exponent) -> int:
    return sum(exponent)


class NovikovSeries:
    """
    Truncated series sum_A c_A q^A over the nonnegative coroot cone.

    Terms with coroot height above ``order`` are discarded by every operation.
    """

    __slots__ = ("ring", "rank", "order", "terms")

    def __init__(self, ring: CoefficientRing, rank: int, order: int, terms: Optional[Mapping[Exponent, Coefficient]] = None):
        self.ring = ring
        self.rank = rank
        self.order = order
        self.terms: Dict[Exponent, Coefficient] = {}
        if terms:
            for exp, c in terms.items():
                if c and _height(exp) <= order:
                    self.terms[tuple(exp)] = c

    @classmethod
    def constant(cls, ring: CoefficientRing, rank: int, order: int, value: Coefficient) -> "NovikovSeries":
        return cls(ring, rank, order, {(0,) * rank: value})

    @classmethod
    def zero(cls, ring: CoefficientRing, rank: int, order: int) -> "NovikovSeries":
        return cls(ring, rank, order)

    def _like(self, terms: Mapping[Exponent, Coefficient]) -> "NovikovSeries":
        return NovikovSeries(self.ring, self.rank, self.order, terms)

    def _check(self, other: "NovikovSeries") -> None:
        if other.order != self.order or other.rank != self.rank:
            raise ValueError(f"Truncation mismatch: order {self.order} vs {other.order}")

    def __add__(self, other: "NovikovSeries") -> "NovikovSeries":
        self._check(other)
        terms = dict(self.terms)
        for exp, c in other.terms.items():
            terms[exp] = terms[exp] + c if exp in terms else c
        return self._like(terms)

    def __neg__(self) -> "NovikovSeries":
        return self._like({exp: -c for exp, c in self.terms.items()})

    def __sub__(self, other: "NovikovSeries") -> "NovikovSeries":
        return self + (-other)

    def __mul__(self, other: Any) -> "NovikovSeries":
        if not isinstance(other, NovikovSeries):
            return self.scale(other)
        self._check(other)
        terms: Dict[Exponent, Coefficient] = {}
        for e1, c1 in self.terms.items():
            h1 = _height(e1)
            for e2, c2 in other.terms.items():
                if h1 + _height(e2) > self.order:
                    continue
                exp = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                terms[exp] = terms[exp] + prod if exp in terms else prod
        return self._like(terms)

    def scale(self, value: Any) -> "NovikovSeries":
        if isinstance(value, RatFun):
            return self._like({exp: value * c for exp, c in self.terms.items()})
        return self._like({exp: c * value for exp, c in self.terms.items()})

    def shift_q(self, coroot: Coroot) -> "NovikovSeries":
        """Multiply by q^A."""
        return self._like({tuple(a + b for a, b in zip(exp, coroot.coords)): c for exp, c in self.terms.items()})

    def derive(self, b: Weight) -> "NovikovSeries":
        """Novikov derivative: q^A -> <b, A> q^A."""
        terms = {}
        for exp, c in self.terms.items():
            k = sum(x * y for x, y in zip(b.coords, exp)) % self.ring.prime
            if k:
                terms[exp] = c * k
        return self._like(terms)

    def truncate(self, order: int) -> "NovikovSeries":
        return NovikovSeries(self.ring, self.rank, order, {e: c for e, c in self.terms.items() if _height(e) <= order})

    def coefficient(self, exp: Exponent) -> Optional[Coefficient]:
        return self.terms.get(tuple(exp))

    def constant_term(self) -> Optional[Coefficient]:
        return self.terms.get((0,) * self.rank)

    def map_coefficients(self, fn: Callable[[Coefficient], Coefficient]) -> "NovikovSeries":
        return self._like({exp: fn(c) for exp, c in self.terms.items()})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NovikovSeries):
            return NotImplemented
        return self.order == other.order and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.order, tuple(sorted(self.terms.items(), key=lambda kv: kv[0]))))

    def __repr__(self) -> str:
        return f"NovikovSeries({format_series(self)})"


def geometric_expand(a: Coroot, order: int, ring: CoefficientRing) -> NovikovSeries:
    """Truncated expansion of q^a / (1 - q^a)."""
    if not a.is_positive:
        raise ValueError(f"geometric_expand needs a positive coroot, got {a.coords}")
    terms = {}
    k = 1
    while k * a.height <= order:
        terms[a.scale(k).coords] = ring.one
        k += 1
    return NovikovSeries(ring, len(a.coords), order, terms)


def _poly_specialize(ring: CoefficientRing, f: PolyElement, assignment: Mapping[str, Any]) -> PolyElement:
    zeros = {ring.names.index(name) for name, value in assignment.items() if name != "q" and isinstance(value, int) and value == 0}
    if zeros:
        f = ring.ring.from_dict({m: c for m, c in f.items() if all(m[i] == 0 for i in zeros)})
    replacements = []
    for name, value in assignment.items():
        if name == "q" or (isinstance(value, int) and value == 0):
            continue
        gen = ring.ring.gens[ring.names.index(name)]
        replacements.append((gen, ring.scalar(value) if isinstance(value, int) else value))
    if replacements and f:
        f = f.compose(replacements)
    return f


def specialize(f: Any, assignment: Mapping[str, Any]) -> Any:
    """
    Exact substitution of variables.

    Keys are variable names ("t", "h", "l1", ...) mapped to ring elements or
    integers, or "q" mapped to 0, which keeps only the height-0 Novikov term.
    """
    for name, value in assignment.items():
        if name == "q" and value != 0:
            raise ValueError("only q -> 0 is supported")
    if isinstance(f, NovikovSeries):
        source = f
        if "q" in assignment:
            const = f.constant_term()
            source = f._like({(0,) * f.rank: const} if const else {})
        rest = {k: v for k, v in assignment.items() if k != "q"}
        if not rest:
            return source
        return source.map_coefficients(lambda c: _poly_specialize(f.ring, c, rest))
    if isinstance(f, RatFun):
        raise TypeError("specialize works on polynomials and series")
    ring = _ring_of(f)
    for name in assignment:
        if name != "q" and name not in ring.names:
            raise ValueError(f"unknown variable {name}")
    return _poly_specialize(ring, f, {k: v for k, v in assignment.items() if k != "q"})


def _ring_of(f: PolyElement) -> CoefficientRing:
    return coefficient_ring(f.ring.domain.mod, f.ring.ngens - 2)


def shift_h(f: Any) -> Any:
    """Substitute h -> h - t."""
    if isinstance(f, NovikovSeries):
        ring = f.ring
    else:
        ring = _ring_of(f)
    return specialize(f, {"h": ring.h - ring.t})


def poly_frobenius(f: PolyElement, prime: int) -> PolyElement:
    return f.ring.from_dict({tuple(e * prime for e in m): c for m, c in f.items()})


def frobenius(f: NovikovSeries, order: Optional[int] = None) -> NovikovSeries:
    """
    f^p computed term by term (freshman's dream): every exponent, Novikov or
    polynomial, is multiplied by p.
    """
    p = f.ring.prime
    target = f.order * p if order is None else order
    terms = {}
    for exp, c in f.terms.items():
        if _height(exp) * p <= target:
            terms[tuple(e * p for e in exp)] = poly_frobenius(c, p)
    return NovikovSeries(f.ring, f.rank, target, terms)


def h_component(ring: CoefficientRing, f: PolyElement, k: int) -> PolyElement:
    """The h-free coefficient of h^k in f."""
    hi = ring.h_index
    return ring.ring.from_dict({m[:hi] + (0,) + m[hi + 1 :]: c for m, c in f.items() if m[hi] == k})


def degree_in(ring: CoefficientRing, f: PolyElement, name: str) -> int:
    """Degree in one variable; -1 for the zero polynomial."""
    idx = ring.names.index(name)
    return max((m[idx] for m in f.keys()), default=-1)


def is_homogeneous(f: PolyElement, degree: Optional[int] = None) -> bool:
    degrees = {sum(m) for m in f.keys()}
    if not degrees:
        return True
    if len(degrees) > 1:
        return False
    return degree is None or degrees == {degree}


def is_linear_form(ring: CoefficientRing, f: PolyElement, allow_t: bool = False) -> bool:
    """Homogeneous of degree 1 (or zero), optionally forbidding t."""
    if not f:
        return True
    if not is_homogeneous(f, 1):
        return False
    return allow_t or degree_in(ring, f, "t") <= 0


# Canonical text form


def _print_key(ring: CoefficientRing, monom: Monomial) -> Tuple[int, ...]:
    ordered = (monom[ring.t_index], monom[ring.h_index]) + tuple(reversed(monom[: ring.nlambda]))
    return (sum(monom),) + ordered


def _format_monomial(ring: CoefficientRing, monom: Monomial) -> List[str]:
    parts = []
    order = [ring.t_index, ring.h_index] + list(reversed(range(ring.nlambda)))
    for idx in order:
        e = monom[idx]
        if e == 1:
            parts.append(ring.names[idx])
        elif e > 1:
            parts.append(f"{ring.names[idx]}^{e}")
    return parts


def _format_terms(ring: CoefficientRing, f: PolyElement, prefix: Optional[str] = None) -> List[str]:
    out = []
    for monom in sorted(f.keys(), key=lambda m: _print_key(ring, m), reverse=True):
        c = ring.coeff(f[monom])
        parts = _format_monomial(ring, monom)
        if c != 1 or not parts:
            parts = [str(c)] + parts
        if prefix:
            parts = [prefix] + parts
        out.append("*".join(parts))
    return out


def format_poly(f: PolyElement, ring: Optional[CoefficientRing] = None) -> str:
    ring = ring or _ring_of(f)
    terms = _format_terms(ring, f)
    return " + ".join(terms) if terms else "0"


def format_ratfun(x: RatFun) -> str:
    num = format_poly(x.num, x.ring)
    if not x.den:
        return num
    forms = ";".join(format_poly(form.to_poly(x.ring), x.ring) for form in x.den)
    return f"({num}) / {{{forms}}}"


def format_value(value: Any) -> str:
    """Canonical text for a polynomial, rational function or series."""
    if isinstance(value, NovikovSeries):
        return format_series(value)
    if isinstance(value, RatFun):
        return format_ratfun(value)
    return format_poly(value)


def format_series(f: NovikovSeries) -> str:
    """Canonical text: descending Novikov exponents, then descending monomials."""
    out = []
    for exp in sorted(f.terms, reverse=True):
        c = f.terms[exp]
        prefix = None if not any(exp) else "q[" + ",".join(str(e) for e in exp) + "]"
        if isinstance(c, RatFun):
            text = format_ratfun(c)
            out.append(f"{prefix}*({text})" if prefix else text)
            continue
        out.extend(_format_terms(f.ring, c, prefix))
    return " + ".join(out) if out else "0"


_FACTOR = re.compile(r"^([a-z]\w*)(?:\^(\d+))?$")


def parse_poly(text: str, ring: CoefficientRing) -> PolyElement:
    """Inverse of format_poly."""
    series = parse_series(text, ring, rank=0, order=0, allow_q=False)
    const = series.constant_term()
    return const if const is not None else ring.zero


def parse_series(text: str, ring: CoefficientRing, rank: int, order: int, allow_q: bool = True) -> NovikovSeries:
    """Inverse of format_series for polynomial coefficients."""
    buckets: Dict[Exponent, Dict[Monomial, int]] = {}
    text = text.strip()
    if text and text != "0":
        for term in text.split(" + "):
            exp: Exponent = (0,) * rank
            monom = [0] * ring.ngens
            coeff = 1
            for factor in term.strip().split("*"):
                if factor.startswith("q["):
                    if not allow_q:
                        raise ValueError(f"unexpected Novikov factor in '{text}'")
                    exp = tuple(int(x) for x in factor[2:-1].split(","))
                elif factor.isdigit():
                    coeff = coeff * int(factor)
                else:
                    match = _FACTOR.match(factor)
                    if not match or match.group(1) not in ring.names:
                        raise ValueError(f"cannot parse factor '{factor}'")
                    monom[ring.names.index(match.group(1))] += int(match.group(2) or 1)
            bucket = buckets.setdefault(exp, {})
            key = tuple(monom)
            bucket[key] = (bucket.get(key, 0) + coeff) % ring.prime
    terms = {exp: ring.from_terms(monos) for exp, monos in buckets.items()}
    return NovikovSeries(ring, rank, order, terms)


def parse_ratfun(text: str, ring: CoefficientRing) -> RatFun:
    text = text.strip()
    if " / {" not in text:
        return RatFun.from_poly(ring, parse_poly(text, ring))
    num_text, den_text = text.split(" / {", 1)
    num = parse_poly(num_text.strip()[1:-1], ring)
    forms = []
    for piece in den_text.rstrip("}").split(";"):
        poly = parse_poly(piece, ring)
        coeffs = [0] * (ring.nlambda + 1)
        for m, c in poly.items():
            coeffs[m.index(1)] = ring.coeff(c)
        forms.append(ring.form(coeffs))
    return RatFun(ring, num, forms)
