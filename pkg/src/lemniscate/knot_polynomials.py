"""Burau matrices and Alexander polynomials of braid closures."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .braids import BraidWord, braid_permutation, prime_power
from .errors import AlgebraError, MultiComponent


class IntLaurentPoly:
    """Laurent polynomial in ``t``; coefficients are Fractions while computing."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, object] | None = None):
        self.terms = {int(k): Fraction(v) for k, v in (terms or {}).items() if v}

    @classmethod
    def t(cls, k: int = 1) -> "IntLaurentPoly":
        return cls({k: 1})

    @classmethod
    def from_coeffs(cls, min_exp: int, coeffs) -> "IntLaurentPoly":
        return cls({min_exp + i: c for i, c in enumerate(coeffs)})

    @property
    def min_exp(self) -> int:
        return min(self.terms) if self.terms else 0

    @property
    def max_exp(self) -> int:
        return max(self.terms) if self.terms else 0

    @property
    def span(self) -> int:
        return self.max_exp - self.min_exp if self.terms else 0

    def coeff_list(self) -> list[Fraction]:
        if not self.terms:
            return []
        lo = self.min_exp
        return [self.terms.get(lo + i, Fraction(0)) for i in range(self.span + 1)]

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, int):
            other = IntLaurentPoly({0: other})
        return isinstance(other, IntLaurentPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        if not isinstance(other, IntLaurentPoly):
            other = IntLaurentPoly({0: other})
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return IntLaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return IntLaurentPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, IntLaurentPoly):
            other = IntLaurentPoly({0: other})
        out: dict[int, Fraction] = {}
        for i, a in self.terms.items():
            for j, b in other.terms.items():
                out[i + j] = out.get(i + j, 0) + a * b
        return IntLaurentPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = IntLaurentPoly({0: 1})
        for _ in range(n):
            out = out * self
        return out

    def exact_div(self, other: "IntLaurentPoly") -> "IntLaurentPoly":
        """Quotient when ``other`` divides ``self`` exactly."""
        if not other:
            raise ZeroDivisionError("division by zero polynomial")
        if not self:
            return IntLaurentPoly()
        num = self.coeff_list()
        den = other.coeff_list()
        q = [Fraction(0)] * max(len(num) - len(den) + 1, 0)
        num = list(num)
        for i in range(len(q) - 1, -1, -1):
            c = num[i + len(den) - 1] / den[-1]
            q[i] = c
            if c:
                for j, d in enumerate(den):
                    num[i + j] -= c * d
        if any(num) or not q:
            raise AlgebraError("Laurent division is not exact")
        return IntLaurentPoly.from_coeffs(self.min_exp - other.min_exp, q)

    def __call__(self, t):
        return sum(c * t**k for k, c in self.terms.items())

    def shift(self, k: int) -> "IntLaurentPoly":
        return IntLaurentPoly({e + k: c for e, c in self.terms.items()})

    def substitute_inverse(self) -> "IntLaurentPoly":
        """``p(1/t)``."""
        return IntLaurentPoly({-e: c for e, c in self.terms.items()})

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.terms.values())

    def to_dict(self) -> dict:
        if not self.is_integral():
            raise AlgebraError("only integer Laurent polynomials serialise")
        return {"minExp": self.min_exp, "coeffs": [int(c) for c in self.coeff_list()]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "IntLaurentPoly":
        return cls.from_coeffs(int(d["minExp"]), d["coeffs"])

    def __repr__(self):
        return f"IntLaurentPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms):
            c = self.terms[k]
            mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            if mono and abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        return " ".join([head] + [f"{s} {b}" for s, b in parts[1:]])


ONE = IntLaurentPoly({0: 1})
T = IntLaurentPoly.t(1)
T_INV = IntLaurentPoly.t(-1)


# ---------------------------------------------------------------------------
# Burau representation

Matrix = list[list[IntLaurentPoly]]


def identity(n: int) -> Matrix:
    return [[ONE if i == j else IntLaurentPoly() for j in range(n)] for i in range(n)]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, m, p = len(a), len(b), len(b[0])
    out = [[IntLaurentPoly() for _ in range(p)] for _ in range(n)]
    for i in range(n):
        for k in range(m):
            if not a[i][k]:
                continue
            for j in range(p):
                if b[k][j]:
                    out[i][j] = out[i][j] + a[i][k] * b[k][j]
    return out


def burau_of_letter(k: int, sign: int, s: int) -> Matrix:
    """Unreduced Burau matrix of ``sigma_k**sign`` on ``s`` strands."""
    if not 1 <= k <= s - 1:
        raise ValueError(f"generator {k} outside 1..{s - 1}")
    m = identity(s)
    i = k - 1
    if sign > 0:
        block = [[ONE - T, T], [ONE, IntLaurentPoly()]]
    else:
        block = [[IntLaurentPoly(), ONE], [T_INV, ONE - T_INV]]
    for a in range(2):
        for b in range(2):
            m[i + a][i + b] = block[a][b]
    return m


def burau_of_word(word: BraidWord) -> Matrix:
    out = identity(word.strands)
    for k, e in word.letters:
        out = mat_mul(out, burau_of_letter(k, e, word.strands))
    return out


def determinant(m: Matrix) -> IntLaurentPoly:
    """Fraction-free (Bareiss) determinant with exact Laurent division."""
    n = len(m)
    if n == 0:
        return ONE
    a = [row[:] for row in m]
    sign = 1
    prev = ONE
    for k in range(n - 1):
        if not a[k][k]:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return IntLaurentPoly()
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]).exact_div(prev)
        prev = a[k][k]
    return a[n - 1][n - 1] * sign


def normalize_alexander(p: IntLaurentPoly) -> IntLaurentPoly:
    """Symmetric representative with ``p(1) = 1``."""
    if not p:
        raise AlgebraError("Alexander polynomial vanished")
    if p.span % 2:
        raise AlgebraError(f"odd span {p.span}; not a knot Alexander polynomial")
    p = p.shift(-p.min_exp - p.span // 2)
    value = p(1)
    if value not in (1, -1):
        raise AlgebraError(f"Alexander polynomial has p(1) = {value}")
    if value == -1:
        p = -p
    if p.substitute_inverse() != p:
        raise AlgebraError("Alexander polynomial is not symmetric")
    return p


def alexander_from_braid(word: BraidWord) -> IntLaurentPoly:
    """Alexander polynomial of the closure of ``word`` (knots only).

    Deleting the last row and column of ``Burau(word) - I`` leaves a matrix
    whose determinant is the Alexander polynomial up to a unit ``+-t^k``.
    """
    _, cycles = braid_permutation(word)
    if cycles != 1:
        raise MultiComponent(f"closure has {cycles} components")
    if word.strands == 1:
        return ONE
    b = burau_of_word(word)
    n = word.strands - 1
    minor = [[b[i][j] - (ONE if i == j else 0) for j in range(n)] for i in range(n)]
    return normalize_alexander(determinant(minor))


def theorem2_alexander(n: int) -> IntLaurentPoly:
    """``sum_{k=-n}^{n} (-1)^(n+k) (2(n-|k|)+1) t^k``."""
    if n < 1:
        raise ValueError("n must be positive")
    return IntLaurentPoly({k: (-1) ** (n + k) * (2 * (n - abs(k)) + 1) for k in range(-n, n + 1)})


def knot_determinant(delta: IntLaurentPoly) -> int:
    return abs(int(delta(Fraction(-1))))


# ---------------------------------------------------------------------------
# consistency checks for spiral knots


def _mod_p_profile(p: IntLaurentPoly, prime: int) -> list[int]:
    coeffs = [int(c) % prime for c in p.coeff_list()]
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def murasugi_mod_check(delta: IntLaurentPoly, s: int, r: int) -> bool:
    """``delta == (1 + t + ... + t^(s-1))^(r-1) mod p`` up to ``+-t^j``, ``r = p^k``."""
    pp = prime_power(r)
    if pp is None:
        raise ValueError(f"r = {r} is not a prime power")
    if not delta.is_integral():
        return False
    prime = pp[0]
    target = _mod_p_profile(IntLaurentPoly({k: 1 for k in range(s)}) ** (r - 1), prime)
    got = _mod_p_profile(delta, prime)
    negated = [(-c) % prime for c in got]
    return got == target or negated == target


@dataclass(frozen=True)
class GenusReport:
    span: int
    lower: Fraction
    upper: Fraction
    prime_power: bool
    consistent: bool

    @property
    def genus(self) -> Fraction | None:
        return self.upper if self.prime_power or self.lower == self.upper else None

    def to_dict(self) -> dict:
        g = self.genus
        return {
            "span": self.span,
            "lower": str(self.lower),
            "upper": str(self.upper),
            "prime_power": self.prime_power,
            "consistent": self.consistent,
            "genus": None if g is None else str(g),
        }


def genus_degree_check(delta: IntLaurentPoly, s: int, r: int) -> GenusReport:
    """Compare half the Alexander span with ``(s-1)(r-1)/2``."""
    lower = Fraction(delta.span, 2)
    upper = Fraction((s - 1) * (r - 1), 2)
    pp = r == 1 or prime_power(r) is not None
    ok = lower <= upper and (lower == upper if pp else True)
    return GenusReport(delta.span, lower, upper, pp, ok)
