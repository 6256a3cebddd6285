"""Exact arithmetic for the braid-polynomial construction.

Values are built from three layers:

* :class:`GaussianRational`, an element of Q(i);
* :class:`CyclotomicElement`, an element of Q(zeta_N) stored in the power basis
  modulo the N-th cyclotomic polynomial;
* :class:`ExpLaurentPoly`, a finite sum ``sum_m c_m exp(i m h / D)`` with
  cyclotomic coefficients, used for the height dependence of each strand.

:class:`SemiholoPolynomial` is the final product: a polynomial in ``u``, ``v``
and ``conj(v)`` with Gaussian-rational coefficients.  Rationals are plain
:class:`fractions.Fraction`.
"""

from __future__ import annotations

import cmath
import json
import math
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Mapping

import numpy as np

from .errors import NonIntegerExponent, NotGaussian, OrderMismatch

Rational = Fraction


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions, ``"p/q"`` strings and ``[p, q]`` pairs."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (list, tuple)):
        num, den = x
        return Fraction(int(num), int(den))
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


def _lcm(*values: int) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


# ---------------------------------------------------------------------------
# Q(i)


class GaussianRational:
    """Exact ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = as_fraction(re)
        self.im = as_fraction(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(as_fraction(x.real), as_fraction(x.imag))
        return cls(x, 0)

    def __add__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.coerce(other)
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return self * GaussianRational(other.re / norm, -other.im / norm)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return (GaussianRational(1) / self) ** (-n)
        out = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __eq__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"

    def denominator_lcm(self) -> int:
        return _lcm(self.re.denominator, self.im.denominator)


I = GaussianRational(0, 1)


# ---------------------------------------------------------------------------
# Q(zeta_N)


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    if n < 1:
        raise ValueError("order must be positive")
    # x^n - 1 divided by Phi_d for every proper divisor d
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num = _exact_poly_div(num, list(cyclotomic_polynomial(d)))
    return tuple(num)


def _exact_poly_div(num: list[int], den: list[int]) -> list[int]:
    # den is monic
    num = list(num)
    dd = len(den) - 1
    quot = [0] * (len(num) - dd)
    for k in range(len(num) - 1, dd - 1, -1):
        c = num[k]
        if c:
            quot[k - dd] = c
            for i in range(dd + 1):
                num[k - dd + i] -= c * den[i]
    if any(num[:dd]):
        raise ArithmeticError("inexact polynomial division")
    return quot


def _reduce_inplace(vec: list[int], phi: tuple[int, ...]) -> list[int]:
    d = len(phi) - 1
    for k in range(len(vec) - 1, d - 1, -1):
        c = vec[k]
        if c:
            base = k - d
            for i in range(d):
                if phi[i]:
                    vec[base + i] -= c * phi[i]
            vec[k] = 0
    return vec[:d] + [0] * max(0, d - len(vec))


@lru_cache(maxsize=None)
def _power_table(n: int) -> tuple[tuple[int, ...], ...]:
    """Reduced power-basis vectors of zeta_n^k for k = 0..n-1."""
    phi = cyclotomic_polynomial(n)
    d = len(phi) - 1
    rows = []
    for k in range(n):
        vec = [0] * max(k + 1, d)
        vec[k] = 1
        rows.append(tuple(_reduce_inplace(vec, phi)))
    return tuple(rows)


def totient(n: int) -> int:
    return len(cyclotomic_polynomial(n)) - 1


class CyclotomicElement:
    """Element of Q(zeta_N) as ``(nums / den)`` in the reduced power basis.

    ``nums`` has length ``phi(N)``; ``den`` is positive and coprime to the
    content of ``nums``, so equality is tuple equality.
    """

    __slots__ = ("order", "nums", "den")

    def __init__(self, order: int, nums: Iterable[int], den: int = 1):
        nums = [int(c) for c in nums]
        d = totient(order)
        if len(nums) > d:
            nums = _reduce_inplace(nums, cyclotomic_polynomial(order))
        elif len(nums) < d:
            nums = nums + [0] * (d - len(nums))
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            nums = [-c for c in nums]
            den = -den
        g = reduce(math.gcd, nums, den)
        if g > 1:
            nums = [c // g for c in nums]
            den //= g
        self.order = order
        self.nums = tuple(nums)
        self.den = den

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_rational(cls, order: int, x) -> "CyclotomicElement":
        x = as_fraction(x)
        return cls(order, [x.numerator], x.denominator)

    @classmethod
    def zeta(cls, order: int, k: int = 1) -> "CyclotomicElement":
        return cls(order, _power_table(order)[k % order])

    @classmethod
    def from_gaussian(cls, order: int, g) -> "CyclotomicElement":
        if order % 4:
            raise OrderMismatch(f"Q(i) does not embed in Q(zeta_{order})")
        g = GaussianRational.coerce(g)
        return cls.from_rational(order, g.re) + cls.from_rational(order, g.im) * cls.zeta(
            order, order // 4
        )

    # -- structure ------------------------------------------------------------
    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self.den) for c in self.nums)

    def is_zero(self) -> bool:
        return not any(self.nums)

    def __bool__(self):
        return not self.is_zero()

    def lift(self, order: int) -> "CyclotomicElement":
        """Embed into Q(zeta_order); ``order`` must be a multiple of ours."""
        if order == self.order:
            return self
        if order % self.order:
            raise OrderMismatch(f"cannot embed order {self.order} into {order}")
        step = order // self.order
        table = _power_table(order)
        out = [0] * totient(order)
        for k, c in enumerate(self.nums):
            if c:
                row = table[(k * step) % order]
                for i, r in enumerate(row):
                    if r:
                        out[i] += c * r
        return CyclotomicElement(order, out, self.den)

    def _check(self, other):
        if not isinstance(other, CyclotomicElement):
            other = CyclotomicElement.from_rational(self.order, other)
        if other.order != self.order:
            raise OrderMismatch(f"orders differ: {self.order} vs {other.order}")
        return other

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = self._check(other)
        den = self.den * other.den // math.gcd(self.den, other.den)
        fa, fb = den // self.den, den // other.den
        return CyclotomicElement(
            self.order, [a * fa + b * fb for a, b in zip(self.nums, other.nums)], den
        )

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicElement(self.order, [-c for c in self.nums], self.den)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            x = Fraction(other)
            return CyclotomicElement(
                self.order, [c * x.numerator for c in self.nums], self.den * x.denominator
            )
        other = self._check(other)
        a = [(i, c) for i, c in enumerate(self.nums) if c]
        b = [(j, c) for j, c in enumerate(other.nums) if c]
        prod = [0] * (2 * len(self.nums))
        for i, ca in a:
            for j, cb in b:
                prod[i + j] += ca * cb
        phi = cyclotomic_polynomial(self.order)
        return CyclotomicElement(self.order, _reduce_inplace(prod, phi), self.den * other.den)

    __rmul__ = __mul__

    def conjugate(self) -> "CyclotomicElement":
        """Complex conjugation, zeta -> zeta^-1."""
        table = _power_table(self.order)
        out = [0] * len(self.nums)
        for k, c in enumerate(self.nums):
            if c:
                for i, r in enumerate(table[(-k) % self.order]):
                    if r:
                        out[i] += c * r
        return CyclotomicElement(self.order, out, self.den)

    def __eq__(self, other):
        if not isinstance(other, CyclotomicElement):
            try:
                other = CyclotomicElement.from_rational(self.order, other)
            except (TypeError, ValueError):
                return NotImplemented
        if other.order != self.order:
            order = _lcm(self.order, other.order)
            return self.lift(order) == other.lift(order)
        return self.nums == other.nums and self.den == other.den

    def __hash__(self):
        return hash((self.order, self.nums, self.den))

    def __complex__(self):
        z = cmath.exp(2j * cmath.pi / self.order)
        return sum(c * z**k for k, c in enumerate(self.nums)) / self.den

    def __repr__(self):
        terms = [f"{c}*z^{k}" for k, c in enumerate(self.nums) if c]
        body = " + ".join(terms) or "0"
        return f"CyclotomicElement(N={self.order}, ({body})/{self.den})"


def cyclo_mul(x: CyclotomicElement, y: CyclotomicElement) -> CyclotomicElement:
    if x.order != y.order:
        raise OrderMismatch(f"orders differ: {x.order} vs {y.order}")
    return x * y


def cyclo_to_gaussian(x: CyclotomicElement) -> GaussianRational:
    """Return ``p + q i`` equal to ``x``; raise :class:`NotGaussian` otherwise."""
    if x.order % 4:
        raise OrderMismatch(f"order {x.order} is not a multiple of 4")
    i_vec = _power_table(x.order)[x.order // 4]
    pivot = next(k for k in range(len(i_vec)) if k and i_vec[k])
    q = Fraction(x.nums[pivot], x.den * i_vec[pivot])
    p = Fraction(x.nums[0], x.den) - q * i_vec[0]
    candidate = CyclotomicElement.from_rational(x.order, p) + CyclotomicElement(
        x.order, i_vec
    ) * q
    if candidate != x:
        raise NotGaussian(f"{x!r} is not in Q(i)")
    return GaussianRational(p, q)


# ---------------------------------------------------------------------------
# sums of exp(i m h / D)


class ExpLaurentPoly:
    """``sum_m terms[m] * exp(i m h / denom)`` with coefficients in Q(zeta_order)."""

    __slots__ = ("denom", "order", "terms")

    def __init__(self, denom: int, order: int, terms: Mapping[int, CyclotomicElement] = None):
        if denom < 1:
            raise ValueError("denominator frequency must be positive")
        self.denom = denom
        self.order = order
        clean = {}
        for m, c in (terms or {}).items():
            if not isinstance(c, CyclotomicElement):
                c = CyclotomicElement.from_rational(order, c)
            c = c.lift(order)
            if c:
                clean[int(m)] = c
        self.terms = clean

    @classmethod
    def constant(cls, c, order: int = 4, denom: int = 1) -> "ExpLaurentPoly":
        if isinstance(c, GaussianRational):
            c = CyclotomicElement.from_gaussian(order, c)
        return cls(denom, order, {0: c})

    def rescale(self, denom: int, order: int) -> "ExpLaurentPoly":
        if denom % self.denom:
            raise ValueError(f"cannot rescale denominator {self.denom} to {denom}")
        f = denom // self.denom
        return ExpLaurentPoly(denom, order, {m * f: c for m, c in self.terms.items()})

    def _common(self, other: "ExpLaurentPoly"):
        denom = _lcm(self.denom, other.denom)
        order = _lcm(self.order, other.order)
        return self.rescale(denom, order), other.rescale(denom, order)

    def minimal(self) -> "ExpLaurentPoly":
        """Same sum over the smallest denominator frequency."""
        g = reduce(math.gcd, self.terms, self.denom)
        return ExpLaurentPoly(self.denom // g, self.order, {m // g: c for m, c in self.terms.items()})

    def __add__(self, other):
        if not isinstance(other, ExpLaurentPoly):
            other = ExpLaurentPoly.constant(other, self.order, self.denom)
        a, b = self._common(other)
        out = dict(a.terms)
        for m, c in b.terms.items():
            out[m] = out[m] + c if m in out else c
        return ExpLaurentPoly(a.denom, a.order, out)

    __radd__ = __add__

    def __neg__(self):
        return ExpLaurentPoly(self.denom, self.order, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return ExpLaurentPoly(self.denom, self.order, {m: c * other for m, c in self.terms.items()})
        if isinstance(other, CyclotomicElement):
            order = _lcm(self.order, other.order)
            o = other.lift(order)
            return ExpLaurentPoly(
                self.denom, order, {m: c.lift(order) * o for m, c in self.terms.items()}
            )
        a, b = self._common(other)
        out: dict[int, CyclotomicElement] = {}
        for m, c in a.terms.items():
            for n, d in b.terms.items():
                k = m + n
                p = c * d
                out[k] = out[k] + p if k in out else p
        return ExpLaurentPoly(a.denom, a.order, out)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, ExpLaurentPoly):
            return NotImplemented
        a, b = self._common(other)
        return a.terms == b.terms

    def __call__(self, h):
        """Numerical value at height(s) ``h``."""
        h = np.asarray(h, dtype=float)
        out = np.zeros(h.shape, dtype=complex)
        for m, c in self.terms.items():
            out = out + complex(c) * np.exp(1j * m * h / self.denom)
        return out

    def __repr__(self):
        return f"ExpLaurentPoly(D={self.denom}, N={self.order}, {len(self.terms)} terms)"


def phase_order(*phases) -> int:
    """Smallest multiple of 4 hosting every ``exp(2 pi i * phase)``."""
    return _lcm(4, *(as_fraction(p).denominator for p in phases))


def trig_term(kind: str, amplitude, freq_num: int, freq_den: int = 1, phase=0, order: int = None):
    """Expand ``amplitude * kind(freq_num/freq_den * h + 2*pi*phase)``.

    ``kind`` is ``"cos"``, ``"sin"`` or ``"exp"``; ``amplitude`` may be a
    rational or a :class:`GaussianRational`.  The phase is absorbed into the
    cyclotomic coefficients.
    """
    if freq_den < 1:
        raise ValueError("freq_den must be positive")
    phase = as_fraction(phase)
    order = order or phase_order(phase)
    if (phase * order).denominator != 1:
        raise OrderMismatch(f"phase {phase} does not live in Q(zeta_{order})")
    amp = CyclotomicElement.from_gaussian(order, GaussianRational.coerce(amplitude))
    k = int(phase * order)
    plus = CyclotomicElement.zeta(order, k)
    minus = CyclotomicElement.zeta(order, -k)
    half = Fraction(1, 2)
    if freq_num == 0:
        if kind == "cos":
            return ExpLaurentPoly(freq_den, order, {0: amp * ((plus + minus) * half)})
        if kind == "sin":
            i = CyclotomicElement.zeta(order, order // 4)
            return ExpLaurentPoly(freq_den, order, {0: amp * ((minus - plus) * i * half)})
    if kind == "exp":
        return ExpLaurentPoly(freq_den, order, {freq_num: amp * plus})
    if kind == "cos":
        return ExpLaurentPoly(
            freq_den, order, {freq_num: amp * plus * half, -freq_num: amp * minus * half}
        )
    if kind == "sin":
        # sin t = (e^{it} - e^{-it}) / (2i) = -i/2 e^{it} + i/2 e^{-it}
        i_half = CyclotomicElement.zeta(order, order // 4) * half
        return ExpLaurentPoly(
            freq_den, order, {freq_num: -amp * plus * i_half, -freq_num: amp * minus * i_half}
        )
    raise ValueError(f"unknown trigonometric kind {kind!r}")


class UPolynomial:
    """Polynomial in ``u`` whose coefficients are :class:`ExpLaurentPoly`.

    ``coeffs[k]`` multiplies ``u**k``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: list[ExpLaurentPoly]):
        self.coeffs = list(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def linear_factor(cls, root: ExpLaurentPoly) -> "UPolynomial":
        """``u - root``."""
        one = ExpLaurentPoly.constant(1, root.order, root.denom)
        return cls([-root, one])

    def __mul__(self, other: "UPolynomial") -> "UPolynomial":
        out: list[ExpLaurentPoly | None] = [None] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if b.is_zero():
                    continue
                p = a * b
                out[i + j] = p if out[i + j] is None else out[i + j] + p
        ref = self.coeffs[0]
        return UPolynomial(
            [c if c is not None else ExpLaurentPoly(ref.denom, ref.order) for c in out]
        )

    def __call__(self, u, h):
        u = np.asarray(u, dtype=complex)
        out = np.zeros(np.broadcast(u, np.asarray(h)).shape, dtype=complex)
        for c in reversed(self.coeffs):
            out = out * u + c(h)
        return out


# ---------------------------------------------------------------------------
# f(u, v, vbar)

Exponents = tuple[int, int, int]


class SemiholoPolynomial:
    """Polynomial in ``u``, ``v``, ``conj(v)`` with Gaussian-rational coefficients.

    Terms are keyed by ``(e_u, e_v, e_vbar)``.  No key has both ``e_v`` and
    ``e_vbar`` positive.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Exponents, object] = None):
        clean: dict[Exponents, GaussianRational] = {}
        for key, c in (terms or {}).items():
            eu, ev, evb = (int(e) for e in key)
            if min(eu, ev, evb) < 0:
                raise ValueError(f"negative exponent in {key}")
            if ev > 0 and evb > 0:
                raise ValueError(f"mixed v*conj(v) term {key}")
            c = GaussianRational.coerce(c)
            if c:
                clean[(eu, ev, evb)] = clean.get((eu, ev, evb), GaussianRational()) + c
        self.terms = {k: c for k, c in clean.items() if c}

    # -- structure ------------------------------------------------------------
    @property
    def degree_u(self) -> int:
        return max((k[0] for k in self.terms), default=0)

    @property
    def degree_v(self) -> int:
        """Largest combined power of ``v`` and ``conj(v)``."""
        return max((k[1] + k[2] for k in self.terms), default=0)

    @property
    def total_degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def coefficient(self, eu: int, ev: int = 0, evb: int = 0) -> GaussianRational:
        return self.terms.get((eu, ev, evb), GaussianRational())

    def __eq__(self, other):
        if not isinstance(other, SemiholoPolynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "SemiholoPolynomial") -> "SemiholoPolynomial":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return SemiholoPolynomial(out)

    def __neg__(self):
        return SemiholoPolynomial({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "SemiholoPolynomial":
        c = GaussianRational.coerce(c)
        return SemiholoPolynomial({k: v * c for k, v in self.terms.items()})

    def stretch(self, lam) -> "SemiholoPolynomial":
        """``lam**s * f(u / lam, v)`` with ``s = deg_u f``."""
        lam = as_fraction(lam)
        s = self.degree_u
        return SemiholoPolynomial(
            {k: c * lam ** (s - k[0]) for k, c in self.terms.items()}
        )

    def conjugate_coefficients(self) -> "SemiholoPolynomial":
        return SemiholoPolynomial({k: c.conjugate() for k, c in self.terms.items()})

    def is_ratio_of(self, other: "SemiholoPolynomial") -> Fraction | None:
        """Positive rational ``c`` with ``self == c * other``, else ``None``."""
        if set(self.terms) != set(other.terms) or not self.terms:
            return None
        key = next(iter(self.terms))
        ratio = self.terms[key] / other.terms[key]
        if ratio.im or ratio.re <= 0:
            return None
        return ratio.re if self == other.scale(ratio) else None

    # -- numerics -------------------------------------------------------------
    def compile(self) -> "CompiledSemiholo":
        return CompiledSemiholo.from_terms(
            {k: complex(c) for k, c in self.terms.items()}
        )

    def __call__(self, u, v):
        return self.compile()(u, v)

    # -- serialization --------------------------------------------------------
    def to_records(self) -> list[dict]:
        out = []
        for (eu, ev, evb) in sorted(self.terms, reverse=True):
            c = self.terms[(eu, ev, evb)]
            out.append(
                {
                    "eu": eu,
                    "ev": ev,
                    "evb": evb,
                    "re": [c.re.numerator, c.re.denominator],
                    "im": [c.im.numerator, c.im.denominator],
                }
            )
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_records())

    @classmethod
    def from_records(cls, records: Iterable[Mapping]) -> "SemiholoPolynomial":
        return cls(
            {
                (r["eu"], r["ev"], r["evb"]): GaussianRational(
                    as_fraction(r["re"]), as_fraction(r["im"])
                )
                for r in records
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SemiholoPolynomial":
        return cls.from_records(json.loads(text))

    def __repr__(self):
        return f"SemiholoPolynomial({self.pretty()})"

    def pretty(self) -> str:
        parts = []
        for key in sorted(self.terms, reverse=True):
            c = self.terms[key]
            mono = "*".join(
                f"{name}^{e}" if e > 1 else name
                for name, e in zip(("u", "v", "vb"), key)
                if e
            )
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts) or "0"


class CompiledSemiholo:
    """Vectorised floating-point evaluator for ``f(u, v, conj(v))``.

    Holds complex coefficients, so it also serves fields whose coefficients
    were perturbed away from exact values.
    """

    def __init__(self, exps: np.ndarray, coeffs: np.ndarray):
        self.exps = np.asarray(exps, dtype=int).reshape(-1, 3)
        self.coeffs = np.asarray(coeffs, dtype=complex)
        self.degree_u = int(self.exps[:, 0].max()) if len(self.exps) else 0

    @classmethod
    def from_terms(cls, terms: Mapping[Exponents, complex]) -> "CompiledSemiholo":
        keys = sorted(terms)
        return cls(np.array(keys, dtype=int).reshape(-1, 3), np.array([terms[k] for k in keys]))

    def scaled(self, c: complex) -> "CompiledSemiholo":
        return CompiledSemiholo(self.exps, self.coeffs * c)

    def u_coefficients(self, v) -> np.ndarray:
        """Coefficients of ``u**k`` (lowest first) at each ``v``; shape ``v.shape + (deg+1,)``."""
        v = np.asarray(v, dtype=complex)
        vb = np.conj(v)
        out = np.zeros(v.shape + (self.degree_u + 1,), dtype=complex)
        for (eu, ev, evb), c in zip(self.exps, self.coeffs):
            out[..., eu] += c * v**ev * vb**evb
        return out

    def __call__(self, u, v):
        return self.evaluate(u, v)[0]

    def evaluate(self, u, v):
        """Return ``f, df/du, df/dv, df/dvbar`` (Wirtinger partials)."""
        u = np.asarray(u, dtype=complex)
        v = np.asarray(v, dtype=complex)
        u, v = np.broadcast_arrays(u, v)
        vb = np.conj(v)
        f = np.zeros(u.shape, dtype=complex)
        fu = np.zeros_like(f)
        fv = np.zeros_like(f)
        fvb = np.zeros_like(f)
        for (eu, ev, evb), c in zip(self.exps, self.coeffs):
            pu = u**eu
            pv = v**ev
            pvb = vb**evb
            f += c * pu * pv * pvb
            if eu:
                fu += c * eu * u ** (eu - 1) * pv * pvb
            if ev:
                fv += c * ev * pu * v ** (ev - 1) * pvb
            if evb:
                fvb += c * evb * pu * pv * vb ** (evb - 1)
        return f, fu, fv, fvb


def to_semiholo(p: UPolynomial) -> SemiholoPolynomial:
    """Replace ``exp(ih)`` by ``v`` and ``exp(-ih)`` by ``conj(v)``."""
    terms: dict[Exponents, GaussianRational] = {}
    for eu, coeff in enumerate(p.coeffs):
        for m, c in coeff.terms.items():
            if m % coeff.denom:
                raise NonIntegerExponent(
                    f"u^{eu} carries exp(i*{m}h/{coeff.denom}); strands do not close"
                )
            k = m // coeff.denom
            g = cyclo_to_gaussian(c if c.order % 4 == 0 else c.lift(_lcm(4, c.order)))
            key = (eu, k, 0) if k >= 0 else (eu, 0, -k)
            terms[key] = terms.get(key, GaussianRational()) + g
    return SemiholoPolynomial(terms)


def integerize(f: SemiholoPolynomial) -> tuple[SemiholoPolynomial, int]:
    """Scale by the positive lcm of coefficient denominators."""
    clearing = _lcm(*(c.denominator_lcm() for c in f.terms.values()))
    return f.scale(clearing), clearing
