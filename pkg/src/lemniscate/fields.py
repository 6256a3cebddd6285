"""Exact construction of knotted fields from braid strands.

The chain is strands -> ``prod (u - lam Z_j(h))`` -> ``f(u, v, conj v)`` ->
spatial numerator ``F(x, y, z)``, plus the real four-variable polynomial with
a weakly isolated singularity and rational maps for hopfion initial data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable, Mapping, Sequence

import numpy as np

from .braids import LemniscateSpec, TrigStrand, lemniscate_strands, strand_order, trefoil_cable_strands
from .cyclotomic import (
    CompiledSemiholo,
    ExpLaurentPoly,
    GaussianRational,
    SemiholoPolynomial,
    UPolynomial,
    _lcm,
    as_fraction,
    integerize,
    to_semiholo,
)
from .errors import InvalidSpec, OddRepeats

# ---------------------------------------------------------------------------
# braid polynomial and f


def braid_polynomial(strands: Sequence[TrigStrand], lam=1) -> UPolynomial:
    """``prod_j (u - lam * Z_j(h))`` with exact exponential-Laurent coefficients."""
    lam = as_fraction(lam)
    order, denom = strand_order(strands)
    out = UPolynomial([ExpLaurentPoly.constant(1, order, denom)])
    for z in strands:
        root = z.to_laurent(order, denom) * lam
        out = out * UPolynomial.linear_factor(root)
    return out


def build_field(source, lam=None) -> SemiholoPolynomial:
    """``f_lam(u, v, conj v)`` from a :class:`LemniscateSpec` or a strand list.

    For a spec, its own ``lam`` applies and ``lam`` here is an extra factor.
    """
    if isinstance(source, LemniscateSpec):
        strands = lemniscate_strands(source)
    else:
        strands = list(source)
    return to_semiholo(braid_polynomial(strands, 1 if lam is None else lam))


def substitute_v_power(f: SemiholoPolynomial, r: int) -> SemiholoPolynomial:
    """``f(u, v**r, conj(v)**r)``."""
    return SemiholoPolynomial({(a, b * r, c * r): k for (a, b, c), k in f.terms.items()})


def _semiholo(spec: str) -> SemiholoPolynomial:
    """Parse the tiny notation ``"coeff:eu,ev,evb; ..."`` used for presets."""
    terms = {}
    for part in spec.split(";"):
        coeff, exps = part.split(":")
        re, _, im = coeff.partition("+i")
        key = tuple(int(e) for e in exps.split(","))
        terms[key] = GaussianRational(as_fraction(re.strip() or 0), as_fraction(im.strip() or 0))
    return SemiholoPolynomial(terms)


def reference_fig8(r: int = 2) -> SemiholoPolynomial:
    """``64u^3 - 12u(3 + 2[v^r - vb^r]) - 14(v^r + vb^r) - (v^2r - vb^2r)``."""
    base = _semiholo(
        "64:3,0,0; -36:1,0,0; -24:1,1,0; 24:1,0,1; -14:0,1,0; -14:0,0,1; -1:0,2,0; 1:0,0,2"
    )
    return substitute_v_power(base, r)


def reference_f5(r: int) -> SemiholoPolynomial:
    base = _semiholo(
        "1024:5,0,0; -960:3,0,0; -160:2,1,0; -160:2,0,1; 420:1,0,0; -200:1,1,0; -200:1,0,1;"
        " -82:0,1,0; -82:0,0,1; -1:0,2,0; 1:0,0,2"
    )
    return substitute_v_power(base, r)


def reference_f4l3(r: int) -> SemiholoPolynomial:
    base = _semiholo(
        "20736:4,0,0; -4608:2,0,0; -1728:2,1,0; 1728:2,0,1; 92:0,0,0; -39:0,1,0; -231:0,0,1;"
        " 6:0,2,0; 30:0,0,2; -1:0,3,0; -1:0,0,3"
    )
    return substitute_v_power(base, r)


def reference_cable() -> SemiholoPolynomial:
    return _semiholo("256:4,0,0; -512:2,3,0; 64:1,2,0; -1:0,1,0; 256:0,6,0")


def fig8hopf_denominator(r: int = 2) -> SemiholoPolynomial:
    """Denominator of the figure-8 hopfion map with the constant 3 replaced by 3/2."""
    base = _semiholo(
        "64:3,0,0; -18:1,0,0; -24:1,1,0; 24:1,0,1; -14:0,1,0; -14:0,0,1; -1:0,2,0; 1:0,0,2"
    )
    return substitute_v_power(base, r)


def preset_spec(name: str, r: int = 2) -> LemniscateSpec | None:
    """Braid specs behind the named presets (``None`` for non-lemniscate presets)."""
    table = {
        "fig8": LemniscateSpec(3, r, 2),
        "f5r2": LemniscateSpec(5, r, 2),
        "f4r3": LemniscateSpec(4, r, 3, a=Fraction(1, 2), b=Fraction(1, 2), lam=1),
        "borromean": LemniscateSpec(3, 3, 2),
        "fig8hopf-paper": LemniscateSpec(3, r, 2),
    }
    if name == "cable-13n4587":
        return None
    if name not in table:
        raise InvalidSpec(f"unknown preset {name!r}")
    return table[name]


PRESETS = ("fig8", "f5r2", "f4r3", "cable-13n4587", "fig8hopf-paper", "borromean")


def preset_field(name: str, r: int = 2) -> SemiholoPolynomial:
    if name == "cable-13n4587":
        return build_field(trefoil_cable_strands())
    if name == "fig8hopf-paper":
        return fig8hopf_denominator(r)
    return build_field(preset_spec(name, r))


# ---------------------------------------------------------------------------
# polynomials over Z[i] in several real variables, used for F(x,y,z) and F(x1..x4)

GaussInt = tuple  # (re, im) pairs of Python ints or Fractions


def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _padd(p: dict, q: dict) -> dict:
    out = dict(p)
    for k, c in q.items():
        if k in out:
            o = out[k]
            s = (o[0] + c[0], o[1] + c[1])
            if s == (0, 0):
                del out[k]
            else:
                out[k] = s
        else:
            out[k] = c
    return out


def _pmul(p: dict, q: dict) -> dict:
    out: dict = {}
    for k1, c1 in p.items():
        for k2, c2 in q.items():
            k = tuple(a + b for a, b in zip(k1, k2))
            c = _gmul(c1, c2)
            if k in out:
                o = out[k]
                out[k] = (o[0] + c[0], o[1] + c[1])
            else:
                out[k] = c
    return {k: c for k, c in out.items() if c != (0, 0)}


class _Powers:
    def __init__(self, base: dict, nvars: int):
        self.table = [{(0,) * nvars: (1, 0)}, base]

    def __getitem__(self, n: int) -> dict:
        while len(self.table) <= n:
            self.table.append(_pmul(self.table[-1], self.table[1]))
        return self.table[n]


def _mono(nvars: int, var: int, power: int = 1) -> tuple:
    return tuple(power if i == var else 0 for i in range(nvars))


def _fr(x: Fraction):
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class SpatialPolynomial:
    """Numerator ``F(x, y, z)`` of ``f`` after stereographic substitution.

    ``terms`` holds exact Gaussian-rational coefficients; ``integer_terms``
    equals ``clearing * terms`` with Gaussian-integer coefficients.
    ``denominator_power`` is the power of ``r^2 + 1`` that was cleared.
    """

    terms: Mapping[tuple[int, int, int], GaussianRational]
    clearing: int
    denominator_power: int

    @property
    def integer_terms(self) -> dict[tuple[int, int, int], tuple[int, int]]:
        out = {}
        for k, c in self.terms.items():
            g = c * self.clearing
            out[k] = (int(g.re), int(g.im))
        return out

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def __call__(self, x, y, z):
        x, y, z = (np.asarray(a, dtype=float) for a in (x, y, z))
        out = np.zeros(np.broadcast(x, y, z).shape, dtype=complex)
        for (ex, ey, ez), c in self.terms.items():
            out = out + complex(c) * x**ex * y**ey * z**ez
        return out

    def to_dict(self) -> dict:
        return {
            "terms": [
                {"ex": k[0], "ey": k[1], "ez": k[2], "re": _fr(c.re), "im": _fr(c.im)}
                for k, c in sorted(self.terms.items(), reverse=True)
            ],
            "clearing": self.clearing,
            "denominator_power": self.denominator_power,
        }


def stereographic_substitute(f: SemiholoPolynomial) -> SpatialPolynomial:
    """Clear ``(r^2+1)^d``, ``d`` the joint degree, from ``f`` in stereographic coordinates.

    ``u = (r^2 - 1 + 2iz) / (r^2 + 1)``, ``v = 2(x + iy) / (r^2 + 1)``.
    """
    fint, clearing = integerize(f)
    d = fint.total_degree
    r2 = {(2, 0, 0): (1, 0), (0, 2, 0): (1, 0), (0, 0, 2): (1, 0)}
    u_num = _padd(r2, {(0, 0, 0): (-1, 0), (0, 0, 1): (0, 2)})
    v_num = {(1, 0, 0): (2, 0), (0, 1, 0): (0, 2)}
    vb_num = {(1, 0, 0): (2, 0), (0, 1, 0): (0, -2)}
    den = _padd(r2, {(0, 0, 0): (1, 0)})
    pu, pv, pvb, pd = (_Powers(p, 3) for p in (u_num, v_num, vb_num, den))
    total: dict = {}
    for (a, b, c), coeff in fint.terms.items():
        g = (int(coeff.re), int(coeff.im))
        term = _pmul(_pmul(pu[a], pv[b]), _pmul(pvb[c], pd[d - a - b - c]))
        total = _padd(total, {k: _gmul(g, v) for k, v in term.items()})
    exact = {k: GaussianRational(Fraction(c[0], clearing), Fraction(c[1], clearing)) for k, c in total.items()}
    exact = {k: c for k, c in exact.items() if c}
    new_clear = _lcm(*(c.denominator_lcm() for c in exact.values())) if exact else 1
    return SpatialPolynomial(exact, new_clear, d)


def stereographic_point(x, y, z):
    """``(u, v)`` on the unit 3-sphere for points of R^3."""
    x, y, z = (np.asarray(a, dtype=float) for a in (x, y, z))
    r2 = x * x + y * y + z * z
    den = r2 + 1.0
    return (r2 - 1.0 + 2j * z) / den, 2.0 * (x + 1j * y) / den


def inverse_stereographic(u, v):
    """Inverse of :func:`stereographic_point` (points with ``u != 1``)."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    w = 1.0 - u.real
    return np.stack([v.real / w, v.imag / w, u.imag / w], axis=-1)


# ---------------------------------------------------------------------------
# real polynomial with a weakly isolated singularity


@dataclass(frozen=True)
class RealPolynomial4:
    """``F = sum c u^a v^b vb^c rho^(2k)`` expanded in ``x1 .. x4``.

    ``complex_terms`` keeps the compact ``(a, b, c, k) -> coefficient`` form;
    ``real`` and ``imag`` are the exact real and imaginary parts as
    polynomials in ``x1 = Re u``, ``x2 = Im u``, ``x3 = Re v``, ``x4 = Im v``.
    """

    complex_terms: Mapping[tuple[int, int, int, int], GaussianRational]
    real: Mapping[tuple[int, int, int, int], Fraction]
    imag: Mapping[tuple[int, int, int, int], Fraction]

    @property
    def degree(self) -> int:
        return max((sum(k) for k in list(self.real) + list(self.imag)), default=0)

    def compiled(self) -> "CompiledReal4":
        keys = sorted(set(self.real) | set(self.imag))
        coeffs = [complex(self.real.get(k, 0), self.imag.get(k, 0)) for k in keys]
        return CompiledReal4(np.array(keys, dtype=int).reshape(-1, 4), np.array(coeffs))

    def evaluate_complex_form(self, u, v):
        u = np.asarray(u, dtype=complex)
        v = np.asarray(v, dtype=complex)
        rho2 = np.abs(u) ** 2 + np.abs(v) ** 2
        out = np.zeros(np.broadcast(u, v).shape, dtype=complex)
        for (a, b, c, k), coeff in self.complex_terms.items():
            out = out + complex(coeff) * u**a * v**b * np.conj(v) ** c * rho2**k
        return out

    def to_dict(self) -> dict:
        def rows(d):
            return [{"e": list(k), "c": _fr(c)} for k, c in sorted(d.items(), reverse=True)]

        return {
            "complex_terms": [
                {"eu": a, "ev": b, "evb": c, "rho2": k, "re": _fr(g.re), "im": _fr(g.im)}
                for (a, b, c, k), g in sorted(self.complex_terms.items(), reverse=True)
            ],
            "real": rows(self.real),
            "imag": rows(self.imag),
        }


class CompiledReal4:
    """Float evaluator for a complex polynomial in four real variables."""

    def __init__(self, exps: np.ndarray, coeffs: np.ndarray):
        self.exps = exps
        self.coeffs = coeffs

    def __call__(self, x):
        return self.evaluate(x)[0]

    def evaluate(self, x):
        """Value and gradient (last axis of length 4) at points ``x[..., 4]``."""
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        val = np.zeros(shape, dtype=complex)
        grad = np.zeros(shape + (4,), dtype=complex)
        for e, c in zip(self.exps, self.coeffs):
            powers = [x[..., i] ** e[i] for i in range(4)]
            val += c * powers[0] * powers[1] * powers[2] * powers[3]
            for i in range(4):
                if e[i]:
                    p = c * e[i] * x[..., i] ** (e[i] - 1)
                    for j in range(4):
                        if j != i:
                            p = p * powers[j]
                    grad[..., i] += p
        return val, grad


def milnor_polynomial(f1: SemiholoPolynomial, spec: LemniscateSpec | None = None) -> RealPolynomial4:
    """``rho^(s + deg) f_1(u / rho^2, v / rho)`` as a polynomial in four real variables.

    The power of ``rho`` is the smallest making every term an even power, so
    the result is polynomial.  Needs every term's combined ``v`` degree even.
    """
    if spec is not None and spec.r % 2:
        raise OddRepeats(f"r = {spec.r} is odd; the rho powers do not clear")
    for (a, b, c) in f1.terms:
        if (b + c) % 2:
            raise OddRepeats(f"term u^{a} v^{b} vb^{c} has odd v-degree")
    top = max(2 * a + b + c for (a, b, c) in f1.terms)
    top += top % 2
    cterms = {(a, b, c, (top - 2 * a - b - c) // 2): g for (a, b, c), g in f1.terms.items()}
    return _expand_real4(cterms)


def brauner_polynomial(p: int, q: int) -> RealPolynomial4:
    """``u^p - v^q`` as a real four-variable polynomial (no rho factors)."""
    return _expand_real4({(p, 0, 0, 0): GaussianRational(1), (0, q, 0, 0): GaussianRational(-1)})


def _expand_real4(cterms: Mapping[tuple[int, int, int, int], GaussianRational]) -> RealPolynomial4:
    n = 4
    u = {_mono(n, 0): (1, 0), _mono(n, 1): (0, 1)}
    v = {_mono(n, 2): (1, 0), _mono(n, 3): (0, 1)}
    vb = {_mono(n, 2): (1, 0), _mono(n, 3): (0, -1)}
    rho2 = {_mono(n, i, 2): (1, 0) for i in range(4)}
    pu, pv, pvb, pr = (_Powers(p, n) for p in (u, v, vb, rho2))
    total: dict = {}
    for (a, b, c, k), g in cterms.items():
        term = _pmul(_pmul(pu[a], pv[b]), _pmul(pvb[c], pr[k]))
        gg = (g.re, g.im)
        total = _padd(total, {key: _gmul(gg, val) for key, val in term.items()})
    real = {k: Fraction(c[0]) for k, c in total.items() if c[0]}
    imag = {k: Fraction(c[1]) for k, c in total.items() if c[1]}
    return RealPolynomial4(dict(cterms), real, imag)


# ---------------------------------------------------------------------------
# hopfion rational maps


def default_profile(r, width: float = 1.0):
    """``4 arctan(exp(-r / width))``: equals pi at 0 and decays to 0."""
    return 4.0 * np.arctan(np.exp(-np.asarray(r, dtype=float) / width))


def equivariant_point(points, profile: Callable = default_profile):
    """``(u, v)`` on S^3 for ``points[..., 3]`` via the degree-one radial map."""
    p = np.asarray(points, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    r = np.sqrt(x * x + y * y + z * z)
    d = profile(r)
    with np.errstate(invalid="ignore", divide="ignore"):
        sr = np.where(r > 0, np.sin(d) / np.where(r > 0, r, 1.0), 0.0)
    # near the origin sin(d)/r stays finite; d(0) = pi so sin(d)/r -> -d'(0)
    return np.cos(d) + 1j * sr * z, (x + 1j * y) * sr


@dataclass(frozen=True)
class HopfionSpec:
    """Rational map ``W = c v^N / f^m`` on S^3."""

    f: SemiholoPolynomial
    N: int
    m: int = 1
    numerator_constant: Fraction = Fraction(1)
    profile: Callable = field(default=default_profile, compare=False)

    def __post_init__(self):
        if self.N < 0 or self.m < 1:
            raise InvalidSpec("need N >= 0 and m >= 1")
        object.__setattr__(self, "numerator_constant", as_fraction(self.numerator_constant))

    @property
    def predicted_charge(self) -> int:
        return self.N * self.f.degree_u * self.m


class HopfionField:
    """Evaluable map ``R^3 -> S^2`` built from a :class:`HopfionSpec`."""

    def __init__(self, spec: HopfionSpec):
        self.spec = spec
        self._f = spec.f.compile()
        self._c = float(spec.numerator_constant)

    def parts(self, points):
        """Numerator ``g = c v^N`` and denominator ``F = f^m`` at ``points``."""
        u, v = equivariant_point(points, self.spec.profile)
        fval = self._f(u, v) ** self.spec.m
        g = self._c * v**self.spec.N
        return g, fval

    def W(self, points):
        g, fval = self.parts(points)
        with np.errstate(divide="ignore", invalid="ignore"):
            return g / fval

    def __call__(self, points):
        """``phi`` on S^2; zeros of ``f`` map to ``(0, 0, -1)``."""
        g, fval = self.parts(points)
        n2 = np.abs(fval) ** 2 + np.abs(g) ** 2
        w = g * np.conj(fval)
        with np.errstate(divide="ignore", invalid="ignore"):
            phi = np.stack([2 * w.real / n2, 2 * w.imag / n2, (np.abs(fval) ** 2 - np.abs(g) ** 2) / n2], axis=-1)
        bad = n2 == 0
        if np.any(bad):
            phi[bad] = (0.0, 0.0, -1.0)
        return phi


def hopfion_field(spec: HopfionSpec) -> HopfionField:
    return HopfionField(spec)


def hopfion_grid(field_: HopfionField, n: int, half_width: float) -> np.ndarray:
    """Rows ``(x, y, z, phi1, phi2, phi3)`` on an ``n^3`` grid."""
    axis = np.linspace(-half_width, half_width, n)
    g = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    return np.hstack([g, field_(g)])


def preset_hopfion(name: str, r: int = 2, N: int = 1, m: int = 1) -> HopfionSpec:
    """Hopfion rational map for a preset; ``fig8hopf-paper`` carries its numerator 64."""
    f = preset_field(name, r)
    c = 64 if name == "fig8hopf-paper" else 1
    return HopfionSpec(f, N, m, c)
