"""Braid specifications, trigonometric strands and algebraic braid words."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .cyclotomic import (
    ExpLaurentPoly,
    GaussianRational,
    as_fraction,
    phase_order,
    trig_term,
)
from .errors import InvalidSpec, StrandCollision, WrongPeriod


def default_lambda(l: int) -> Fraction | None:
    """Empirically sufficient stretch: 1 for l <= 2, 1/2 for l = 3, unknown beyond."""
    if l <= 2:
        return Fraction(1)
    if l == 3:
        return Fraction(1, 2)
    return None


def _frac_json(x: Fraction) -> list[int]:
    return [x.numerator, x.denominator]


@dataclass(frozen=True)
class LemniscateSpec:
    """Lemniscate braid ``L(s, r, l)`` with stretch factors.

    ``lam`` of ``None`` resolves to :func:`default_lambda`, falling back to 1
    for ``l >= 4`` where no sufficient value is known.
    """

    s: int
    r: int
    l: int
    a: Fraction = Fraction(1)
    b: Fraction = Fraction(1)
    lam: Fraction | None = None
    n_rot: int = 0

    def __post_init__(self):
        for name in ("a", "b"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.lam is None:
            lam = default_lambda(self.l)
            object.__setattr__(self, "lam", lam if lam is not None else Fraction(1))
        else:
            object.__setattr__(self, "lam", as_fraction(self.lam))
        if self.s < 1 or self.r < 1 or self.l < 1:
            raise InvalidSpec("s, r and l must be positive integers")
        if not self.s > self.l:
            raise InvalidSpec(f"need s > l, got s={self.s}, l={self.l}")
        if math.gcd(self.s, self.l) != 1:
            raise InvalidSpec(f"s={self.s} and l={self.l} must be coprime")
        if self.a <= 0:
            raise InvalidSpec("a must be positive")
        if self.b == 0:
            raise InvalidSpec("b must be nonzero")
        if self.lam <= 0:
            raise InvalidSpec("lambda must be positive")

    @property
    def components(self) -> int:
        return math.gcd(self.s, self.r)

    def with_(self, **changes) -> "LemniscateSpec":
        fields = dict(
            s=self.s, r=self.r, l=self.l, a=self.a, b=self.b, lam=self.lam, n_rot=self.n_rot
        )
        fields.update(changes)
        return LemniscateSpec(**fields)

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "r": self.r,
            "l": self.l,
            "a": _frac_json(self.a),
            "b": _frac_json(self.b),
            "lambda": _frac_json(self.lam),
            "n_rot": self.n_rot,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LemniscateSpec":
        return cls(
            s=int(d["s"]),
            r=int(d["r"]),
            l=int(d["l"]),
            a=as_fraction(d.get("a", 1)),
            b=as_fraction(d.get("b", 1)),
            lam=as_fraction(d["lambda"]) if d.get("lambda") is not None else None,
            n_rot=int(d.get("n_rot", 0)),
        )


# ---------------------------------------------------------------------------
# geometric strands


@dataclass(frozen=True)
class FourierTerm:
    """``amplitude * kind(freq * h + 2*pi*phase)``, ``kind`` in cos/sin/exp."""

    kind: str
    amplitude: GaussianRational
    freq: Fraction
    phase: Fraction = Fraction(0)

    def __call__(self, h):
        theta = float(self.freq) * np.asarray(h, dtype=float) + 2 * np.pi * float(self.phase)
        fn = {"cos": np.cos, "sin": np.sin, "exp": lambda t: np.exp(1j * t)}[self.kind]
        return complex(self.amplitude) * fn(theta)

    def to_exp(self) -> list["FourierTerm"]:
        """Rewrite cos/sin as pairs of exponentials."""
        if self.kind == "exp":
            return [self]
        half = Fraction(1, 2)
        if self.kind == "cos":
            return [
                FourierTerm("exp", self.amplitude * half, self.freq, self.phase),
                FourierTerm("exp", self.amplitude * half, -self.freq, -self.phase),
            ]
        i_half = GaussianRational(0, half)
        return [
            FourierTerm("exp", -self.amplitude * i_half, self.freq, self.phase),
            FourierTerm("exp", self.amplitude * i_half, -self.freq, -self.phase),
        ]


@dataclass(frozen=True)
class TrigStrand:
    """One braid strand ``Z(h) = X(h) + i Y(h)`` as a finite Fourier sum."""

    terms: tuple[FourierTerm, ...]

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        out = np.zeros(h.shape, dtype=complex)
        for t in self.terms:
            out = out + t(h)
        return out

    def scaled(self, lam) -> "TrigStrand":
        lam = as_fraction(lam)
        return TrigStrand(
            tuple(FourierTerm(t.kind, t.amplitude * lam, t.freq, t.phase) for t in self.terms)
        )

    def rotated(self, n: int) -> "TrigStrand":
        """Multiply by ``exp(i n h)``."""
        terms = [e for t in self.terms for e in t.to_exp()]
        return TrigStrand(
            tuple(FourierTerm("exp", t.amplitude, t.freq + n, t.phase) for t in terms)
        )

    def __add__(self, other: "TrigStrand") -> "TrigStrand":
        return TrigStrand(self.terms + other.terms)

    def __neg__(self):
        return TrigStrand(
            tuple(FourierTerm(t.kind, -t.amplitude, t.freq, t.phase) for t in self.terms)
        )

    def order(self) -> int:
        return phase_order(*(t.phase for t in self.terms))

    def denom(self) -> int:
        return reduce(lambda a, b: a * b // math.gcd(a, b), (t.freq.denominator for t in self.terms), 1)

    def to_laurent(self, order: int | None = None, denom: int | None = None) -> ExpLaurentPoly:
        order = order or self.order()
        denom = denom or self.denom()
        out = ExpLaurentPoly(denom, order)
        for t in self.terms:
            num = t.freq * denom
            out = out + trig_term(t.kind, t.amplitude, int(num), denom, t.phase, order)
        return out


def strand_order(strands: Sequence[TrigStrand]) -> tuple[int, int]:
    """Common cyclotomic order and frequency denominator for a strand set."""
    order = reduce(lambda a, b: a * b // math.gcd(a, b), (z.order() for z in strands), 4)
    denom = reduce(lambda a, b: a * b // math.gcd(a, b), (z.denom() for z in strands), 1)
    return order, denom


def lemniscate_strands(spec: LemniscateSpec) -> list[TrigStrand]:
    """Strands following the (1, l) Lissajous figure, scaled by ``spec.lam``.

    ``X_j = a cos((r h + 2 pi (j-1)) / s)`` and
    ``Y_j = (b / l) sin(l (r h + 2 pi (j-1)) / s)``.
    """
    s, r, l = spec.s, spec.r, spec.l
    strands = []
    for j in range(1, s + 1):
        x = FourierTerm("cos", GaussianRational(spec.a), Fraction(r, s), Fraction(j - 1, s))
        y = FourierTerm(
            "sin", GaussianRational(0, spec.b / l), Fraction(l * r, s), Fraction(l * (j - 1), s)
        )
        strands.append(TrigStrand((x, y)).scaled(spec.lam))
    if spec.n_rot:
        # n_rot counts clockwise turns of the figure
        strands = [z.rotated(-spec.n_rot) for z in strands]
    return strands


def rotating_strands(spec: LemniscateSpec, n: int) -> list[TrigStrand]:
    """Lemniscate strands on a figure turning ``n`` times clockwise as h runs over [0, 2 pi].

    Each strand is multiplied by ``exp(-i n h)``; with the crossing convention
    of :func:`braid_word` this closes to ``w * Delta^(-2n)``.
    """
    return lemniscate_strands(spec.with_(n_rot=n))


def min_pairwise_distance(strands: Sequence[TrigStrand], samples: int = 2048) -> float:
    h = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    z = np.array([s(h) for s in strands])
    if len(z) < 2:
        return math.inf
    d = np.abs(z[:, None, :] - z[None, :, :])
    d[np.arange(len(z)), np.arange(len(z))] = np.inf
    return float(d.min())


def cable_strands(outer: Sequence[TrigStrand], epicycle, tol: float = 1e-9) -> list[TrigStrand]:
    """Replace each outer strand by a cluster ``outer_k + e`` for ``e`` in its epicycle.

    ``epicycle`` is either one list of strands shared by every outer strand or
    one list per outer strand.
    """
    if epicycle and isinstance(epicycle[0], TrigStrand):
        clusters = [list(epicycle)] * len(outer)
    else:
        clusters = [list(c) for c in epicycle]
    if len(clusters) != len(outer):
        raise ValueError("need one epicycle per outer strand")
    out = [o + e for o, cluster in zip(outer, clusters) for e in cluster]
    if min_pairwise_distance(out) < tol:
        raise StrandCollision("cabled strands intersect")
    return out


def trefoil_cable_strands() -> list[TrigStrand]:
    """The two-strand epicycle cable of the (2,3) torus braid, radius 1/4."""
    outer = [
        TrigStrand((FourierTerm("exp", GaussianRational(1), Fraction(3, 2)),)),
        TrigStrand((FourierTerm("exp", GaussianRational(-1), Fraction(3, 2)),)),
    ]

    def epi(c):
        return TrigStrand((FourierTerm("exp", GaussianRational.coerce(c), Fraction(1, 4)),))

    quarter = Fraction(1, 4)
    clusters = [
        [epi(GaussianRational(0, quarter)), epi(GaussianRational(0, -quarter))],
        [epi(GaussianRational(-quarter)), epi(GaussianRational(quarter))],
    ]
    return cable_strands(outer, clusters)


def closure_curve(spec: LemniscateSpec, samples: int = 2000, R: float | None = None) -> np.ndarray:
    """Points of the closed knot as the braid wrapped around a solid torus.

    Follows strand 1 for ``h`` in ``[0, 2 pi s]``; ``R`` defaults to
    ``1 + 2 max|X|``.
    """
    strand = lemniscate_strands(spec.with_(n_rot=0))[0]
    h = np.linspace(0.0, 2 * np.pi * spec.s, samples, endpoint=False)
    z = strand(h)
    if R is None:
        R = 1.0 + 2.0 * float(np.abs(z.real).max())
    rad = R + z.real
    return np.column_stack([np.cos(h) * rad, np.sin(h) * rad, z.imag])


# ---------------------------------------------------------------------------
# algebraic braids


@dataclass(frozen=True)
class BraidWord:
    """Product of Artin generators; ``letters`` holds ``(k, sign)`` pairs."""

    letters: tuple[tuple[int, int], ...]
    strands: int

    def __post_init__(self):
        for k, e in self.letters:
            if not 1 <= k <= self.strands - 1:
                raise InvalidSpec(f"generator {k} outside 1..{self.strands - 1}")
            if e not in (1, -1):
                raise InvalidSpec(f"sign must be +-1, got {e}")

    @classmethod
    def from_signed(cls, ints: Iterable[int], strands: int) -> "BraidWord":
        return cls(tuple((abs(i), 1 if i > 0 else -1) for i in ints), strands)

    def to_signed(self) -> list[int]:
        return [k * e for k, e in self.letters]

    def __mul__(self, other: "BraidWord") -> "BraidWord":
        if other.strands != self.strands:
            raise ValueError("strand counts differ")
        return BraidWord(self.letters + other.letters, self.strands)

    def __pow__(self, n: int) -> "BraidWord":
        if n < 0:
            return self.inverse() ** (-n)
        return BraidWord(self.letters * n, self.strands)

    def inverse(self) -> "BraidWord":
        return BraidWord(tuple((k, -e) for k, e in reversed(self.letters)), self.strands)

    def mirror(self) -> "BraidWord":
        return BraidWord(tuple((k, -e) for k, e in self.letters), self.strands)

    def generator_counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for k, _ in self.letters:
            out[k] = out.get(k, 0) + 1
        return out

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        if not self.letters:
            return "1"
        return " ".join(f"s{k}" if e > 0 else f"s{k}^-1" for k, e in self.letters)


def crossing_signs(spec: LemniscateSpec) -> "EpsilonVector":
    """Signs of the s-1 crossings of the basic lemniscate braid word.

    The last sign is sign(b); moving left, the sign flips exactly when some
    ``m / l`` lies strictly between ``j / s`` and ``(j + 1) / s``.
    """
    s, l = spec.s, spec.l
    signs = [0] * (s - 1)
    signs[s - 2] = 1 if spec.b > 0 else -1
    for j in range(s - 2, 0, -1):
        m = (j * l) // s + 1  # smallest m with m/l > j/s
        flip = m * s < (j + 1) * l
        signs[j - 1] = -signs[j] if flip else signs[j]
    return EpsilonVector(tuple(signs))


@dataclass(frozen=True)
class EpsilonVector:
    signs: tuple[int, ...]

    @property
    def blocks(self) -> tuple[tuple[int, int], ...]:
        """Runs of equal sign as ``(sign, length)``."""
        out: list[list[int]] = []
        for e in self.signs:
            if out and out[-1][0] == e:
                out[-1][1] += 1
            else:
                out.append([e, 1])
        return tuple((e, n) for e, n in out)

    @property
    def grouped(self) -> tuple[int, ...]:
        return tuple(n for _, n in self.blocks)

    def __neg__(self):
        return EpsilonVector(tuple(-e for e in self.signs))

    def __getitem__(self, j: int) -> int:
        """1-based access, ``eps[j]`` for ``j = 1..s-1``."""
        return self.signs[j - 1]

    def __len__(self):
        return len(self.signs)


def basic_word(eps: EpsilonVector) -> BraidWord:
    """Odd generators, then even ones, with the given signs."""
    s = len(eps) + 1
    order = list(range(1, s, 2)) + list(range(2, s, 2))
    return BraidWord(tuple((k, eps[k]) for k in order), s)


def braid_word(spec: LemniscateSpec) -> BraidWord:
    """The lemniscate word ``(sigma_1^e1 sigma_3^e3 ... sigma_2^e2 ...)^r``."""
    return basic_word(crossing_signs(spec)) ** spec.r


def braid_permutation(word: BraidWord) -> tuple[tuple[int, ...], int]:
    """Permutation of strand positions (0-based) and its cycle count."""
    pos = list(range(word.strands))  # pos[p] = strand currently at position p
    for k, _ in word.letters:
        pos[k - 1], pos[k] = pos[k], pos[k - 1]
    # perm[strand] = final position
    perm = [0] * word.strands
    for p, strand in enumerate(pos):
        perm[strand] = p
    return tuple(perm), count_cycles(perm)


def count_cycles(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    cycles = 0
    for i in range(len(perm)):
        if not seen[i]:
            cycles += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
    return cycles


def garside_element(s: int) -> BraidWord:
    """Positive half twist ``(s1)(s2 s1)...(s_{s-1} ... s1)``."""
    if s < 2:
        raise InvalidSpec("Garside element needs at least two strands")
    letters = []
    for top in range(1, s):
        letters.extend((k, 1) for k in range(top, 0, -1))
    return BraidWord(tuple(letters), s)


def rotating_braid_word(spec: LemniscateSpec, n: int) -> BraidWord:
    """``w * Delta^(-2n)``, the word isotopic to the n-times rotated braid."""
    return braid_word(spec.with_(n_rot=0)) * garside_element(spec.s) ** (-2 * n)


def fig8_family_minimal_word(n: int) -> BraidWord:
    """``s1^-1 s2^n s1^-n s2`` on three strands, minimal for ``L(2n+1, 2, 2)``."""
    if n < 1:
        raise InvalidSpec("n must be positive")
    return BraidWord(((1, -1),) + ((2, 1),) * n + ((1, -1),) * n + ((2, 1),), 3)


def conjectured_l3_minimal_word(s: int) -> BraidWord:
    """Guessed minimal word for ``L(s, 2, 3)``; unproven, shipped for comparison only."""
    n, m = divmod(s, 3)
    if m == 0 or n < 1:
        raise InvalidSpec("s must be coprime to 3 and at least 4")
    mid = n - 1 if m == 1 else n
    ints = [1] * n + [-2, 1] + [-2] * mid + [3, -2] + [3] * n
    return BraidWord.from_signed(ints, 4)


# ---------------------------------------------------------------------------
# predictions


def tangle_notation(eps: EpsilonVector, r: int = 2) -> list[int]:
    """Conway tangle notation of the r = 2 spiral closure with signs ``eps``."""
    if r != 2:
        raise WrongPeriod(f"tangle notation needs r = 2, got r = {r}")
    blocks = eps.grouped
    e = eps.signs[0]
    if len(blocks) == 1:
        return [e * (blocks[0] + 1)]
    out = [e * blocks[0]]
    for n_i in blocks[1:-1]:
        out += [e, e, e * (n_i - 1)]
    out += [e, e, e * blocks[-1]]
    return out


def continued_fraction(notation: Sequence[int]) -> Fraction:
    """Fraction ``a_n + 1/(a_{n-1} + ... + 1/a_1)`` of a rational tangle."""
    value: Fraction | None = None
    for a in notation:
        value = Fraction(a) if value is None else a + 1 / value
    return value


def _positive_expansion(x: Fraction) -> list[int]:
    out = []
    while True:
        q = x.numerator // x.denominator
        out.append(q)
        rem = x - q
        if rem == 0:
            return out
        x = 1 / rem


def reduced_tangle(notation: Sequence[int]) -> tuple[int, list[int]]:
    """Shortest all-positive notation for the same unoriented rational link.

    Rational links ``p/q`` and ``p/q'`` agree when ``q q' = 1 mod p`` (or
    ``q = q'``); mirror images differ in sign.  Returns ``(sign, entries)``
    with entries in Conway order.
    """
    frac = continued_fraction(notation)
    sign = 1 if frac > 0 else -1
    p, q = abs(frac.numerator), abs(frac.denominator)
    candidates = {q % p or p}
    if math.gcd(p, q) == 1 and p > 1:
        candidates.add(pow(q, -1, p))
    best: list[int] | None = None
    for qq in candidates:
        expansion = _positive_expansion(Fraction(p, qq))[::-1]
        if best is None or (len(expansion), expansion) < (len(best), best):
            best = expansion
    return sign, best


@dataclass(frozen=True)
class SpiralPrediction:
    """Invariants predicted for a spiral closure; ``None`` means not covered."""

    components: int
    period: int
    is_fibred: bool
    is_knot: bool
    unknot: bool | None
    alexander_mod_p: dict | None
    genus_exact: Fraction | None
    genus_bounds: tuple[Fraction, Fraction] | None
    crossing_exact: int | None
    crossing_bounds: tuple[int, int] | None
    crossing_conjectural: int | None
    braid_index: int | None
    tangle: list[int] | None
    knot_name: str | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        def fr(x):
            return None if x is None else (int(x) if x.denominator == 1 else str(x))

        return {
            "components": self.components,
            "period": self.period,
            "is_fibred": self.is_fibred,
            "is_knot": self.is_knot,
            "unknot": self.unknot,
            "alexander_mod_p": self.alexander_mod_p,
            "genus_exact": fr(self.genus_exact),
            "genus_bounds": None if self.genus_bounds is None else [fr(x) for x in self.genus_bounds],
            "crossing_exact": self.crossing_exact,
            "crossing_bounds": None if self.crossing_bounds is None else list(self.crossing_bounds),
            "crossing_conjectural": self.crossing_conjectural,
            "braid_index": self.braid_index,
            "tangle": self.tangle,
            "knot_name": self.knot_name,
            "notes": list(self.notes),
        }


def prime_power(n: int) -> tuple[int, int] | None:
    """``(p, k)`` with ``n = p**k``, or ``None``."""
    if n < 2:
        return None
    for p in range(2, n + 1):
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            return (p, k) if n == 1 else None
    return None


def spiral_predictions(spec: LemniscateSpec) -> SpiralPrediction:
    from .fixtures import knot_name

    s, r, l = spec.s, spec.r, spec.l
    m = math.gcd(s, r)
    knot = m == 1
    pp = prime_power(r)
    notes = []

    unknot = True if r == 1 else None
    alex = None
    if pp and knot:
        alex = {"p": pp[0], "base_degree": s - 1, "power": r - 1}

    genus_exact = genus_bounds = None
    if knot:
        upper = Fraction((s - 1) * (r - 1), 2)
        if r == 1:
            genus_exact = Fraction(0)
        elif pp:
            genus_exact = upper
        else:
            genus_bounds = (Fraction(0), upper)
            notes.append("genus lower bound is half the Alexander span; compute it with invariants")

    crossing_exact = crossing_bounds = None
    eps = crossing_signs(spec)
    tangle = None
    if r == 1:
        crossing_exact = 0
    elif r == 2:
        crossing_exact = s + l - 1
        tangle = tangle_notation(eps, 2)
    elif pp:
        crossing_bounds = ((s - 1) * (r - 1) + 1, (s - 1) * r)
    crossing_conjectural = (r - 1) * (s + l - 1) if r > 2 else None
    if crossing_conjectural is not None:
        notes.append("crossing_conjectural is unproven for r > 2")

    braid_index = None
    if r == 2 and knot and l > 1:
        braid_index = l + 1
    elif r == 1:
        braid_index = 1
    elif l == 1 and knot:
        braid_index = min(s, r)

    return SpiralPrediction(
        components=m,
        period=r,
        is_fibred=True,
        is_knot=knot,
        unknot=unknot,
        alexander_mod_p=alex,
        genus_exact=genus_exact,
        genus_bounds=genus_bounds,
        crossing_exact=crossing_exact,
        crossing_bounds=crossing_bounds,
        crossing_conjectural=crossing_conjectural,
        braid_index=braid_index,
        tangle=tangle,
        knot_name=knot_name(s, r, l),
        notes=notes,
    )
