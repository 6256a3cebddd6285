"""Numerical certification of constructed fields.

Root tracking recovers braid words, continuation in ``rho`` certifies the
nodal set on the unit 3-sphere, a quasi-random scan bounds the gradient of
``arg f`` away from zero, and preimage tracing measures hopfion charge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize
from scipy.spatial import cKDTree
from scipy.stats import qmc

from .braids import BraidWord, LemniscateSpec, TrigStrand, braid_word, count_cycles
from .cyclotomic import CompiledSemiholo, SemiholoPolynomial
from .errors import (
    AmbiguousCrossing,
    CollisionDetected,
    CurvesTooClose,
    DegenerateLeading,
    NoValidLambda,
    NotTransverse,
    OpenCurve,
    VerificationError,
    WrongRootCount,
)
from .fields import HopfionField, RealPolynomial4, build_field, inverse_stereographic

TWO_PI = 2.0 * np.pi

ROOT_RESIDUAL = 1e-10
TRANSVERSALITY = 1e-6
CLOSURE_TOL = 1e-6


# ---------------------------------------------------------------------------
# polynomial roots


def _horner(coeffs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Evaluate polynomials with lowest-first ``coeffs[..., k]`` at ``u[..., j]``."""
    out = np.zeros(u.shape, dtype=complex)
    for k in range(coeffs.shape[-1] - 1, -1, -1):
        out = out * u + coeffs[..., k, None]
    return out


def _derivative(coeffs: np.ndarray) -> np.ndarray:
    k = np.arange(1, coeffs.shape[-1])
    return coeffs[..., 1:] * k


def roots_batch(coeffs: np.ndarray, polish: int = 1) -> np.ndarray:
    """Roots of many polynomials at once; ``coeffs[..., k]`` multiplies ``u**k``."""
    coeffs = np.asarray(coeffs, dtype=complex)
    lead = coeffs[..., -1]
    if np.any(lead == 0) or not np.all(np.isfinite(coeffs)):
        raise DegenerateLeading("leading coefficient vanishes")
    monic = coeffs / lead[..., None]
    s = coeffs.shape[-1] - 1
    batch = monic.shape[:-1]
    if s == 0:
        return np.zeros(batch + (0,), dtype=complex)
    comp = np.zeros(batch + (s, s), dtype=complex)
    if s > 1:
        idx = np.arange(s - 1)
        comp[..., idx + 1, idx] = 1.0
    comp[..., :, s - 1] = -monic[..., :s]
    roots = np.linalg.eigvals(comp)
    d = _derivative(monic)
    for _ in range(polish):
        val = _horner(monic, roots)
        fp = _horner(d, roots)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            cand = roots - val / fp
            better = np.abs(_horner(monic, cand)) <= np.abs(val)
        # near multiple roots Newton can blow up; keep the eigenvalue then
        roots = np.where(np.isfinite(cand) & better, cand, roots)
    return roots


def find_roots(coeffs: Sequence[complex]) -> np.ndarray:
    """All roots of ``sum coeffs[k] u**k`` via the companion matrix and one Newton step."""
    return roots_batch(np.asarray(coeffs, dtype=complex)[None, :])[0]


def _normalized(f) -> CompiledSemiholo:
    cf = f.compile() if isinstance(f, SemiholoPolynomial) else f
    s = cf.degree_u
    lead_rows = cf.exps[:, 0] == s
    lead = cf.exps[lead_rows]
    if s == 0 or len(lead) != 1 or lead[0, 1] or lead[0, 2]:
        raise DegenerateLeading("u^s coefficient must be a nonzero constant")
    return cf.scaled(1.0 / cf.coeffs[lead_rows][0])


def _stretched(f, lam: float) -> CompiledSemiholo:
    """Monic version of ``lam^s f(u / lam, v)``."""
    cf = _normalized(f)
    s = cf.degree_u
    return CompiledSemiholo(cf.exps, cf.coeffs * float(lam) ** (s - cf.exps[:, 0]))


# ---------------------------------------------------------------------------
# strand matching


def _match(prev: np.ndarray, cur: np.ndarray) -> tuple[np.ndarray, float]:
    """Reorder ``cur`` to follow ``prev``; returns reordered roots and the largest move."""
    d = np.abs(cur[None, :] - prev[:, None])
    idx = d.argmin(axis=1)
    if len(set(idx.tolist())) != len(idx):
        _, idx = linear_sum_assignment(d)
    out = cur[idx]
    return out, float(np.abs(out - prev).max()) if len(prev) else 0.0


def _min_sep(z: np.ndarray) -> float:
    if len(z) < 2:
        return math.inf
    d = np.abs(z[:, None] - z[None, :])
    d[np.diag_indices(len(z))] = np.inf
    return float(d.min())


@dataclass
class RootTrack:
    """Continuously labelled roots over ``h`` in ``[h0, h0 + 2 pi]``."""

    h: np.ndarray
    roots: np.ndarray  # (len(h), s)
    roots_at: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    match_residual: float | None = None
    refine: Callable[[float, np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    @property
    def strands(self) -> int:
        return self.roots.shape[1]

    @property
    def permutation(self) -> tuple[int, ...]:
        """``perm[j]``: column holding, at the start, the point where column ``j`` ends."""
        start, end = self.roots[0], self.roots[-1]
        d = np.abs(end[:, None] - start[None, :])
        _, idx = linear_sum_assignment(d)
        return tuple(int(i) for i in idx)

    @property
    def components(self) -> int:
        return count_cycles(self.permutation)

    def matched_at(self, h: float, ref: np.ndarray) -> np.ndarray:
        if self.refine is not None:
            return self.refine(h, ref)
        return _match(ref, self.roots_at(np.array([h]))[0])[0]


def _track(roots_at, steps: int, collision: float = 1e-9, max_depth: int = 12, refine=None) -> RootTrack:
    h = TWO_PI * (np.arange(steps + 1) + 0.5) / steps
    raw = roots_at(h)
    hs = [h[0]]
    out = [raw[0]]

    def advance(h0, r0, h1, r1_raw, depth):
        r1, move = _match(r0, r1_raw)
        sep = min(_min_sep(r0), _min_sep(r1))
        if sep < collision:
            raise CollisionDetected(f"roots within {sep:.2e} near h = {h1:.6f}")
        if move < 0.3 * sep:
            hs.append(h1)
            out.append(r1)
            return r1
        if depth >= max_depth:
            raise CollisionDetected(f"cannot resolve root motion near h = {h1:.6f}")
        hm = 0.5 * (h0 + h1)
        mid = refine(hm, r0) if refine is not None else roots_at(np.array([hm]))[0]
        rm = advance(h0, r0, hm, mid, depth + 1)
        return advance(hm, rm, h1, r1_raw, depth + 1)

    cur = raw[0]
    for k in range(1, steps + 1):
        cur = advance(h[k - 1], cur, h[k], raw[k], 0)
    return RootTrack(np.array(hs), np.array(out), roots_at, refine=refine)


def track_braid(
    f, lam=1, steps: int = 4096, strands: Sequence[TrigStrand] | None = None
) -> RootTrack:
    """Follow the ``s`` roots of ``f_lam(u, e^{ih})`` around the circle."""
    cf = _stretched(f, lam)

    def roots_at(h):
        return roots_batch(cf.u_coefficients(np.exp(1j * np.asarray(h))))

    track = _track(roots_at, steps)
    if strands is not None:
        lam = float(lam)
        analytic = np.array([z(track.h) for z in strands]).T * lam
        res = 0.0
        for row, ref in zip(track.roots, analytic):
            row_m, _ = _match(ref, row)
            res = max(res, float(np.abs(row_m - ref).max()))
        track.match_residual = res
    return track


# ---------------------------------------------------------------------------
# crossings


@dataclass(frozen=True)
class Crossing:
    h: float
    generator: int
    sign: int


def _crossings_in(track: RootTrack, h_lo, h_hi, r_lo, r_hi, depth, out, ambiguity):
    order_hi = np.argsort(r_hi.real, kind="stable")
    order_lo = np.argsort(r_lo.real, kind="stable")
    if np.array_equal(order_hi, order_lo):
        return
    pos_lo = np.empty_like(order_lo)
    pos_lo[order_lo] = np.arange(len(order_lo))
    moves = pos_lo[order_hi] - np.arange(len(order_hi))
    simple = np.all(np.abs(moves) <= 1)
    if simple:
        p = 0
        pairs = []
        while p < len(moves):
            if moves[p] == 0:
                p += 1
            elif moves[p] == 1 and p + 1 < len(moves) and moves[p + 1] == -1:
                pairs.append(p)
                p += 2
            else:
                simple = False
                break
    if not simple:
        if depth > 40:
            raise AmbiguousCrossing(f"unresolved crossings near h = {h_hi:.6f}")
        hm = 0.5 * (h_lo + h_hi)
        r_mid = track.matched_at(hm, r_hi)
        _crossings_in(track, hm, h_hi, r_mid, r_hi, depth + 1, out, ambiguity)
        _crossings_in(track, h_lo, hm, r_lo, r_mid, depth + 1, out, ambiguity)
        return
    for p in pairs:
        c1, c2 = order_hi[p], order_hi[p + 1]
        lo, hi, rl, rh = h_lo, h_hi, r_lo, r_hi
        for _ in range(60):
            if hi - lo < 1e-13:
                break
            hm = 0.5 * (lo + hi)
            rm = track.matched_at(hm, rh)
            if (rm[c1].real - rm[c2].real) < 0:
                hi, rh = hm, rm
            else:
                lo, rl = hm, rm
        hc = 0.5 * (lo + hi)
        rc = track.matched_at(hc, rh)
        gap = rc[c1].imag - rc[c2].imag
        if abs(gap) < ambiguity:
            raise AmbiguousCrossing(f"strands meet at h = {hc:.9f}")
        # the strand on the left at the upper end passes over: positive generator
        out.append(Crossing(hc, int(p) + 1, 1 if gap > 0 else -1))


def find_crossings(track: RootTrack, ambiguity: float = 1e-9) -> list[Crossing]:
    """Crossings in reading order (``h`` decreasing from the top of the track)."""
    out: list[Crossing] = []
    for i in range(len(track.h) - 1, 0, -1):
        found: list[Crossing] = []
        _crossings_in(
            track, track.h[i - 1], track.h[i], track.roots[i - 1], track.roots[i], 0, found, ambiguity
        )
        out.extend(sorted(found, key=lambda c: -c.h))
    return out


def batch_crossings(crossings: Sequence[Crossing], tol: float = 1e-7) -> list[list[Crossing]]:
    batches: list[list[Crossing]] = []
    for c in crossings:
        if batches and abs(batches[-1][-1].h - c.h) < tol:
            batches[-1].append(c)
        else:
            batches.append([c])
    return [sorted(b, key=lambda c: c.generator) for b in batches]


def recover_braid_word(track: RootTrack, canonical: bool = True) -> BraidWord:
    """Braid word read off the track, starting at the top of the circle.

    Simultaneous crossings are ordered by generator.  With ``canonical``, the
    batches are cyclically rotated (a conjugation) so the first batch holding
    ``sigma_1`` leads.
    """
    batches = batch_crossings(find_crossings(track))
    if canonical and batches:
        first = next((i for i, b in enumerate(batches) if any(c.generator == 1 for c in b)), 0)
        batches = batches[first:] + batches[:first]
    letters = tuple((c.generator, c.sign) for b in batches for c in b)
    return BraidWord(letters, track.strands)


# ---------------------------------------------------------------------------
# nodal set on the unit 3-sphere


class _PolarField:
    """``f(u, rho e^{ih})`` with u-coefficients as functions of ``rho``."""

    def __init__(self, cf: CompiledSemiholo):
        self.cf = cf
        self.s = cf.degree_u
        e = cf.exps
        self.eu = e[:, 0]
        self.deg = e[:, 1] + e[:, 2]
        self.phase = e[:, 1] - e[:, 2]
        self.onehot = np.zeros((len(e), self.s + 1))
        self.onehot[np.arange(len(e)), self.eu] = 1.0

    def phases(self, h):
        return self.cf.coeffs[None, :] * np.exp(1j * np.outer(h, self.phase))

    def coefficients(self, E, rho):
        """u-coefficients and their rho-derivative; ``rho`` broadcasts over rows."""
        rho = np.asarray(rho, dtype=float)[..., None]
        with np.errstate(divide="ignore", invalid="ignore"):
            pw = rho**self.deg
            dpw = np.where(self.deg > 0, self.deg * rho ** np.maximum(self.deg - 1, 0), 0.0)
        return (E * pw) @ self.onehot, (E * dpw) @ self.onehot


def _horner_pointwise(coeffs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Like :func:`_horner` but with one coefficient row per point."""
    out = np.zeros(u.shape, dtype=complex)
    for k in range(coeffs.shape[-1] - 1, -1, -1):
        out = out * u + coeffs[..., k]
    return out


def _newton(C, u, iters=3):
    d = _derivative(C)
    for _ in range(iters):
        u = u - _horner(C, u) / _horner(d, u)
    return u


@dataclass
class SpherePoints:
    u: np.ndarray  # (H, s)
    rho: np.ndarray  # (H, s)
    min_du: float
    min_dg: float


def sphere_points(cf: CompiledSemiholo, h: np.ndarray, levels: int = 48, max_levels: int = 1536) -> SpherePoints:
    """Intersections of ``{f = 0}`` with the unit 3-sphere along the slices ``arg v = h``.

    Every root branch of ``f(., rho e^{ih})`` is continued from ``rho = 1`` to
    ``rho = 0``; each must meet ``|u|^2 + rho^2 = 1`` exactly once.  Slices on
    which branches come close are redone with finer ``rho`` steps; at the
    finest level branches are paired by optimal assignment, which only
    matters if the near-collision sits on the sphere itself.
    """
    pf = _PolarField(cf)
    h = np.asarray(h, dtype=float)
    E = pf.phases(h)
    H, s = len(h), pf.s
    found_u = np.zeros((H, s), dtype=complex)
    found_rho = np.zeros((H, s))
    count = np.zeros((H, s), dtype=int)
    todo = np.arange(H)
    while len(todo):
        final = levels >= max_levels
        fu_, fr_, cnt, bad = _continue_rows(pf, E[todo], levels, final)
        keep = ~bad
        found_u[todo[keep]] = fu_[keep]
        found_rho[todo[keep]] = fr_[keep]
        count[todo[keep]] = cnt[keep]
        todo = todo[bad]
        levels *= 2
    if np.any(count != 1):
        bad = int(np.sum(count != 1))
        raise WrongRootCount(
            f"{bad} root branches meet the sphere {sorted(set(count.ravel().tolist()))} times, expected once"
        )
    Cpt, dCpt = pf.coefficients(E[:, None, :], found_rho)
    fu = _horner_pointwise(_derivative(Cpt), found_u)
    fr = _horner_pointwise(dCpt, found_u)
    resid = _horner_pointwise(Cpt, found_u)
    if np.abs(resid).max() > 1e-8:
        raise NotTransverse(f"intersection residual {np.abs(resid).max():.2e}")
    du = np.abs(fu)
    uprime = -fr / fu
    dg = 2 * (np.conj(found_u) * uprime).real + 2 * found_rho
    if du.min() < TRANSVERSALITY:
        raise NotTransverse(f"|df/du| = {du.min():.2e} at an intersection point")
    if np.abs(dg).min() < 1e-9:
        raise NotTransverse("a root branch is tangent to the sphere")
    return SpherePoints(found_u, found_rho, float(du.min()), float(np.abs(dg).min()))


def sphere_newton(pf: _PolarField, h: float, u0: np.ndarray, iters: int = 8) -> np.ndarray | None:
    """Newton on ``f = 0, |u|^2 + rho^2 = 1`` from the points ``u0``; ``None`` if it fails."""
    E = pf.phases(np.array([h]))
    u = np.array(u0, dtype=complex)
    rho = np.sqrt(np.clip(1.0 - np.abs(u) ** 2, 0.0, None))
    for _ in range(iters):
        C, dC = pf.coefficients(E, rho[None, :])
        C, dC = C[0], dC[0]
        f = _horner_pointwise(C, u)
        fu = _horner_pointwise(_derivative(C), u)
        fr = _horner_pointwise(dC, u)
        J = np.empty((len(u), 3, 3))
        J[:, 0] = np.column_stack([fu.real, (1j * fu).real, fr.real])
        J[:, 1] = np.column_stack([fu.imag, (1j * fu).imag, fr.imag])
        J[:, 2] = np.column_stack([2 * u.real, 2 * u.imag, 2 * rho])
        r = np.column_stack([f.real, f.imag, np.abs(u) ** 2 + rho**2 - 1.0])
        try:
            d = np.linalg.solve(J, r[..., None])[..., 0]
        except np.linalg.LinAlgError:
            return None
        u = u - (d[:, 0] + 1j * d[:, 1])
        rho = rho - d[:, 2]
        if np.abs(d).max() < 1e-14:
            break
    if not np.all(np.isfinite(u)) or np.abs(d).max() > 1e-9 or np.any(rho < 0):
        return None
    return u


def _continue_rows(pf: _PolarField, E: np.ndarray, levels: int, final: bool):
    """Continue roots from ``rho = 1`` to ``0``; returns points, counts and rows needing more levels."""
    H = E.shape[0]
    s = pf.s
    rhos = np.linspace(1.0, 0.0, levels + 1)
    C, dC = pf.coefficients(E, np.ones(H))
    u_prev = roots_batch(C)
    g_prev = np.abs(u_prev) ** 2
    found_u = np.zeros((H, s), dtype=complex)
    found_rho = np.zeros((H, s))
    count = np.zeros((H, s), dtype=int)
    bad = np.zeros(H, dtype=bool)
    for k in range(1, levels + 1):
        rho0, rho1 = rhos[k - 1], rhos[k]
        du = -_horner(dC, u_prev) / _horner(_derivative(C), u_prev)
        C, dC = pf.coefficients(E, np.full(H, rho1))
        guess = u_prev + du * (rho1 - rho0)
        u_new = _newton(C, guess)
        if s > 1:
            diff = np.abs(u_new[:, :, None] - u_new[:, None, :])
            diff[:, np.arange(s), np.arange(s)] = np.inf
            sep = diff.min(axis=2)
            step = np.abs(u_new - u_prev)
            rough = np.any(step > 0.3 * sep, axis=1) | ~np.all(np.isfinite(u_new), axis=1)
            if np.any(rough):
                if not final:
                    bad |= rough
                else:
                    exact = roots_batch(C[rough])
                    for i, row in zip(np.nonzero(rough)[0], exact):
                        u_new[i] = _match(u_prev[i], row)[0]
        g_new = np.abs(u_new) ** 2 + rho1**2 - 1.0
        hit = ((g_prev > 0) != (g_new > 0)) & ~bad[:, None]
        if np.any(hit):
            rows = np.nonzero(hit)[0]
            Eh = E[rows]
            lo = np.full(len(rows), rho1)
            hi = np.full(len(rows), rho0)
            g_hi = g_prev[hit]
            ru = u_prev[hit]
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                Cm, _ = pf.coefficients(Eh, mid)
                ru = _newton(Cm, ru[:, None], iters=2)[:, 0]
                gm = np.abs(ru) ** 2 + mid**2 - 1.0
                same = (gm > 0) == (g_hi > 0)
                hi = np.where(same, mid, hi)
                lo = np.where(same, lo, mid)
            rr = 0.5 * (lo + hi)
            Cm, _ = pf.coefficients(Eh, rr)
            ru = _newton(Cm, ru[:, None], iters=2)[:, 0]
            found_u[hit] = ru
            found_rho[hit] = rr
            count[hit] += 1
        u_prev, g_prev = u_new, g_new
    return found_u, found_rho, count, bad


@dataclass
class NodalCurve:
    """Closed polyline on S^3 (``points4``) with its stereographic image."""

    points4: np.ndarray
    closed: bool
    residual: float

    @property
    def points3(self) -> np.ndarray:
        u = self.points4[:, 0] + 1j * self.points4[:, 1]
        v = self.points4[:, 2] + 1j * self.points4[:, 3]
        return inverse_stereographic(u, v)


@dataclass
class NodalCertificate:
    word: BraidWord
    expected: BraidWord | None
    components: int
    curves: list[NodalCurve]
    min_du: float
    min_dg: float
    lam: float

    @property
    def word_matches(self) -> bool:
        return self.expected is None or self.word == self.expected

    @property
    def passed(self) -> bool:
        return self.word_matches and all(c.closed for c in self.curves)

    def to_dict(self) -> dict:
        return {
            "word": self.word.to_signed(),
            "expected_word": None if self.expected is None else self.expected.to_signed(),
            "components": self.components,
            "min_du": self.min_du,
            "min_dg": self.min_dg,
            "lambda": self.lam,
            "passed": self.passed,
        }


def _assemble_curves(track: RootTrack, cf: CompiledSemiholo) -> list[NodalCurve]:
    rho = np.sqrt(np.clip(1.0 - np.abs(track.roots) ** 2, 0.0, None))
    v = rho * np.exp(1j * track.h)[:, None]
    u = track.roots
    perm = track.permutation
    seen = set()
    curves = []
    for j0 in range(track.strands):
        if j0 in seen:
            continue
        pts = []
        j = j0
        while j not in seen:
            seen.add(j)
            pts.append(np.column_stack([u[:-1, j].real, u[:-1, j].imag, v[:-1, j].real, v[:-1, j].imag]))
            j = perm[j]
        poly = np.vstack(pts)
        uu = poly[:, 0] + 1j * poly[:, 1]
        vv = poly[:, 2] + 1j * poly[:, 3]
        resid = float(np.abs(cf(uu, vv)).max())
        gap = np.linalg.norm(poly[0] - poly[-1])
        steps = np.linalg.norm(np.diff(poly, axis=0), axis=1)
        closed = bool(gap <= 2.0 * steps.max() + CLOSURE_TOL)
        curves.append(NodalCurve(poly, closed, resid))
    return curves


def verify_nodal_on_sphere(
    f, lam=1, steps: int = 4096, expected: BraidWord | None = None, levels: int = 48
) -> NodalCertificate:
    """Certify that ``{f_lam = 0}`` meets S^3 in a closed braid closure.

    Raises :class:`WrongRootCount` or :class:`NotTransverse` when the
    intersection is not the expected ``s`` transverse points on every slice.
    """
    cf = _stretched(f, lam)
    stats = {"du": np.inf, "dg": np.inf}

    pf = _PolarField(cf)

    def roots_at(h):
        sp = sphere_points(cf, np.asarray(h, dtype=float), levels)
        stats["du"] = min(stats["du"], sp.min_du)
        stats["dg"] = min(stats["dg"], sp.min_dg)
        return sp.u

    def refine(h, ref):
        u = sphere_newton(pf, h, ref)
        if u is None or _min_sep(u) < 1e-9 or np.abs(u - ref).max() > 0.3 * _min_sep(ref):
            return _match(ref, roots_at(np.array([h]))[0])[0]
        return u

    track = _track(roots_at, steps, refine=refine)
    word = recover_braid_word(track)
    curves = _assemble_curves(track, cf)
    return NodalCertificate(
        word, expected, track.components, curves, stats["du"], stats["dg"], float(lam)
    )


def certify_spec(spec: LemniscateSpec, lam=None, steps: int = 4096) -> NodalCertificate:
    """Nodal certification of a lemniscate spec at ``lam`` (default: the spec's own)."""
    f1 = build_field(spec.with_(lam=1))
    lam = spec.lam if lam is None else lam
    return verify_nodal_on_sphere(f1, float(lam), steps, expected=braid_word(spec))


# ---------------------------------------------------------------------------
# phase-critical points


@dataclass
class FibrationReport:
    sample_count: int
    min_grad_norm: float
    argmin: tuple[complex, complex]
    tolerance: float
    tube: float

    @property
    def margin_positive(self) -> bool:
        return self.min_grad_norm > self.tolerance

    def to_dict(self) -> dict:
        u, v = self.argmin
        return {
            "sampleCount": self.sample_count,
            "minGradNorm": self.min_grad_norm,
            "argmin": [u.real, u.imag, v.real, v.imag],
            "marginPositive": self.margin_positive,
            "tube": self.tube,
        }


def sphere_samples(n: int, seed: int = 0) -> np.ndarray:
    """Scrambled-Sobol points, uniform on the unit 3-sphere, as ``(n, 4)``."""
    m = int(math.ceil(math.log2(max(n, 2))))
    t = qmc.Sobol(d=3, scramble=True, seed=seed).random_base2(m)[:n]
    eta = np.arcsin(np.sqrt(t[:, 0]))
    a, b = TWO_PI * t[:, 1], TWO_PI * t[:, 2]
    return np.column_stack(
        [np.cos(eta) * np.cos(a), np.cos(eta) * np.sin(a), np.sin(eta) * np.cos(b), np.sin(eta) * np.sin(b)]
    )


def arg_gradient(cf: CompiledSemiholo, x: np.ndarray) -> np.ndarray:
    """Tangential gradient of ``arg f`` on S^3 at points ``x[..., 4]``."""
    u = x[..., 0] + 1j * x[..., 1]
    v = x[..., 2] + 1j * x[..., 3]
    f, fu, fv, fvb = cf.evaluate(u, v)
    grads = np.stack([fu, 1j * fu, fv + fvb, 1j * (fv - fvb)], axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (grads / f[..., None]).imag
    g = np.where(np.isfinite(g), g, 0.0)
    radial = np.sum(g * x, axis=-1, keepdims=True) / np.sum(x * x, axis=-1, keepdims=True)
    return g - radial * x


def fibration_scan(
    f,
    lam=1,
    samples: int = 200_000,
    tube: float = 0.05,
    nodal_points: np.ndarray | None = None,
    seed: int = 0,
    tolerance: float = 1e-4,
    refine: int = 16,
) -> FibrationReport:
    """Minimum of ``|grad_{S^3} arg f_lam|`` over quasi-random points outside a tube.

    The lowest ``refine`` samples are polished by local minimisation so a
    phase-critical point between samples is not missed.
    """
    cf = f.compile() if isinstance(f, SemiholoPolynomial) else f
    if cf.degree_u > 0:
        cf = _stretched(cf, lam)
        if nodal_points is None:
            cert = verify_nodal_on_sphere(cf, 1, steps=1024)
            nodal_points = np.vstack([c.points4 for c in cert.curves])
    x = sphere_samples(samples, seed)
    tree = cKDTree(nodal_points) if nodal_points is not None and len(nodal_points) else None
    if tree is not None:
        dist, _ = tree.query(x)
        x = x[dist > tube]
    norms = np.linalg.norm(arg_gradient(cf, x), axis=-1)
    order = np.lexsort((x[:, 3], x[:, 2], x[:, 1], x[:, 0], norms))
    best_val = float(norms[order[0]])
    best_x = x[order[0]]

    def objective(y):
        y = y / np.linalg.norm(y)
        if tree is not None and tree.query(y)[0] <= tube:
            return 1e6
        return float(np.linalg.norm(arg_gradient(cf, y[None, :])[0]))

    for i in order[:refine]:
        res = minimize(objective, x[i], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
        if res.fun < best_val:
            best_val = float(res.fun)
            best_x = res.x / np.linalg.norm(res.x)
    return FibrationReport(
        len(x),
        best_val,
        (complex(best_x[0], best_x[1]), complex(best_x[2], best_x[3])),
        tolerance,
        tube,
    )


# ---------------------------------------------------------------------------
# stretch threshold


@dataclass
class LambdaSearch:
    lam_star: float
    tested: list[tuple[float, bool]]
    capped: bool

    def to_dict(self) -> dict:
        return {"lambdaStar": self.lam_star, "capped": self.capped, "tested": [[l, p] for l, p in self.tested]}


def lambda_threshold_search(
    spec: LemniscateSpec, lam_max: float = 2.0, resolution: float = 1e-3, steps: int = 1024
) -> LambdaSearch:
    """Largest tested ``lam`` at which nodal certification passes.

    Halves from ``lam_max`` to the first pass, then bisects towards the
    neighbouring failure.  Passing is not assumed monotone: only the tested
    values carry a certificate.
    """
    f1 = build_field(spec.with_(lam=1))
    expected = braid_word(spec)
    tested: list[tuple[float, bool]] = []

    def ok(lam):
        try:
            passed = verify_nodal_on_sphere(f1, lam, steps, expected).passed
        except VerificationError:
            passed = False
        tested.append((float(lam), passed))
        return passed

    lam = lam_max
    if ok(lam):
        return LambdaSearch(lam, tested, True)
    fail = lam
    while True:
        lam /= 2
        if lam < 1e-4:
            if not ok(1e-4):
                raise NoValidLambda(f"no certified lambda for {spec}")
            lam = 1e-4
            break
        if ok(lam):
            break
        fail = lam
    good = lam
    while fail - good > resolution:
        mid = 0.5 * (good + fail)
        if ok(mid):
            good = mid
        else:
            fail = mid
    return LambdaSearch(good, tested, False)


# ---------------------------------------------------------------------------
# the weakly isolated singularity


@dataclass
class MilnorCertificate:
    rho: float
    word: BraidWord
    expected: BraidWord | None
    components: int
    min_regularity: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "word": self.word.to_signed(),
            "expected_word": None if self.expected is None else self.expected.to_signed(),
            "components": self.components,
            "min_regularity": self.min_regularity,
            "passed": self.passed,
        }


def verify_milnor_sphere(
    F: RealPolynomial4, rho: float, steps: int = 2048, expected: BraidWord | None = None, regular_tol: float = 1e-6
) -> MilnorCertificate:
    """Braid word of ``{F = 0}`` on the sphere of radius ``rho`` and regularity there.

    On that sphere, writing ``u = rho U`` and ``v = rho V`` turns ``F`` into a
    polynomial in ``U, V, conj V`` whose nodal set on the unit sphere is
    certified as for any constructed field.
    """
    top = max(F.complex_terms, key=lambda k: (k[0], -k[1] - k[2]))
    e0 = 2 * top[3] + top[0] + top[1] + top[2]
    terms: dict[tuple[int, int, int], complex] = {}
    for (a, b, c, k), g in F.complex_terms.items():
        key = (a, b, c)
        terms[key] = terms.get(key, 0) + complex(g) * rho ** (2 * k + a + b + c - e0)
    cf = CompiledSemiholo.from_terms(terms)
    cert = verify_nodal_on_sphere(cf, 1, steps, expected)
    pts = rho * np.vstack([c.points4 for c in cert.curves])
    _, grad = F.compiled().evaluate(pts)
    J = np.stack([grad.real, grad.imag], axis=1)  # (n, 2, 4)
    normal = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    Jt = J - np.einsum("nij,nj->ni", J, normal)[:, :, None] * normal[:, None, :]
    sv = np.linalg.svd(Jt, compute_uv=False)
    ratio = float((sv[:, -1] / sv[:, 0]).min())
    passed = cert.passed and ratio > regular_tol
    return MilnorCertificate(rho, cert.word, expected, cert.components, ratio, passed)


# ---------------------------------------------------------------------------
# hopfion preimages and linking


def _target_function(field_: HopfionField, target) -> Callable[[np.ndarray], np.ndarray]:
    """Complex function on R^3 whose zero set is the preimage of ``target``."""
    t = np.asarray(target, dtype=float)
    t = t / np.linalg.norm(t)
    if t[2] <= -1 + 1e-12:
        return lambda p: field_.parts(p)[1]
    w0 = complex(t[0], t[1]) / (1.0 + t[2])

    def fn(p):
        g, fv = field_.parts(p)
        return g - w0 * fv

    return fn


def _jacobian(fn, p: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Rows ``grad Re``, ``grad Im`` at ``p[..., 3]`` by central differences."""
    cols = []
    for i in range(3):
        d = np.zeros(3)
        d[i] = eps
        cols.append((fn(p + d) - fn(p - d)) / (2 * eps))
    J = np.stack(cols, axis=-1)
    return np.stack([J.real, J.imag], axis=-2)


def _project(fn, p: np.ndarray, iters: int = 30, tol: float = 1e-11):
    """Gauss-Newton projection of points onto the zero set."""
    p = np.array(p, dtype=float)
    ok = np.zeros(p.shape[:-1], dtype=bool)
    for _ in range(iters):
        val = fn(p)
        J = _jacobian(fn, p)
        r = np.stack([val.real, val.imag], axis=-1)
        JJt = J @ np.swapaxes(J, -1, -2)
        det = np.linalg.det(JJt)
        safe = np.abs(det) > 1e-300
        sol = np.zeros_like(r)
        sol[safe] = np.linalg.solve(JJt[safe], r[safe][..., None])[..., 0]
        step = np.einsum("...ji,...j->...i", J, sol)
        p = p - step
        gn = np.sqrt(np.abs(det)) ** 0.5
        ok = np.linalg.norm(step, axis=-1) < tol * (1 + np.linalg.norm(p, axis=-1))
        if np.all(ok | ~safe):
            break
    return p, ok


def _tangent(fn, p: np.ndarray) -> np.ndarray:
    J = _jacobian(fn, p[None, :])[0]
    t = np.cross(J[0], J[1])
    n = np.linalg.norm(t)
    if n == 0:
        raise VerificationError("target is not a regular value along the curve")
    return t / n


def _trace_one(fn, start, box, max_step, min_step=1e-5, max_points=200_000) -> np.ndarray:
    pts = [start]
    p = start
    t = _tangent(fn, p)
    ds = max_step
    length = 0.0
    while len(pts) < max_points:
        q = p + ds * t
        q, ok = _project(fn, q[None, :], iters=8, tol=1e-12)
        q = q[0]
        if not ok[0] or np.linalg.norm(q - p) > 1.5 * ds:
            ds *= 0.5
            if ds < min_step:
                raise VerificationError("preimage trace stalled")
            continue
        tq = _tangent(fn, q)
        if np.dot(tq, t) < math.cos(0.2):
            ds *= 0.5
            if ds < min_step:
                raise VerificationError("preimage trace stalled")
            continue
        if np.any(np.abs(q) > box):
            raise OpenCurve("preimage leaves the bounding box")
        length += np.linalg.norm(q - p)
        p, t = q, tq
        if length > 4 * max_step and np.linalg.norm(p - start) < 0.75 * ds:
            return np.array(pts)
        pts.append(p)
        ds = min(ds * 1.25, max_step)
    raise OpenCurve("preimage trace did not close")


def trace_preimage(
    field_: HopfionField, target, grid: int = 96, half_width: float = 6.0
) -> list[NodalCurve]:
    """Closed curves where ``phi = target``, seeded from sign changes on a grid."""
    fn = _target_function(field_, target)
    axis = np.linspace(-half_width, half_width, grid)
    cell = axis[1] - axis[0]
    P = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)
    vals = fn(P.reshape(-1, 3)).reshape(grid, grid, grid)
    corners = [vals[i : grid - 1 + i, j : grid - 1 + j, k : grid - 1 + k] for i in (0, 1) for j in (0, 1) for k in (0, 1)]
    re = np.stack([c.real for c in corners])
    im = np.stack([c.imag for c in corners])
    cand = (re.min(0) < 0) & (re.max(0) > 0) & (im.min(0) < 0) & (im.max(0) > 0)
    idx = np.argwhere(cand)
    seeds = axis[0] + (idx + 0.5) * cell
    if not len(seeds):
        return []
    proj, ok = _project(fn, seeds)
    seeds = proj[ok & np.all(np.abs(proj) < half_width, axis=1)]
    curves: list[NodalCurve] = []
    used = np.zeros(len(seeds), dtype=bool)
    for i in range(len(seeds)):
        if used[i]:
            continue
        pts = _trace_one(fn, seeds[i], half_width, max_step=0.5 * cell)
        tree = cKDTree(pts)
        used |= tree.query(seeds)[0] < 0.5 * cell
        if any(np.median(cKDTree(c.points4).query(pts)[0]) < 0.5 * cell for c in curves):
            continue
        residual = float(np.abs(fn(pts)).max())
        curves.append(NodalCurve(pts, True, residual))
    return curves


@dataclass
class LinkingResult:
    linking_number: int
    raw: float
    pairs: list[tuple[int, int, float]]

    def to_dict(self) -> dict:
        return {"linkingNumber": self.linking_number, "rawIntegral": self.raw, "pairs": [list(p) for p in self.pairs]}


def _gauss_pair(a: np.ndarray, b: np.ndarray, chunk: int = 512) -> float:
    """Exact linking number of two closed polygons (segment solid angles)."""
    a1, a2 = a, np.roll(a, -1, axis=0)
    b1, b2 = b, np.roll(b, -1, axis=0)
    total = 0.0
    for s in range(0, len(a), chunk):
        p1 = a1[s : s + chunk, None, :]
        p2 = a2[s : s + chunk, None, :]
        p3 = b1[None, :, :]
        p4 = b2[None, :, :]
        r13, r14, r23, r24 = p3 - p1, p4 - p1, p3 - p2, p4 - p2
        ns = [np.cross(r13, r14), np.cross(r14, r24), np.cross(r24, r23), np.cross(r23, r13)]
        with np.errstate(invalid="ignore", divide="ignore"):
            ns = [n / np.linalg.norm(n, axis=-1, keepdims=True) for n in ns]
        omega = sum(
            np.arcsin(np.clip(np.sum(ns[i] * ns[(i + 1) % 4], axis=-1), -1, 1)) for i in range(4)
        )
        omega = np.nan_to_num(omega)
        sgn = np.sign(np.sum(np.cross(p4 - p3, p2 - p1) * r13, axis=-1))
        total += float(np.sum(omega * sgn))
    return total / (4 * np.pi)


def gauss_linking(a, b) -> LinkingResult:
    """Total linking number between two sets of closed curves."""
    a = [a] if isinstance(a, NodalCurve) else list(a)
    b = [b] if isinstance(b, NodalCurve) else list(b)
    pairs = []
    raw = 0.0
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            pa, pb = _curve3(ca), _curve3(cb)
            step = max(_max_step(pa), _max_step(pb))
            dmin = cKDTree(pb).query(pa)[0].min()
            if dmin < 10 * step:
                raise CurvesTooClose(f"curves {i} and {j} are {dmin:.3g} apart (step {step:.3g})")
            lk = _gauss_pair(pa, pb)
            pairs.append((i, j, lk))
            raw += lk
    n = int(round(raw))
    if abs(raw - n) >= 0.1:
        raise VerificationError(f"linking integral {raw:.4f} is not near an integer")
    return LinkingResult(n, raw, pairs)


def _curve3(c) -> np.ndarray:
    if isinstance(c, NodalCurve):
        return c.points4 if c.points4.shape[1] == 3 else c.points3
    return np.asarray(c, dtype=float)


def _max_step(p: np.ndarray) -> float:
    return float(np.linalg.norm(np.diff(np.vstack([p, p[:1]]), axis=0), axis=1).max())


# the radial chart R^3 -> S^3 reverses the standard orientation of S^3
# (outward normal first), so the Hopf charge is minus the R^3 linking number
CHART_DEGREE = -1

DEFAULT_TARGETS = (1, -1, 1j, 2, 0.5)


def target_point(w) -> tuple[float, float, float]:
    """Point of S^2 with stereographic coordinate ``w``; ``None`` gives the south pole."""
    if w is None:
        return (0.0, 0.0, -1.0)
    w = complex(w)
    d = 1.0 + abs(w) ** 2
    return (2 * w.real / d, 2 * w.imag / d, (1 - abs(w) ** 2) / d)


@dataclass
class ChargeResult:
    charge: int
    raw: float
    targets: tuple
    curves: tuple[list[NodalCurve], list[NodalCurve]]
    predicted: int | None = None

    def to_dict(self) -> dict:
        return {
            "charge": self.charge,
            "rawIntegral": self.raw,
            "targets": [None if t is None else [complex(t).real, complex(t).imag] for t in self.targets],
            "components": [len(self.curves[0]), len(self.curves[1])],
            "predicted": self.predicted,
            "matches": None if self.predicted is None else self.charge == self.predicted,
        }


def hopf_charge(field_: HopfionField, grid: int = 96, half_width: float = 6.0, targets=DEFAULT_TARGETS) -> ChargeResult:
    """Hopf charge from the linking of two regular-value preimages.

    Pairs of targets are tried in order until both preimages are closed and
    separated enough for the polygon linking number to be trusted.
    """
    predicted = getattr(field_.spec, "predicted_charge", None)
    if field_.spec.N == 0:
        return ChargeResult(0, 0.0, (), ([], []), predicted)
    cache: dict = {}
    errors = []

    def densify(curves, w):
        fn = _target_function(field_, target_point(w))
        out = []
        for c in curves:
            p = c.points4
            mid, ok = _project(fn, 0.5 * (p + np.roll(p, -1, axis=0)))
            mid = np.where(ok[:, None], mid, 0.5 * (p + np.roll(p, -1, axis=0)))
            dense = np.empty((2 * len(p), 3))
            dense[0::2], dense[1::2] = p, mid
            out.append(NodalCurve(dense, True, max(c.residual, float(np.abs(fn(mid)).max()))))
        return out

    def link(ca, cb, a, b):
        for _ in range(6):
            try:
                return gauss_linking(ca, cb)
            except CurvesTooClose as exc:
                last = exc
                ca, cb = densify(ca, a), densify(cb, b)
        raise last

    def curves_for(w):
        if w not in cache:
            try:
                cache[w] = trace_preimage(field_, target_point(w), grid, half_width)
            except VerificationError as exc:
                cache[w] = exc
        return cache[w]

    for i, a in enumerate(targets):
        for b in targets[i + 1 :]:
            ca, cb = curves_for(a), curves_for(b)
            if isinstance(ca, Exception) or isinstance(cb, Exception):
                errors.append(ca if isinstance(ca, Exception) else cb)
                continue
            if not ca or not cb:
                errors.append(VerificationError(f"empty preimage for target {a if not ca else b}"))
                continue
            try:
                lk = link(ca, cb, a, b)
            except VerificationError as exc:
                errors.append(exc)
                continue
            return ChargeResult(CHART_DEGREE * lk.linking_number, CHART_DEGREE * lk.raw, (a, b), (ca, cb), predicted)
    raise errors[-1] if errors else VerificationError("no usable target pair")
