"""Chords, curve reductions, double tangents and the inflection census.

A double tangent interval is detected from the two-equation tangency
system (the tangent line normal at one parameter annihilating position
and velocity at the other), Newton-refined from grid seeds and filtered
by the defining conditions: genuine tangency at both ends, the arc not
collapsed onto the chord, and the curve locally on the same side of the
chord at both endpoints.  Replacing the arc by the chord yields the
reduction, a piecewise evaluator on which inflections are counted
topologically (crossing tangent lines), since the determinant criterion
needs two derivatives the junctions do not have.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circle import Arc, TWO_PI, canonical, circle_dist, forward_gap
from .errors import DegenerateChord, LineCurve, SelfIntersection
from .sphere import (
    EPS_NORM,
    ProjectiveCurve,
    admissible_normal_arc,
    normal_direction,
    true_inflections,
)

NEWTON_RESIDUAL = 1e-11
SEED_THRESHOLD = 1e-2
DEDUPE_TOL = 1e-6
OFF_CHORD_MIN = 1e-7


@dataclass(frozen=True)
class Chord:
    """Great-circle segment between two curve points."""

    a: float
    b: float
    pa: np.ndarray
    pb: np.ndarray
    normal: np.ndarray  # unit normal of the great circle through pa, pb
    long_way: bool = False

    @property
    def turn(self) -> float:
        """Signed rotation angle from pa to pb about the normal."""
        ang = math.atan2(float(np.dot(self.normal, np.cross(self.pa, self.pb))),
                         float(np.dot(self.pa, self.pb)))
        if self.long_way:
            ang -= math.copysign(TWO_PI, ang)
        return ang

    def point(self, frac: float) -> np.ndarray:
        """Point at the given fraction of the way from pa to pb."""
        ang = self.turn * frac
        axis_part = np.cross(self.normal, self.pa)
        return self.pa * math.cos(ang) + axis_part * math.sin(ang)

    def position_of(self, u: np.ndarray) -> float:
        """Fraction along the chord of a point assumed to lie on it."""
        ang = math.atan2(float(np.dot(self.normal, np.cross(self.pa, u))),
                         float(np.dot(self.pa, u)))
        return ang / self.turn


def chord(curve: ProjectiveCurve, a: float, b: float) -> Chord:
    """The chord between two curve parameters, choosing the segment that
    stays inside one affine chart (tested with a transversal line at a
    point of the complementary arc)."""
    pa, pb = curve.lift(a), curve.lift(b)
    cr = np.cross(pa, pb)
    ncr = float(np.linalg.norm(cr))
    if ncr < EPS_NORM:
        raise DegenerateChord(f"curve points at {a} and {b} are (anti)aligned")
    normal = cr / ncr
    c = canonical(b + 0.5 * forward_gap(b, a + math.pi))
    arc, frame = admissible_normal_arc(curve, c, n_theta=128, n_s=256)
    long_way = False
    if arc is not None:
        n_c = normal_direction(frame, arc.midpoint)
        x = np.cross(normal, n_c)
        nx = float(np.linalg.norm(x))
        if nx > EPS_NORM:
            x /= nx
            probe = Chord(a, b, pa, pb, normal)
            for cand in (x, -x):
                frac = probe.position_of(cand)
                if 1e-9 < frac < 1.0 - 1e-9 and \
                        abs(float(np.dot(cand, normal))) < 1e-9:
                    long_way = True
                    break
    return Chord(a, b, pa, pb, normal, long_way)


@dataclass(frozen=True)
class DoubleTangentInterval:
    a: float  # in [0, pi)
    b: float  # in (a, a + pi)
    chord: Chord | None = None  # None for support-function tangents

    @property
    def arc(self) -> Arc:
        return Arc(canonical(self.a, math.pi), self.b - self.a, math.pi)


class ReducedCurve:
    """The base curve with one parameter interval replaced by its chord,
    extended antiperiodically; continuous and tangent at the junctions."""

    def __init__(self, base: ProjectiveCurve, a: float, b: float,
                 check_simple: bool = True):
        self.base = base
        self.a = canonical(a)
        self.gap = forward_gap(a, b)
        if not 0.0 < self.gap < math.pi:
            raise ValueError("replaced interval must be shorter than a half period")
        self.chord = chord(base, self.a, canonical(b))
        if check_simple:
            self._assert_simple()

    def unit(self, t: float) -> np.ndarray:
        off = forward_gap(self.a, t)
        if off <= self.gap:
            return self.chord.point(off / self.gap)
        if off - math.pi <= self.gap and off >= math.pi:
            return -self.chord.point((off - math.pi) / self.gap)
        return self.base.lift(t)

    def unit_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        off = np.mod(ts - self.a, TWO_PI)
        out = np.empty(ts.shape + (3,))
        on1 = off <= self.gap
        on2 = (off >= math.pi) & (off - math.pi <= self.gap)
        rest = ~(on1 | on2)
        if np.any(rest):
            out[rest] = self.base.lift_many(ts[rest])
        for mask, sign, shift in ((on1, 1.0, 0.0), (on2, -1.0, math.pi)):
            if np.any(mask):
                fracs = (off[mask] - shift) / self.gap
                pts = np.stack([self.chord.point(float(f)) for f in fracs])
                out[mask] = sign * pts
        return out

    def _assert_simple(self, n: int = 512, sep: float = 0.05,
                       min_dist: float = 1e-4):
        ts = np.linspace(0.0, math.pi, n, endpoint=False)
        U = self.unit_many(ts)
        dots = np.abs(U @ U.T)
        close = dots > math.cos(min_dist)
        idx = np.arange(n)
        param_sep = np.minimum(np.abs(idx[:, None] - idx[None, :]),
                               n - np.abs(idx[:, None] - idx[None, :]))
        bad = close & (param_sep > int(sep / (math.pi / n)))
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            raise SelfIntersection(
                f"reduced curve nearly meets itself at t={ts[i]:.4f}, {ts[j]:.4f}")


def reduction(curve: ProjectiveCurve, a: float, b: float,
              check_simple: bool = True) -> ReducedCurve:
    """Replace the arc over [a, b] by its chord."""
    return ReducedCurve(curve, a, b, check_simple=check_simple)


# -- topological inflection counting ---------------------------------------


def count_inflections_topological(unit_many, n_grid: int = 2048,
                                  escape: float = 1e-7,
                                  fd_step: float = 1e-5) -> tuple[int, list[float]]:
    """Independent true inflections of a piecewise-smooth antiperiodic
    evaluator, by crossing tests of tangent great circles.

    At each sample the side function of the tangent circle is walked
    outward until it escapes the tolerance band; opposite escape signs
    mean the tangent circle crosses there.  Consecutive crossing samples
    (e.g. a whole chord segment of a reduction) group into one
    independent inflection.
    """
    ts = np.linspace(0.0, math.pi, n_grid, endpoint=False)
    U = unit_many(ts)
    T = unit_many(ts + fd_step) - unit_many(ts - fd_step)
    T /= np.linalg.norm(T, axis=1)[:, None]
    N = np.cross(U, T)
    nn = np.linalg.norm(N, axis=1)
    if np.min(nn) < EPS_NORM:
        raise LineCurve("degenerate tangent frame")
    N /= nn[:, None]
    V = np.concatenate([U, -U], axis=0)  # full-circle samples
    m = 2 * n_grid

    crossing = np.zeros(n_grid, dtype=bool)
    for j in range(n_grid):
        sigma = V @ N[j]
        signs = []
        for direction in (1, -1):
            k = j
            sgn = 0.0
            for _ in range(m // 2):
                k = (k + direction) % m
                v = sigma[k]
                if abs(v) > escape:
                    sgn = math.copysign(1.0, v)
                    break
            signs.append(sgn)
        crossing[j] = signs[0] != 0.0 and signs[1] != 0.0 and signs[0] != signs[1]

    count = 0
    params = []
    j = 0
    ext = np.concatenate([crossing, crossing])
    while j < n_grid:
        if ext[j] and not ext[(j - 1) % n_grid]:
            k = j
            while ext[k]:
                k += 1
            count += 1
            params.append(float(ts[((j + k - 1) // 2) % n_grid]))
            j = k
        else:
            j += 1
    if crossing.all() and n_grid:
        count, params = 1, [0.0]
    return count, params


def anti_convexity_grid_test(unit_many, n_base: int = 128, n_theta: int = 128,
                     n_arc: int = 1024, fd_step: float = 1e-5) -> bool:
    """Anti-convexity on a grid: at every base sample some great circle
    through the point and its antipode keeps the forward open arc
    strictly on one side."""
    for t in np.linspace(0.0, math.pi, n_base, endpoint=False):
        u = unit_many(np.array([t]))[0]
        tv = unit_many(np.array([t + fd_step]))[0] - unit_many(np.array([t - fd_step]))[0]
        tv = tv - u * float(np.dot(u, tv))
        tv /= np.linalg.norm(tv)
        nu = np.cross(u, tv)
        arc_ts = t + np.linspace(1e-3, math.pi - 1e-3, n_arc)
        P = unit_many(arc_ts)
        A, B = P @ nu, P @ tv
        thetas = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
        M = np.cos(thetas)[:, None] * A[None, :] + np.sin(thetas)[:, None] * B[None, :]
        if not np.any(np.max(M, axis=1) < 0.0):
            return False
    return True


# -- double tangent detection ----------------------------------------------


@dataclass
class DetectionResult:
    intervals: list[DoubleTangentInterval]
    dropped: int = 0  # diverged or filtered-out Newton runs


def _newton_tangency(curve: ProjectiveCurve, a: float, b: float,
                     max_steps: int = 40):
    """Newton on (n(a).F(b), n(a).F'(b)) from a seed; returns (a, b) or None."""
    F, F1, F2 = curve.F, curve.F1, curve.F2
    for _ in range(max_steps):
        fa, f1a, f2a = F(a), F1(a), F2(a)
        n = np.cross(fa, f1a)
        dn = np.cross(fa, f2a)
        fb, f1b, f2b = F(b), F1(b), F2(b)
        r1, r2 = float(np.dot(n, fb)), float(np.dot(n, f1b))
        scale = float(np.linalg.norm(n) * np.linalg.norm(fb))
        if (abs(r1) + abs(r2)) / scale < NEWTON_RESIDUAL:
            return a, b
        J = np.array([[float(np.dot(dn, fb)), r2],
                      [float(np.dot(dn, f1b)), float(np.dot(n, f2b))]])
        try:
            step = np.linalg.solve(J, [r1, r2])
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)) or np.max(np.abs(step)) > 0.5:
            return None
        a -= float(step[0])
        b -= float(step[1])
    return None


def _side_sign(curve: ProjectiveCurve, normal: np.ndarray, t: float,
               direction: float) -> float:
    """Sign of the chord-circle side function just beyond t."""
    for h in (1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2):
        v = float(np.dot(normal, curve.lift(t + direction * h)))
        if abs(v) > 1e-9:
            return math.copysign(1.0, v)
    return 0.0


def _passes_filters(curve: ProjectiveCurve, a: float, b: float) -> Chord | None:
    """Conditions beyond tangency: some arc point off the chord, the arc
    locally on the same side at both ends, and coherent tangent
    directions along the chord."""
    try:
        ch = chord(curve, a, b)
    except DegenerateChord:
        return None
    n = ch.normal
    ss = a + np.linspace(0.0, 1.0, 257) * (b - a)
    off = np.max(np.abs(curve.lift_many(ss) @ n))
    if off <= OFF_CHORD_MIN:
        return None
    sa = _side_sign(curve, n, a, -1.0)
    sb = _side_sign(curve, n, b, +1.0)
    if sa == 0.0 or sa != sb:
        return None
    da = np.cross(n, curve.lift(a))
    db = np.cross(n, curve.lift(b))
    ta = float(np.dot(da, curve.F1(a)))
    tb = float(np.dot(db, curve.F1(b)))
    if ta * tb <= 0.0:
        return None
    return ch


def detect_double_tangents(curve: ProjectiveCurve, n_a: int = 512,
                           n_b: int = 512, margin: float = 0.02) -> DetectionResult:
    """All double tangent intervals on the projective line.

    A residual scan over the (base, offset) grid seeds two-variable
    Newton runs; converged tangency pairs are deduplicated and pushed
    through the defining filters.
    """
    agrid = np.linspace(0.0, math.pi, n_a, endpoint=False)
    bgrid = curve.grid
    FA = curve.F.eval_many(agrid)
    F1A = curve.F1.eval_many(agrid)
    N = np.cross(FA, F1A)
    N /= np.linalg.norm(N, axis=1)[:, None]
    UB = curve.units
    TB = curve.F1.eval_many(bgrid)
    TB -= UB * np.sum(UB * TB, axis=1)[:, None]
    TB /= np.linalg.norm(TB, axis=1)[:, None]
    R = np.abs(N @ UB.T) + np.abs(N @ TB.T)

    nb = len(bgrid)
    offsets = np.mod(bgrid[None, :] - agrid[:, None], TWO_PI)
    R[(offsets < margin) | (offsets > math.pi - margin)] = np.inf

    # row-wise minima keep seeds inside diagonal residual valleys that
    # strict grid minima can straddle
    seeds = []
    low = np.argwhere(R < SEED_THRESHOLD)
    for i, k in low:
        if R[i, k] <= R[i, (k - 1) % nb] and R[i, k] <= R[i, (k + 1) % nb]:
            seeds.append((float(agrid[i]), float(bgrid[k])))

    found: list[tuple[float, float]] = []
    dropped = 0
    for a0, b0 in seeds:
        sol = _newton_tangency(curve, a0, b0)
        if sol is None:
            dropped += 1
            continue
        a, b = sol
        gap = forward_gap(a, b)
        if not margin * 0.5 < gap < math.pi - margin * 0.5:
            dropped += 1
            continue
        a = canonical(a, math.pi)
        if not any(circle_dist(a, fa, math.pi) < DEDUPE_TOL
                   and abs(gap - fg) < DEDUPE_TOL for fa, fg in found):
            found.append((a, gap))

    intervals = []
    for a, gap in sorted(found):
        ch = _passes_filters(curve, a, a + gap)
        if ch is None:
            dropped += 1
            continue
        intervals.append(DoubleTangentInterval(a, a + gap, ch))
    return DetectionResult(intervals, dropped)


# -- independent (laminar) families -----------------------------------------


def _compatible(x: Arc, y: Arc, tol: float = 1e-9) -> bool:
    """Disjoint, or the closure of one inside the other."""
    period = x.period

    def inside(inner: Arc, outer: Arc) -> bool:
        off = forward_gap(outer.start, inner.start, period)
        return off >= -tol and off + inner.length <= outer.length + tol

    if inside(x, y) or inside(y, x):
        return True
    gap_xy = forward_gap(x.end, y.start, period)
    gap_yx = forward_gap(y.end, x.start, period)
    return gap_xy + gap_yx <= period - x.length - y.length + tol \
        and gap_xy > tol and gap_yx > tol


def maximal_independent_family(intervals: list[DoubleTangentInterval],
                               max_exact: int = 20) -> list[DoubleTangentInterval]:
    """A maximum-cardinality pairwise-compatible subfamily (exact for
    small inputs, greedy beyond); ties prefer shorter intervals."""
    n = len(intervals)
    if n == 0:
        return []
    arcs = [iv.arc for iv in intervals]
    comp = [[_compatible(arcs[i], arcs[j]) for j in range(n)] for i in range(n)]
    order = sorted(range(n), key=lambda i: arcs[i].length)
    if n <= max_exact:
        best: list[int] = []

        def grow(chosen: list[int], rest: list[int]):
            nonlocal best
            if len(chosen) + len(rest) <= len(best):
                return
            if not rest:
                if len(chosen) > len(best):
                    best = chosen[:]
                return
            head, tail = rest[0], rest[1:]
            grow(chosen + [head], [r for r in tail if comp[head][r]])
            grow(chosen, tail)

        grow([], order)
        return [intervals[i] for i in best]
    return [intervals[i] for i in greedy_maximal_indices(comp, order)]


def greedy_maximal_indices(comp: list[list[bool]], order: list[int]) -> list[int]:
    chosen: list[int] = []
    for i in order:
        if all(comp[i][j] for j in chosen):
            chosen.append(i)
    return chosen


def greedy_maximal_family(intervals: list[DoubleTangentInterval],
                          start: int = 0) -> list[DoubleTangentInterval]:
    """Inclusion-maximal compatible family grown from a rotated order;
    by the census identity its size must match the optimum."""
    n = len(intervals)
    arcs = [iv.arc for iv in intervals]
    comp = [[_compatible(arcs[i], arcs[j]) for j in range(n)] for i in range(n)]
    order = [(start + k) % n for k in range(n)]
    return [intervals[i] for i in greedy_maximal_indices(comp, order)]


# -- the census --------------------------------------------------------------


@dataclass
class CensusReport:
    kind: str
    i: int
    delta: int
    identity_holds: bool
    inflection_points: list[float]
    clean_points: list[float]
    double_tangents: list[tuple[float, float]]
    warnings: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "i": self.i,
            "delta": self.delta,
            "identity_holds": self.identity_holds,
            "inflection_points": self.inflection_points,
            "clean_points": self.clean_points,
            "double_tangents": [[a, b] for a, b in self.double_tangents],
            "warnings": self.warnings,
        }


def census(curve: ProjectiveCurve, clean_points: list[float] | None = None) -> CensusReport:
    """Counts of independent inflections and double tangents with the
    identity check i - 2*delta = 3."""
    rep = true_inflections(curve)
    detection = detect_double_tangents(curve)
    family = maximal_independent_family(detection.intervals)
    i, delta = rep.count, len(family)
    warnings = {}
    if detection.dropped:
        warnings["dropped_candidates"] = detection.dropped
    cross = greedy_maximal_family(detection.intervals,
                                  start=len(detection.intervals) // 2) \
        if detection.intervals else []
    if len(cross) != delta:
        warnings["greedy_family_mismatch"] = len(cross)
    return CensusReport(
        kind="sphere-census",
        i=i,
        delta=delta,
        identity_holds=(i - 2 * delta == 3),
        inflection_points=[e.parameter for e in rep.entries if e.crossing],
        clean_points=list(clean_points or []),
        double_tangents=[(iv.a, iv.b) for iv in family],
        warnings=warnings,
    )
