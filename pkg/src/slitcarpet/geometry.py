"""Slit families in the unit square, with exact rational coordinates.

A size sequence r = (r_0, r_1, ...) with r_i in (0,1) determines, for every
dyadic square of generation g, a closed vertical slit of length r_g * 2**-g
centered at the center of the square.  This module constructs those slit
families, measures relative distances and the uniform relative separation of
a family (including against the outer square), and rounds arbitrary size
sequences down to dyadic ones so the exact collar certificates apply.

Everything here is exact: coordinates are Fractions, distances are compared
through their squares, and separation minima are certified rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from .dyadic import (
    DyadicError,
    frac,
    is_dyadic,
    pow2_floor,
    rational_to_json,
    sqrt_exact,
)


class GeometryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# size sequences
# ---------------------------------------------------------------------------

_CONSTANT = "constant"
_GEOMETRIC = "geometric"
_EXPLICIT = "explicit"


@dataclass(frozen=True)
class SizeSequence:
    """Relative slit sizes r_i in (0,1), optionally with a closed-form tail.

    Kinds:
      constant   r_i = c for all i
      geometric  r_i = a * q**i for all i
      explicit   finite list; undefined beyond it

    ``floor_dyadic`` applies a power-of-two floor to every value, giving the
    rounded-down dyadic companion sequence r'_i <= r_i < 2 r'_i.
    """

    kind: str
    params: Tuple[Fraction, ...]
    floor_dyadic: bool = False

    # -- constructors ------------------------------------------------------
    @staticmethod
    def constant(r) -> "SizeSequence":
        r = frac(r)
        if not 0 < r < 1:
            raise GeometryError(f"size value {r} outside (0,1)")
        return SizeSequence(_CONSTANT, (r,))

    @staticmethod
    def geometric(a, q) -> "SizeSequence":
        a, q = frac(a), frac(q)
        if not 0 < a < 1 or not 0 < q < 1:
            raise GeometryError("geometric sequence needs a, q in (0,1)")
        return SizeSequence(_GEOMETRIC, (a, q))

    @staticmethod
    def explicit(values: Iterable) -> "SizeSequence":
        vals = tuple(frac(v) for v in values)
        if not vals:
            raise GeometryError("explicit sequence must be nonempty")
        for v in vals:
            if not 0 < v < 1:
                raise GeometryError(f"size value {v} outside (0,1)")
        return SizeSequence(_EXPLICIT, vals)

    # -- access ------------------------------------------------------------
    def _raw(self, i: int) -> Fraction:
        if i < 0:
            raise GeometryError("sequence index must be nonnegative")
        if self.kind == _CONSTANT:
            return self.params[0]
        if self.kind == _GEOMETRIC:
            a, q = self.params
            return a * q**i
        if i >= len(self.params):
            raise GeometryError(f"r_{i} undefined for explicit sequence of length {len(self.params)}")
        return self.params[i]

    def value(self, i: int) -> Fraction:
        v = self._raw(i)
        return pow2_floor(v) if self.floor_dyadic else v

    def defined_through(self, n: int) -> bool:
        if self.kind == _EXPLICIT:
            return n < len(self.params)
        return True

    def sup(self) -> Fraction:
        """Exact supremum of the (possibly floored) values over all indices."""
        if self.kind == _EXPLICIT:
            return max(self.value(i) for i in range(len(self.params)))
        # constant and geometric (q < 1) attain their sup at i = 0
        return self.value(0)

    def is_dyadic_through(self, n: int) -> bool:
        return all(is_dyadic(self.value(i)) for i in range(n + 1))

    def rounded(self) -> "SizeSequence":
        """Companion sequence with every value floored to a power of two."""
        return SizeSequence(self.kind, self.params, floor_dyadic=True)

    def tail_sum_squares(self, start: int) -> Optional[Fraction]:
        """sum_{i >= start} r_i**2 in closed form.

        Returns None when the sum diverges, and raises for explicit sequences
        (no tail descriptor).
        """
        if self.kind == _CONSTANT:
            return None  # constant tails are never square-summable
        if self.kind == _EXPLICIT:
            raise GeometryError("explicit sequence has no tail descriptor")
        a, q = self.params
        if self.floor_dyadic:
            # closed under flooring only when the ratio is itself a power of two
            if not (is_dyadic(q) and q.numerator == 1):
                raise GeometryError("no closed-form tail for floored non-dyadic ratio")
            a = pow2_floor(a)
        q2 = q * q
        return a * a * q2**start / (1 - q2)

    def label(self) -> str:
        if self.kind == _CONSTANT:
            body = f"const:{self.params[0]}"
        elif self.kind == _GEOMETRIC:
            body = f"geom:{self.params[0]}*{self.params[1]}^i"
        else:
            body = "explicit:" + ",".join(str(v) for v in self.params)
        return body + ("|floor2" if self.floor_dyadic else "")


# ---------------------------------------------------------------------------
# slits and slit families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Slit:
    """Closed vertical segment {x} x [y_low, y_high] in the unit square."""

    generation: int
    i: int
    j: int
    x: Fraction
    y_low: Fraction
    y_high: Fraction

    @property
    def length(self) -> Fraction:
        return self.y_high - self.y_low

    def as_json(self) -> dict:
        return {
            "gen": self.generation,
            "i": self.i,
            "j": self.j,
            "x": rational_to_json(self.x),
            "y_low": rational_to_json(self.y_low),
            "y_high": rational_to_json(self.y_high),
        }


def slit_of_square(gen: int, i: int, j: int, r: SizeSequence) -> Slit:
    """The slit of the generation-``gen`` dyadic square with indices (i, j)."""
    if gen < 0:
        raise GeometryError("generation must be nonnegative")
    side = 1 << gen
    if not (0 <= i < side and 0 <= j < side):
        raise GeometryError(f"square indices ({i},{j}) out of range for generation {gen}")
    if not r.defined_through(gen):
        raise GeometryError(f"r_{gen} undefined")
    rg = r.value(gen)
    x = Fraction(2 * i + 1, 2 << gen)
    cy = Fraction(2 * j + 1, 2 << gen)
    half = rg / (2 << gen)
    return Slit(gen, i, j, x, cy - half, cy + half)


@dataclass(frozen=True)
class SlitSet:
    """All slits of generation <= max_generation (empty when max_generation = -1)."""

    slits: Tuple[Slit, ...]
    max_generation: int

    def __len__(self) -> int:
        return len(self.slits)

    def __iter__(self):
        return iter(self.slits)

    def as_json(self) -> list:
        return [s.as_json() for s in self.slits]


def slits_up_to(n: int, r: SizeSequence) -> SlitSet:
    """The family of all slits of generation <= n; n = -1 gives the empty family."""
    if n < -1:
        raise GeometryError("generation bound must be >= -1")
    slits: List[Slit] = []
    for g in range(n + 1):
        side = 1 << g
        for i in range(side):
            for j in range(side):
                slits.append(slit_of_square(g, i, j, r))
    return SlitSet(tuple(slits), n)


# ---------------------------------------------------------------------------
# relative distance and separation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    """Closed straight segment with rational endpoints."""

    ax: Fraction
    ay: Fraction
    bx: Fraction
    by: Fraction

    @staticmethod
    def of_slit(s: Slit) -> "Segment":
        return Segment(s.x, s.y_low, s.x, s.y_high)

    def diameter_squared(self) -> Fraction:
        dx = self.bx - self.ax
        dy = self.by - self.ay
        return dx * dx + dy * dy


@dataclass(frozen=True)
class RectFrame:
    """Boundary of an axis-aligned rectangle (four sides, as a point set)."""

    x0: Fraction
    y0: Fraction
    x1: Fraction
    y1: Fraction

    def sides(self) -> Tuple[Segment, ...]:
        return (
            Segment(self.x0, self.y0, self.x1, self.y0),
            Segment(self.x0, self.y1, self.x1, self.y1),
            Segment(self.x0, self.y0, self.x0, self.y1),
            Segment(self.x1, self.y0, self.x1, self.y1),
        )

    def diameter_squared(self) -> Fraction:
        dx = self.x1 - self.x0
        dy = self.y1 - self.y0
        return dx * dx + dy * dy

    def contains_segment(self, seg: Segment) -> bool:
        return (
            self.x0 <= seg.ax <= self.x1
            and self.x0 <= seg.bx <= self.x1
            and self.y0 <= seg.ay <= self.y1
            and self.y0 <= seg.by <= self.y1
        )


UNIT_BOUNDARY = RectFrame(Fraction(0), Fraction(0), Fraction(1), Fraction(1))


def _point_segment_dist2(px: Fraction, py: Fraction, seg: Segment) -> Fraction:
    dx = seg.bx - seg.ax
    dy = seg.by - seg.ay
    denom = dx * dx + dy * dy
    if denom == 0:
        ex, ey = px - seg.ax, py - seg.ay
        return ex * ex + ey * ey
    t = ((px - seg.ax) * dx + (py - seg.ay) * dy) / denom
    if t < 0:
        t = Fraction(0)
    elif t > 1:
        t = Fraction(1)
    cx = seg.ax + t * dx
    cy = seg.ay + t * dy
    ex, ey = px - cx, py - cy
    return ex * ex + ey * ey


def _orient(ax, ay, bx, by, cx, cy) -> int:
    v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (v > 0) - (v < 0)


def _segments_intersect(s: Segment, t: Segment) -> bool:
    o1 = _orient(s.ax, s.ay, s.bx, s.by, t.ax, t.ay)
    o2 = _orient(s.ax, s.ay, s.bx, s.by, t.bx, t.by)
    o3 = _orient(t.ax, t.ay, t.bx, t.by, s.ax, s.ay)
    o4 = _orient(t.ax, t.ay, t.bx, t.by, s.bx, s.by)
    if o1 != o2 and o3 != o4:
        return True
    # collinear / touching cases: intersect iff some endpoint realises distance 0
    for px, py, seg in (
        (t.ax, t.ay, s),
        (t.bx, t.by, s),
        (s.ax, s.ay, t),
        (s.bx, s.by, t),
    ):
        if _point_segment_dist2(px, py, seg) == 0:
            return True
    return False


def _segment_segment_dist2(s: Segment, t: Segment) -> Fraction:
    if _segments_intersect(s, t):
        return Fraction(0)
    return min(
        _point_segment_dist2(t.ax, t.ay, s),
        _point_segment_dist2(t.bx, t.by, s),
        _point_segment_dist2(s.ax, s.ay, t),
        _point_segment_dist2(s.bx, s.by, t),
    )


def _as_segments(obj) -> Tuple[Tuple[Segment, ...], Fraction]:
    """Normalise an input to (segments, diameter_squared)."""
    if isinstance(obj, Slit):
        seg = Segment.of_slit(obj)
        return (seg,), seg.diameter_squared()
    if isinstance(obj, Segment):
        return (obj,), obj.diameter_squared()
    if isinstance(obj, RectFrame):
        return obj.sides(), obj.diameter_squared()
    raise GeometryError(f"unsupported geometry {type(obj)!r}")


@dataclass(frozen=True)
class RelativeDistance:
    """Relative distance dist(A,B)/min(diam A, diam B), certified by its square.

    ``squared`` is always exact; ``value`` is set only when the relative
    distance itself is rational.
    """

    squared: Fraction
    value: Optional[Fraction]

    def at_least(self, bound: Fraction) -> bool:
        """Exact comparison  self >= bound  for a nonnegative rational bound."""
        return self.squared >= bound * bound

    def __float__(self) -> float:
        if self.value is not None:
            return float(self.value)
        return float(self.squared) ** 0.5


def relative_distance(a, b) -> RelativeDistance:
    """Delta(A, B) = dist(A,B) / min(diam A, diam B), exactly.

    Inputs may be slits, segments, or rectangle frames.  Degenerate (zero
    diameter) inputs and intersecting inputs are rejected.
    """
    segs_a, diam2_a = _as_segments(a)
    segs_b, diam2_b = _as_segments(b)
    if diam2_a == 0 or diam2_b == 0:
        raise GeometryError("relative distance needs positive diameters")
    # distance from a segment to a containing frame is realised against the sides
    dist2 = min(_segment_segment_dist2(s, t) for s in segs_a for t in segs_b)
    if dist2 == 0:
        raise GeometryError("sets intersect; relative distance undefined")
    d2 = dist2 / min(diam2_a, diam2_b)
    return RelativeDistance(d2, sqrt_exact(d2))


def _separation_bruteforce(
    slits: Sequence[Slit], include_outer: bool
) -> Tuple[RelativeDistance, Tuple[int, int]]:
    best: Optional[RelativeDistance] = None
    best_pair = (-1, -1)
    for i in range(len(slits)):
        for j in range(i + 1, len(slits)):
            rd = relative_distance(slits[i], slits[j])
            if best is None or rd.squared < best.squared:
                best, best_pair = rd, (i, j)
    if include_outer:
        for i, s in enumerate(slits):
            rd = relative_distance(s, UNIT_BOUNDARY)
            if best is None or rd.squared < best.squared:
                best, best_pair = rd, (i, -1)
    assert best is not None
    return best, best_pair


def min_relative_separation(
    slit_set: SlitSet, include_outer: bool = True
) -> RelativeDistance:
    """Exact minimum of the relative distance over all pairs of the family.

    With ``include_outer`` the outer square boundary joins the family.  The
    scan over slit pairs runs on scaled integers (a compiled kernel when
    available); the winning pair is re-evaluated in exact rationals.
    """
    slits = list(slit_set.slits)
    if not slits:
        raise GeometryError("empty slit family")
    if len(slits) == 1:
        if include_outer:
            return relative_distance(slits[0], UNIT_BOUNDARY)
        raise GeometryError("a single slit has no pair")

    # common power-of-two scale for all coordinates
    scale_exp = 0
    for s in slits:
        for q in (s.x, s.y_low, s.y_high):
            d = q.denominator
            if d & (d - 1) != 0:
                scale_exp = -1
                break
            scale_exp = max(scale_exp, d.bit_length() - 1)
        if scale_exp < 0:
            break

    if 0 <= scale_exp <= 15:
        import numpy as np

        from . import kernels

        scale = 1 << scale_exp
        xs = np.array([int(s.x * scale) for s in slits], dtype=np.int64)
        y0 = np.array([int(s.y_low * scale) for s in slits], dtype=np.int64)
        y1 = np.array([int(s.y_high * scale) for s in slits], dtype=np.int64)
        bi, bj = kernels.min_relsep_pair(xs, y0, y1)
        best, _ = _separation_bruteforce([slits[bi], slits[bj]], include_outer=False)
        best_pair = (bi, bj)
    else:
        best, best_pair = _separation_bruteforce(slits, include_outer=False)

    if include_outer:
        # closest slit to the boundary is the one minimising its margin
        for i, s in enumerate(slits):
            rd = relative_distance(s, UNIT_BOUNDARY)
            if rd.squared < best.squared:
                best, best_pair = rd, (i, -1)
    return best


def separation_lower_bound(r: SizeSequence) -> Fraction:
    """min(1/2, 1 - sup r_i): the guaranteed uniform relative separation."""
    return min(Fraction(1, 2), 1 - r.sup())


# ---------------------------------------------------------------------------
# rounding to dyadic
# ---------------------------------------------------------------------------


def round_to_dyadic(r: SizeSequence, eps) -> Tuple[SizeSequence, Fraction]:
    """Floor every r_i and eps to powers of two.

    The rounded slits are subsets of the originals (r'_i <= r_i), which is what
    makes certificates for the rounded family transfer to the original one.
    """
    eps = frac(eps)
    if not 0 < eps < 1:
        raise DyadicError(f"epsilon {eps} outside (0,1)")
    return r.rounded(), pow2_floor(eps)
