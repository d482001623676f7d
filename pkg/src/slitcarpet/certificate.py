"""Exact collar certificates bounding the transboundary 2-modulus.

For a dyadic size sequence (every r_i a power of 1/2) and a dyadic width
eps = 2**-m, each slit s of length l owns a collar: the half-open rectangle
(x, x + eps*l) x [y_low, y_high] sitting to its right.  Collars of two slits
are either disjoint or nested, so a greedy sweep through the slits in order
of non-increasing length selects a maximal disjoint collar family.  The
certificate density is 1 off the collars' middle bands, 0 on them, and each
selected slit carries the weight eps*l; its total mass then bounds the
modulus of the family of curves joining the vertical edges of the unit
square from above:

    mass <= prod_i (1 - eps * r_i**2) + 3 * eps        (dyadic sequences)
    mass <= prod_i (1 - eps * r_i**2 / 8) + 3 * eps    (after dyadic rounding)

Everything in this module is exact rational arithmetic; admissibility of the
density along concrete polylines is certified through rational brackets of
segment lengths.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .dyadic import DyadicError, SqrtSum, dyadic_parts, frac, is_dyadic
from .geometry import GeometryError, SizeSequence, Slit, SlitSet, round_to_dyadic, slits_up_to


class CertificateError(ValueError):
    pass


# ---------------------------------------------------------------------------
# collars
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Collar:
    """Half-open collar (x0, x1) x [y0, y1] of a slit, with buffers and band.

    The collar is open in x and closed in y, so a slit touching the right
    edge of another collar does not intersect it.  The top and bottom buffer
    squares have side x1 - x0 = eps * length; the omitted middle band is the
    open rectangle between them.
    """

    slit_index: int
    slit: Slit
    x0: Fraction
    x1: Fraction
    y0: Fraction
    y1: Fraction

    @property
    def width(self) -> Fraction:
        return self.x1 - self.x0

    @property
    def area(self) -> Fraction:
        return self.width * (self.y1 - self.y0)

    @property
    def buffer_area(self) -> Fraction:
        return 2 * self.width * self.width

    def buffers(self) -> Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...]]:
        w = self.width
        return (
            (self.x0, self.y0, self.x1, self.y0 + w),
            (self.x0, self.y1 - w, self.x1, self.y1),
        )

    def omitted(self) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        """Open rectangle (x0, x1) x (y0 + w, y1 - w)."""
        w = self.width
        return (self.x0, self.x1, self.y0 + w, self.y1 - w)

    def intersects(self, other: "Collar") -> bool:
        """Set intersection of half-open collars: strict overlap in x,
        closed overlap in y."""
        return (
            self.x0 < other.x1
            and other.x0 < self.x1
            and self.y0 <= other.y1
            and other.y0 <= self.y1
        )

    def contains(self, other: "Collar") -> bool:
        return (
            self.x0 <= other.x0
            and other.x1 <= self.x1
            and self.y0 <= other.y0
            and other.y1 <= self.y1
        )


def _make_collar(index: int, slit: Slit, eps: Fraction) -> Collar:
    w = eps * slit.length
    return Collar(index, slit, slit.x, slit.x + w, slit.y_low, slit.y_high)


def _check_dyadic_inputs(slits: Iterable[Slit], eps: Fraction) -> int:
    if not (is_dyadic(eps) and eps.numerator == 1 and eps <= Fraction(1, 2)):
        raise CertificateError(f"collar width {eps} must be 2**-m with m >= 1")
    for s in slits:
        if not is_dyadic(s.length):
            raise CertificateError(
                f"slit length {s.length} is not dyadic; round the sequence first"
            )
    return dyadic_parts(eps)[1]


def enumeration_order(slits: Sequence[Slit]) -> List[int]:
    """Indices sorted by (length desc, generation asc, x asc, y_low asc).

    Greedy selection depends on the order among equal lengths only through
    this fixed tie-break.
    """
    return sorted(
        range(len(slits)),
        key=lambda k: (-slits[k].length, slits[k].generation, slits[k].x, slits[k].y_low),
    )


def select_collars(slit_set: SlitSet, eps) -> List[Collar]:
    """Greedy maximal disjoint collar family over the fixed enumeration.

    Dyadic lengths make collar closures unions of dyadic squares of one
    level per slit, so the blocked region is tracked as marked squares and
    each candidate needs only ancestor lookups.  Exactness is preserved;
    the quadratic rectangle scan in ``select_collars_bruteforce`` is the
    reference implementation.
    """
    eps = frac(eps)
    slits = list(slit_set.slits)
    m = _check_dyadic_inputs(slits, eps)
    order = enumeration_order(slits)

    selected: List[Collar] = []
    marked: Dict[int, set] = {}  # level N -> set of (ix, iy) blocked squares
    levels: List[int] = []
    for idx in order:
        s = slits[idx]
        num, exp = dyadic_parts(s.length)  # length = num / 2**exp, num odd
        if num != 1:
            raise CertificateError(f"slit length {s.length} not a power of 1/2")
        level = exp + m  # collar closure is a column of 2**m squares at this level
        g = s.generation
        blocked = False
        for n_level in levels:
            if n_level > g:
                continue
            shift = g - n_level
            ix = (2 * s.i + 1) << (g + 1 - n_level - 1) if n_level <= g else 0
            # ancestor square of the slit's dyadic square at n_level
            ax = s.i >> shift
            ay = s.j >> shift
            if (ax, ay) in marked[n_level]:
                blocked = True
                break
        if blocked:
            continue
        collar = _make_collar(idx, s, eps)
        selected.append(collar)
        # mark the 2**m squares of the collar closure at its level
        scale = 1 << level
        cx = int(collar.x0 * scale)
        ry0 = int(collar.y0 * scale)
        ry1 = int(collar.y1 * scale)
        cells = marked.setdefault(level, set())
        if level not in levels:
            levels.append(level)
            levels.sort()
        for ry in range(ry0, ry1):
            cells.add((cx, ry))
    return selected


def select_collars_bruteforce(slit_set: SlitSet, eps) -> List[Collar]:
    """Reference greedy: exact pairwise rectangle-intersection scan."""
    eps = frac(eps)
    slits = list(slit_set.slits)
    _check_dyadic_inputs(slits, eps)
    selected: List[Collar] = []
    for idx in enumeration_order(slits):
        collar = _make_collar(idx, slits[idx], eps)
        if not any(collar.intersects(v) for v in selected):
            selected.append(collar)
    return selected


def containment_dichotomy(slit_set: SlitSet, eps, selected: Sequence[Collar]) -> bool:
    """Every unselected collar lies inside exactly one selected collar (exact)."""
    eps = frac(eps)
    chosen = {c.slit_index for c in selected}
    for idx, s in enumerate(slit_set.slits):
        if idx in chosen:
            continue
        collar = _make_collar(idx, s, eps)
        owners = [v for v in selected if v.contains(collar)]
        if len(owners) != 1:
            return False
    return True


# ---------------------------------------------------------------------------
# the mass distribution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MassDistribution:
    """Certificate density for curves joining the vertical edges of the square.

    Density 1 on the residual and buffer regions, 0 on the omitted bands;
    each selected slit carries the weight eps * length, all others weight 0.
    All areas are exact rationals.
    """

    epsilon: Fraction
    generation: int
    slit_set: SlitSet
    selected: Tuple[Collar, ...]
    weights: Dict[int, Fraction]  # slit index -> positive weight (selected only)
    residual_area: Fraction
    buffer_area: Fraction

    def weight(self, slit_index: int) -> Fraction:
        return self.weights.get(slit_index, Fraction(0))

    @property
    def selected_count(self) -> int:
        return len(self.selected)

    def mass(self) -> Fraction:
        """A = residual + (3/2) * buffer; the closed form is re-verified."""
        value = self.residual_area + Fraction(3, 2) * self.buffer_area
        closed = 1 - (1 - 3 * self.epsilon) * sum(
            (self.epsilon * v.slit.length**2 for v in self.selected), Fraction(0)
        )
        if value != closed:
            raise CertificateError(
                f"mass identity violated: {value} != {closed} "
                f"(eps={self.epsilon}, n={self.generation})"
            )
        return value


def build_mass_distribution(n: int, r: SizeSequence, eps) -> MassDistribution:
    """Certificate for the slits of generation <= n (n = -1 allowed: no slits)."""
    eps = frac(eps)
    slit_set = slits_up_to(n, r)
    if n >= 0 and not r.is_dyadic_through(n):
        raise CertificateError("size sequence is not dyadic; use round_to_dyadic")
    selected = select_collars(slit_set, eps) if len(slit_set) else []
    residual = Fraction(1) - sum((c.area for c in selected), Fraction(0))
    buffer_area = sum((c.buffer_area for c in selected), Fraction(0))
    weights = {c.slit_index: eps * c.slit.length for c in selected}
    for c in selected:
        if c.width <= 0:
            raise CertificateError("degenerate collar")
    return MassDistribution(
        epsilon=eps,
        generation=n,
        slit_set=slit_set,
        selected=tuple(selected),
        weights=weights,
        residual_area=residual,
        buffer_area=buffer_area,
    )


def mass(dist: MassDistribution) -> Fraction:
    return dist.mass()


# ---------------------------------------------------------------------------
# rho-length of polylines (admissibility witnesses)
# ---------------------------------------------------------------------------


def _open_interval_clip(
    a: Fraction, d: Fraction, lo: Fraction, hi: Fraction
) -> Optional[Tuple[Fraction, Fraction]]:
    """Parameter interval where a + t*d lies strictly inside (lo, hi)."""
    if d == 0:
        return (Fraction(0), Fraction(1)) if lo < a < hi else None
    t0 = (lo - a) / d
    t1 = (hi - a) / d
    if d < 0:
        t0, t1 = t1, t0
    t0 = max(t0, Fraction(0))
    t1 = min(t1, Fraction(1))
    if t0 >= t1:
        return None
    return t0, t1


def _segment_meets_slit(
    ax: Fraction, ay: Fraction, bx: Fraction, by: Fraction, s: Slit
) -> bool:
    dx = bx - ax
    if dx == 0:
        return ax == s.x and max(ay, by) >= s.y_low and min(ay, by) <= s.y_high
    t = (s.x - ax) / dx
    if t < 0 or t > 1:
        return False
    y = ay + t * (by - ay)
    return s.y_low <= y <= s.y_high


def rho_length(dist: MassDistribution, polyline: Sequence[Tuple]) -> SqrtSum:
    """Certified rho-length of a rational polyline joining the vertical edges.

    Segment portions inside omitted bands contribute nothing; every other
    portion contributes its Euclidean length; each distinct slit the polyline
    meets contributes that slit's weight.  The result carries exact rational
    lower and upper brackets (exact value when all pieces are axis-parallel).
    """
    pts = [(frac(p[0]), frac(p[1])) for p in polyline]
    if len(pts) < 2:
        raise CertificateError("polyline needs at least two vertices")
    if pts[0][0] != 0 or pts[-1][0] != 1:
        raise CertificateError("polyline must start on x=0 and end on x=1")
    for x, y in pts:
        if not (0 <= x <= 1 and 0 <= y <= 1):
            raise CertificateError("polyline leaves the unit square")

    omitted = [c.omitted() for c in dist.selected]
    total = SqrtSum()

    for (ax, ay), (bx, by) in zip(pts, pts[1:]):
        dx = bx - ax
        dy = by - ay
        if dx == 0 and dy == 0:
            continue
        removed = Fraction(0)
        for x0, x1, y0, y1 in omitted:
            if y1 <= y0:
                continue  # empty band (eps = 1/2)
            cx = _open_interval_clip(ax, dx, x0, x1)
            if cx is None:
                continue
            cy = _open_interval_clip(ay, dy, y0, y1)
            if cy is None:
                continue
            t0 = max(cx[0], cy[0])
            t1 = min(cx[1], cy[1])
            if t1 > t0:
                removed += t1 - t0
        keep = 1 - removed
        if keep > 0:
            if dx == 0 or dy == 0:
                total.add_exact(keep * (abs(dx) + abs(dy)))
            else:
                total.add_sqrt(keep, dx * dx + dy * dy)

    met = set()
    for idx, s in enumerate(dist.slit_set.slits):
        w = dist.weight(idx)
        if w == 0 or idx in met:
            continue
        for (ax, ay), (bx, by) in zip(pts, pts[1:]):
            if _segment_meets_slit(ax, ay, bx, by, s):
                met.add(idx)
                total.add_exact(w)
                break
    return total


# ---------------------------------------------------------------------------
# closed-form bounds
# ---------------------------------------------------------------------------


def theoretical_bound(n: int, r: SizeSequence, eps, mode: str = "dyadic") -> Fraction:
    """Product bound on the modulus of the edge-to-edge family.

    dyadic mode:  prod_{i<=n} (1 - eps r_i^2) + 3 eps   (dyadic data)
    general mode: prod_{i<=n} (1 - eps r_i^2 / 8) + 3 eps  (any data in (0,1))
    """
    eps = frac(eps)
    if not 0 < eps < 1:
        raise CertificateError(f"epsilon {eps} outside (0,1)")
    if mode not in ("dyadic", "general"):
        raise CertificateError(f"unknown mode {mode!r}")
    prod = Fraction(1)
    for i in range(n + 1):
        ri = r.value(i)
        term = eps * ri * ri
        if mode == "general":
            term /= 8
        prod *= 1 - term
    return prod + 3 * eps


def rectangle_certificate(
    k: int, n: int, r: SizeSequence, eps, mode: str = "general"
) -> Fraction:
    """Bound 2**k * [prod_{i=k..n}(1 - eps r_i^2 / 8) + 3 eps] for the family
    crossing a width-2**-k dyadic column of the square (independent of which
    column).  Dyadic mode drops the 1/8."""
    if k < 0 or n <= k and k > 0:
        if not (k == 0 and n >= 0):
            raise CertificateError(f"need n > k >= 0, got n={n}, k={k}")
    eps = frac(eps)
    prod = Fraction(1)
    for i in range(k, n + 1):
        ri = r.value(i)
        term = eps * ri * ri
        if mode == "general":
            term /= 8
        prod *= 1 - term
    return (1 << k) * (prod + 3 * eps)


def certificate_report(n: int, r: SizeSequence, eps) -> dict:
    """Mass, bound, residual and selection count for one configuration.

    Rounds non-dyadic data first; asserts mass <= bound exactly in the
    dyadic regime (the general product with the 1/8 factor is reported for
    the original data).
    """
    eps = frac(eps)
    if n >= 0 and not (r.is_dyadic_through(n) and is_dyadic(eps) and eps.numerator == 1):
        r_dyadic, eps_dyadic = round_to_dyadic(r, eps)
        bound_original = theoretical_bound(n, r, eps, mode="general") if n >= 0 else 1 + 3 * eps
    else:
        r_dyadic, eps_dyadic = r, eps
        bound_original = None
    dist = build_mass_distribution(n, r_dyadic, eps_dyadic)
    total = dist.mass()
    bound = (
        theoretical_bound(n, r_dyadic, eps_dyadic, mode="dyadic")
        if n >= 0
        else 1 + 3 * eps_dyadic
    )
    if total > bound:
        raise CertificateError(
            f"certificate failed: mass {total} > bound {bound} at n={n}, eps={eps_dyadic}"
        )
    report = {
        "n": n,
        "eps": eps_dyadic,
        "selected_count": dist.selected_count,
        "residual": dist.residual_area,
        "buffer": dist.buffer_area,
        "mass": total,
        "bound": bound,
    }
    if bound_original is not None:
        report["bound_general_original"] = bound_original
    return report
