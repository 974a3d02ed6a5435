"""Half-open arcs on the circle, densities over them, and quadrature.

Angles are radians, canonicalised into [0, 2*pi).  An :class:`EventRegion`
is a finite union of disjoint half-open intervals ``[start, end)`` inside
[0, 2*pi]; an arc that wraps past zero is stored as two pieces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Tuple

__all__ = [
    "TWO_PI",
    "canonical_angle",
    "EventRegion",
    "Density",
    "adaptive_simpson",
    "QUAD_TOL",
]

TWO_PI = 2.0 * math.pi
QUAD_TOL = 1e-10


def canonical_angle(x: float) -> float:
    y = math.fmod(x, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    if y >= TWO_PI:  # -tiny % 2pi rounds up to 2pi
        y = 0.0
    return y


@dataclass(frozen=True)
class EventRegion:
    arcs: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        arcs = sorted((float(s), float(e)) for s, e in self.arcs if e > s)
        merged = []
        for s, e in arcs:
            if not (0.0 <= s and e <= TWO_PI):
                raise ValueError(f"arc [{s}, {e}) not inside [0, 2pi]")
            if merged and s <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], e))
            else:
                merged.append((s, e))
        object.__setattr__(self, "arcs", tuple(merged))

    @classmethod
    def arc(cls, start: float, end: float) -> "EventRegion":
        """The arc from ``start`` counter-clockwise to ``end``, half-open.

        ``end - start`` must lie in [0, 2*pi]; a length of 2*pi is the
        full circle.
        """
        length = end - start
        if length < 0 or length > TWO_PI + 1e-12:
            raise ValueError(f"arc length {length} outside [0, 2pi]")
        if length >= TWO_PI:
            return cls.full()
        s = canonical_angle(start)
        e = s + length
        if e <= TWO_PI:
            return cls(((s, e),))
        return cls(((s, TWO_PI), (0.0, e - TWO_PI)))

    @classmethod
    def full(cls) -> "EventRegion":
        return cls(((0.0, TWO_PI),))

    @classmethod
    def empty(cls) -> "EventRegion":
        return cls(())

    def __contains__(self, lam: float) -> bool:
        x = canonical_angle(lam)
        return any(s <= x < e for s, e in self.arcs)

    def indicator(self, lam: float) -> int:
        return 1 if lam in self else 0

    @property
    def measure(self) -> float:
        return math.fsum(e - s for s, e in self.arcs)

    @property
    def is_empty(self) -> bool:
        return not self.arcs

    def __and__(self, other: "EventRegion") -> "EventRegion":
        out = []
        for s1, e1 in self.arcs:
            for s2, e2 in other.arcs:
                s, e = max(s1, s2), min(e1, e2)
                if e > s:
                    out.append((s, e))
        return EventRegion(tuple(out))

    def __or__(self, other: "EventRegion") -> "EventRegion":
        return EventRegion(self.arcs + other.arcs)

    def complement(self) -> "EventRegion":
        out, cursor = [], 0.0
        for s, e in self.arcs:
            if s > cursor:
                out.append((cursor, s))
            cursor = e
        if cursor < TWO_PI:
            out.append((cursor, TWO_PI))
        return EventRegion(tuple(out))

    def intersection(self, other: "EventRegion") -> "EventRegion":
        return self & other

    def union(self, other: "EventRegion") -> "EventRegion":
        return self | other

    def split(self, points: Iterable[float]) -> Tuple[Tuple[float, float], ...]:
        """Arcs cut at every canonical point that falls strictly inside one."""
        cuts = sorted({canonical_angle(p) for p in points})
        pieces = []
        for s, e in self.arcs:
            inner = [p for p in cuts if s < p < e]
            bounds = [s, *inner, e]
            pieces.extend(zip(bounds[:-1], bounds[1:]))
        return tuple(pieces)


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = QUAD_TOL,
                     max_depth: int = 50) -> float:
    """Adaptive Simpson integral of ``f`` over [a, b] to absolute ``tol``.

    Uses the Richardson-corrected local estimate and an explicit stack.
    """
    if b <= a:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    parts = []
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - est
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            parts.append(left + right + delta / 15.0)
        else:
            stack.append((lo, mid, flo, flm, fmid, left, eps / 2.0, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, eps / 2.0, depth + 1))
    return math.fsum(parts)


@dataclass(frozen=True)
class Density:
    """A nonnegative function on the circle with known kinks.

    ``pdf`` must be 2*pi-periodic; it is only consulted inside ``support``.  ``kinks`` lists angles
    where the function is not smooth; integration splits there so each
    Simpson panel sees a smooth integrand.  ``total_mass`` is the integral
    over the support and need not be 1.
    """

    pdf: Callable[[float], float]
    support: EventRegion = field(default_factory=EventRegion.full)
    kinks: Tuple[float, ...] = ()
    total_mass: float = 1.0
    # (weight, angle) pairs when the density is a mixture of |cos| lobes
    # normalised to 1/4 |cos(lam - angle)|; lets samplers invert the CDF exactly.
    cos_mixture: Tuple[Tuple[float, float], ...] = ()

    @classmethod
    def from_function(cls, pdf: Callable[[float], float], support: EventRegion | None = None,
                      kinks: Sequence[float] = ()) -> "Density":
        support = EventRegion.full() if support is None else support
        probe = cls(pdf, support, tuple(canonical_angle(k) for k in kinks), 1.0)
        mass = probe.integrate(support)
        if not mass > 0:
            raise ValueError("density has no mass on its support")
        return cls(pdf, support, probe.kinks, mass)

    def __call__(self, lam: float) -> float:
        return self.pdf(canonical_angle(lam)) if lam in self.support else 0.0

    def integrate(self, region: EventRegion | None = None, tol: float = QUAD_TOL) -> float:
        """Integral of the density over ``region`` (clipped to the support)."""
        region = self.support if region is None else region & self.support
        pieces = region.split(self.kinks)
        if not pieces:
            return 0.0
        total_len = sum(e - s for s, e in pieces)
        return math.fsum(
            adaptive_simpson(self.pdf, s, e, tol * (e - s) / total_len) for s, e in pieces
        )

    def probability(self, region: EventRegion) -> float:
        return self.integrate(region) / self.total_mass

    def normalized(self) -> "Density":
        scale = self.total_mass
        pdf = self.pdf
        return Density(lambda lam: pdf(lam) / scale, self.support, self.kinks, 1.0, self.cos_mixture)
