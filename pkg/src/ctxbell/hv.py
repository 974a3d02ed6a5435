"""Single-space hidden-variable formalism and conditioning on the circle.

A :class:`JointDistribution16` assigns one probability to every joint
assignment (A, A', B, B') in {+1, -1}^4.  Every statistic derived from it
lives on one Kolmogorov space, so its CHSH value cannot exceed 2.
``polytope_membership`` asks the converse: do four joint-context tables
admit such a distribution?

The second half covers conditioning of densities on circle regions and
the indicator form of probabilities conditioned on an ontic state.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from .chsh import CorrelationQuad, Semantics, chsh_f, chsh_max
from .circle import TWO_PI, Density, EventRegion
from .table import LEFT, RIGHT, Outcome, Setting, Table, ValidationError

__all__ = [
    "VERTICES",
    "JointDistribution16",
    "marginal",
    "averages",
    "chsh_theorem_check",
    "MembershipResult",
    "context_tables_from_table",
    "context_tables_from_correlations",
    "polytope_membership",
    "conditional_density",
    "ontic_conditional",
    "total_probability_check",
    "bell_locality_check",
]

_SLOTS = (Setting.A, Setting.A_PRIME, Setting.B, Setting.B_PRIME)
# vertex order: itertools.product over (+1, -1) for A, A', B, B'
VERTICES = tuple(itertools.product((1, -1), repeat=4))
_VERTEX_ARRAY = np.array(VERTICES, dtype=np.int64)
_CONTEXTS = tuple((c, c2) for c in LEFT for c2 in RIGHT)
_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


class JointDistribution16:
    """Probability weights over the 16 outcome vectors (A, A', B, B')."""

    __slots__ = ("_p",)

    def __init__(self, weights, atol: float = 1e-12):
        if isinstance(weights, Mapping):
            p = np.zeros(16)
            for key, w in weights.items():
                p[VERTICES.index(tuple(int(v) for v in key))] += w
        else:
            p = np.array(weights, dtype=float).reshape(-1)
            if p.shape != (16,):
                raise ValidationError(f"need 16 weights, got {p.size}")
        if (p < 0).any():
            raise ValidationError("weights must be nonnegative")
        if abs(p.sum() - 1.0) > atol:
            raise ValidationError(f"weights sum to {p.sum()!r}, not 1")
        p.flags.writeable = False
        self._p = p

    @property
    def weights(self) -> np.ndarray:
        return self._p

    @classmethod
    def uniform(cls) -> "JointDistribution16":
        return cls(np.full(16, 1.0 / 16))

    @classmethod
    def point_mass(cls, vertex) -> "JointDistribution16":
        p = np.zeros(16)
        p[VERTICES.index(tuple(int(v) for v in vertex))] = 1.0
        return cls(p)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "JointDistribution16":
        p = rng.dirichlet(np.ones(16))
        return cls(p / p.sum())

    @classmethod
    def from_complete_table(cls, t: Table) -> "JointDistribution16":
        if not (t.cells != 0).all():
            raise ValidationError("empirical distribution needs a complete table")
        codes = ((1 - t.cells.astype(np.int64)) // 2) @ np.array([8, 4, 2, 1])
        counts = np.bincount(codes, minlength=16)
        return cls(counts / t.n_runs)

    def __repr__(self) -> str:
        return f"JointDistribution16({np.round(self._p, 6).tolist()})"


def marginal(d: JointDistribution16, values: Mapping) -> float:
    """Probability that each named slot takes the given outcome."""
    mask = np.ones(16, dtype=bool)
    for setting, j in values.items():
        idx = Setting.parse(setting).index
        mask &= _VERTEX_ARRAY[:, idx] == int(Outcome.parse(j))
    return float(math.fsum(d.weights[mask]))


def averages(d: JointDistribution16) -> Tuple[CorrelationQuad, Dict[Setting, float]]:
    w = d.weights
    singles = {s: float(w @ _VERTEX_ARRAY[:, s.index]) for s in _SLOTS}

    def corr(c, c2):
        return float(w @ (_VERTEX_ARRAY[:, c.index] * _VERTEX_ARRAY[:, c2.index]))

    quad = CorrelationQuad(
        *(max(-1.0, min(1.0, corr(c, c2))) for c, c2 in _CONTEXTS),
        semantics=Semantics.SINGLE_SPACE,
    )
    return quad, singles


def chsh_theorem_check(d: JointDistribution16) -> float:
    """|f| for the correlations of ``d``; never above 2 up to rounding."""
    quad, _ = averages(d)
    return abs(chsh_f(quad))


# ---------------------------------------------------------------- polytope

ContextTables = Dict[Tuple[Setting, Setting], Dict[Tuple[int, int], float]]


@dataclass(frozen=True)
class MembershipResult:
    feasible: bool
    witness: Optional[JointDistribution16]
    certificate: Optional[Tuple[str, float]]
    max_residual: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "feasible": self.feasible,
            "witness": None if self.witness is None else [float(f"{w:.12g}") for w in self.witness.weights],
            "certificate": None if self.certificate is None else {
                "variant": self.certificate[0],
                "value": float(f"{self.certificate[1]:.12g}"),
            },
        }


def context_tables_from_table(t: Table) -> ContextTables:
    """Joint-context probability tables normalised over each domain of certainty."""
    from .dempster_shafer import context_stats_joint

    out = {}
    for c, c2 in _CONTEXTS:
        stats = context_stats_joint(t, c, c2)
        out[(c, c2)] = {(int(j), int(k)): float(p) for (j, k), p in stats.probabilities.items()}
    return out


def context_tables_from_correlations(correlations: Mapping) -> ContextTables:
    """Tables with uniform marginals and the given correlations.

    ``correlations`` maps each joint context to E in [-1, 1]; the table is
    p(j, k) = (1 + j k E) / 4.
    """
    out = {}
    for (c, c2), e in correlations.items():
        c, c2 = Setting.parse(c), Setting.parse(c2)
        out[(c, c2)] = {(j, k): (1 + j * k * e) / 4 for j, k in _PAIRS}
    return out


def _normalise_tables(tables: Mapping) -> ContextTables:
    out = {}
    for key, table in tables.items():
        c, c2 = (Setting.parse(s) for s in key)
        if c.side != "left" or c2.side != "right":
            raise ValidationError(f"context {key!r} must pair a left and a right setting")
        probs = {}
        for jk, p in table.items():
            j, k = (int(Outcome.parse(v)) for v in jk)
            probs[(j, k)] = float(p)
        if set(probs) != set(_PAIRS):
            raise ValidationError(f"context {c}{c2} must give all four outcome pairs")
        if any(not math.isfinite(p) or p < -1e-12 for p in probs.values()):
            raise ValidationError(f"context {c}{c2} has negative or non-finite entries")
        if abs(sum(probs.values()) - 1.0) > 1e-9:
            raise ValidationError(f"context {c}{c2} sums to {sum(probs.values())}, not 1")
        out[(c, c2)] = probs
    if set(out) != set(_CONTEXTS):
        raise ValidationError("need tables for all four joint contexts AB, AB', A'B, A'B'")
    return out


def _constraint_system(tables: ContextTables):
    rows, rhs = [], []
    for c, c2 in _CONTEXTS:
        for j, k in _PAIRS:
            rows.append((_VERTEX_ARRAY[:, c.index] == j) & (_VERTEX_ARRAY[:, c2.index] == k))
            rhs.append(tables[(c, c2)][(j, k)])
    return np.array(rows, dtype=float), np.array(rhs)


def _signalling_gap(tables: ContextTables) -> Tuple[str, float]:
    worst = ("", 0.0)
    for c in LEFT:
        m = [sum(tables[(c, c2)][(1, k)] for k in (1, -1)) for c2 in RIGHT]
        if abs(m[0] - m[1]) > worst[1]:
            worst = (f"no-signalling:{c}", abs(m[0] - m[1]))
    for c2 in RIGHT:
        m = [sum(tables[(c, c2)][(j, 1)] for j in (1, -1)) for c in LEFT]
        if abs(m[0] - m[1]) > worst[1]:
            worst = (f"no-signalling:{c2}", abs(m[0] - m[1]))
    return worst


def polytope_membership(tables: Mapping, tol: float = 1e-9) -> MembershipResult:
    """Decide whether four joint-context tables come from one distribution.

    Solves the feasibility LP over convex weights on the 16 deterministic
    vertices.  A feasible answer carries a witness whose pairwise
    marginals reproduce every table within ``tol``.  An infeasible answer
    carries the most violated CHSH variant when one exceeds 2, else the
    largest no-signalling gap.
    """
    tables = _normalise_tables(tables)
    a_eq, b_eq = _constraint_system(tables)
    res = linprog(np.zeros(16), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * 16, method="highs")
    if res.status == 0:
        w = np.clip(res.x, 0.0, None)
        support = w > 1e-12
        polished, *_ = np.linalg.lstsq(a_eq[:, support], b_eq, rcond=None)
        if (polished >= 0).all():
            w = np.zeros(16)
            w[support] = polished
        w = w / w.sum()
        residual = float(np.abs(a_eq @ w - b_eq).max())
        if residual <= tol:
            return MembershipResult(True, JointDistribution16(w, atol=1e-9), None, residual)
    corr = {}
    for c, c2 in _CONTEXTS:
        e = sum(j * k * tables[(c, c2)][(j, k)] for j, k in _PAIRS)
        corr[(c, c2)] = max(-1.0, min(1.0, e))
    value, variant = chsh_max(CorrelationQuad(*(corr[ctx] for ctx in _CONTEXTS)))
    if value > 2.0 + tol:
        return MembershipResult(False, None, (variant, value))
    gap = _signalling_gap(tables)
    if gap[1] > tol:
        return MembershipResult(False, None, gap)
    # Boundary case: solver rejected a point within tolerance of the polytope.
    return MembershipResult(False, None, (variant, value))


# ------------------------------------------------------------ conditioning

def conditional_density(rho: Density, region: EventRegion) -> Density:
    """Restrict ``rho`` to ``region`` and renormalise to unit mass."""
    mass = rho.integrate(region)
    if not mass > 0.0:
        raise ValueError("conditioning on null event")
    pdf = rho.pdf
    return Density(lambda lam: pdf(lam) / mass, rho.support & region, rho.kinks, 1.0)


def ontic_conditional(region: EventRegion, lam: float) -> int:
    """Probability of ``region`` given the ontic state ``lam``: 0 or 1."""
    return region.indicator(lam)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _gauss_legendre(f, a: float, b: float, max_panel: float = math.pi / 8) -> float:
    panels = max(1, math.ceil((b - a) / max_panel))
    edges = np.linspace(a, b, panels + 1)
    total = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
        total.append(half * math.fsum(w * f(mid + half * x) for x, w in zip(_GL_NODES, _GL_WEIGHTS)))
    return math.fsum(total)


def total_probability_check(rho: Density, region: EventRegion) -> Tuple[float, float]:
    """Both sides of P(B) = integral of rho(lam) P(B | lam).

    The left side integrates the normalised density over ``region`` by
    adaptive Simpson.  The right side integrates rho times the 0/1
    indicator over the whole support with Gauss-Legendre panels, cut at
    kinks and at the region's endpoints.
    """
    lhs = rho.probability(region)
    cuts = list(rho.kinks)
    for s, e in region.arcs:
        cuts.extend((s, e % TWO_PI))
    pdf = rho.pdf
    rhs = math.fsum(
        _gauss_legendre(lambda lam: pdf(lam) * ontic_conditional(region, lam), s, e)
        for s, e in rho.support.split(cuts)
    ) / rho.total_mass
    return lhs, rhs


def bell_locality_check(a_region: EventRegion, b_region: EventRegion, lam: float) -> bool:
    """Indicator of the intersection equals the product of indicators."""
    return (a_region & b_region).indicator(lam) == a_region.indicator(lam) * b_region.indicator(lam)
