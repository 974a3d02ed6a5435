"""Multi-valued maps over a table and the lower/upper probabilities they induce.

Each cell maps to the set of outcomes still possible for it: a singleton
for a measured cell, ``{+1, -1}`` for a gap.  Lower probabilities count
only runs whose focal set is inside the event, upper probabilities count
every run whose focal set meets it.  The difference is the "don't know"
mass carried by the gaps.

Contextual statistics are the other half: probabilities normalised over
the runs where the context was actually measured (its domain of
certainty).  Only these point values ever feed a CHSH expression; the
intervals are reported side by side but never combined across contexts.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple

import numpy as np

from .table import LEFT, RIGHT, Outcome, Setting, Table, ValidationError, _opposite

__all__ = [
    "ProbabilityInterval",
    "ContextStats",
    "gamma_single",
    "gamma_joint",
    "lower_upper_single",
    "lower_upper_joint",
    "dont_know",
    "context_stats_single",
    "context_stats_joint",
    "JOINT_CONTEXTS",
    "ds_report",
]

BOTH = frozenset({Outcome.PLUS, Outcome.MINUS})
JOINT_CONTEXTS = tuple((c, c2) for c in LEFT for c2 in RIGHT)
_OUTCOMES = (Outcome.PLUS, Outcome.MINUS)


@dataclass(frozen=True)
class ProbabilityInterval:
    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper <= 1:
            raise ValueError(f"invalid interval [{self.lower}, {self.upper}]")

    @property
    def dont_know(self) -> Fraction:
        return self.upper - self.lower

    def __contains__(self, value) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class ContextStats:
    """Probabilities and mean for one context, over its domain of certainty.

    ``context`` is a 1-tuple for a single setting, a 2-tuple for a joint
    context.  ``support`` is the number of runs in the domain.
    """

    context: Tuple[Setting, ...]
    probabilities: Dict[tuple, Fraction]
    average: Fraction
    support: int


def gamma_single(t: Table, c, run: int) -> frozenset:
    value = t[run][c]
    return BOTH if value is None else frozenset({value})


def gamma_joint(t: Table, c, c2, run: int) -> frozenset:
    c, c2 = _opposite(c, c2)
    return frozenset((j, k) for j in gamma_single(t, c, run) for k in gamma_single(t, c2, run))


def lower_upper_single(t: Table, c, j) -> ProbabilityInterval:
    known = t.count(c, j)
    return ProbabilityInterval(
        Fraction(known, t.n_runs), Fraction(known + t.unknown_count(c), t.n_runs)
    )


def lower_upper_joint(t: Table, c, j, c2, k) -> ProbabilityInterval:
    c, c2 = _opposite(c, c2)
    j, k = int(Outcome.parse(j)), int(Outcome.parse(k))
    col, col2 = t.column(c), t.column(c2)
    lower = np.count_nonzero((col == j) & (col2 == k))
    upper = np.count_nonzero(((col == j) | (col == 0)) & ((col2 == k) | (col2 == 0)))
    return ProbabilityInterval(Fraction(int(lower), t.n_runs), Fraction(int(upper), t.n_runs))


def dont_know(t: Table, c) -> Fraction:
    return Fraction(t.unknown_count(c), t.n_runs)


def context_stats_single(t: Table, c) -> ContextStats:
    c = Setting.parse(c)
    counts = {j: t.count(c, j) for j in _OUTCOMES}
    total = sum(counts.values())
    if total == 0:
        raise ValidationError(f"no data in context {c}")
    probs = {(j,): Fraction(n, total) for j, n in counts.items()}
    average = sum(int(j) * p for (j,), p in probs.items())
    return ContextStats((c,), probs, Fraction(average), total)


def context_stats_joint(t: Table, c, c2) -> ContextStats:
    c, c2 = _opposite(c, c2)
    col, col2 = t.column(c), t.column(c2)
    counts = {
        (j, k): int(np.count_nonzero((col == int(j)) & (col2 == int(k))))
        for j in _OUTCOMES
        for k in _OUTCOMES
    }
    total = sum(counts.values())
    if total == 0:
        raise ValidationError(f"no data in context {c}{c2}")
    probs = {jk: Fraction(n, total) for jk, n in counts.items()}
    average = sum(int(j) * int(k) * p for (j, k), p in probs.items())
    return ContextStats((c, c2), probs, Fraction(average), total)


def _key(outcomes) -> str:
    return "".join(str(Outcome(int(o))) for o in outcomes)


def _num(x: Fraction) -> float:
    return float(f"{float(x):.12g}")


def ds_report(t: Table) -> dict:
    """JSON-ready summary of intervals and contextual statistics.

    Contexts without any measured run report ``p`` and ``average`` as
    ``None`` instead of failing the whole report.
    """
    singles = []
    for c in (*LEFT, *RIGHT):
        intervals = {j: lower_upper_single(t, c, j) for j in _OUTCOMES}
        try:
            stats = context_stats_single(t, c)
            p = {_key(jk): _num(v) for jk, v in stats.probabilities.items()}
            p_exact = {_key(jk): str(v) for jk, v in stats.probabilities.items()}
            average = _num(stats.average)
        except ValidationError:
            p, p_exact, average = None, None, None
        singles.append({
            "context": c.value,
            "lower": {_key((j,)): _num(iv.lower) for j, iv in intervals.items()},
            "upper": {_key((j,)): _num(iv.upper) for j, iv in intervals.items()},
            "dont_know": _num(dont_know(t, c)),
            "p": p,
            "average": average,
            "exact": {
                "lower": {_key((j,)): str(iv.lower) for j, iv in intervals.items()},
                "upper": {_key((j,)): str(iv.upper) for j, iv in intervals.items()},
                "p": p_exact,
            },
        })
    joints = []
    for c, c2 in JOINT_CONTEXTS:
        intervals = {(j, k): lower_upper_joint(t, c, j, c2, k) for j in _OUTCOMES for k in _OUTCOMES}
        try:
            stats = context_stats_joint(t, c, c2)
            p = {_key(jk): _num(v) for jk, v in stats.probabilities.items()}
            p_exact = {_key(jk): str(v) for jk, v in stats.probabilities.items()}
            average = _num(stats.average)
            support = stats.support
        except ValidationError:
            p, p_exact, average, support = None, None, None, 0
        joints.append({
            "context": c.value + c2.value,
            "lower": {_key(jk): _num(iv.lower) for jk, iv in intervals.items()},
            "upper": {_key(jk): _num(iv.upper) for jk, iv in intervals.items()},
            "dont_know": {_key(jk): _num(iv.dont_know) for jk, iv in intervals.items()},
            "p": p,
            "average": average,
            "support": support,
            "exact": {
                "lower": {_key(jk): str(iv.lower) for jk, iv in intervals.items()},
                "upper": {_key(jk): str(iv.upper) for jk, iv in intervals.items()},
                "p": p_exact,
            },
        })
    return {"n_runs": t.n_runs, "contexts": singles, "joint": joints}
