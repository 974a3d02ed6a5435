"""The CHSH functional.

``chsh_f`` evaluates the fixed sign pattern AB + AB' - A'B + A'B'.  At
arbitrary angles the largest violation may sit under a different sign
placement, so ``chsh_all_variants`` returns all eight members of the
family and ``chsh_max`` their maximum.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import List, Tuple

__all__ = [
    "Semantics",
    "CorrelationQuad",
    "chsh_f",
    "chsh_all_variants",
    "chsh_max",
    "variant_names",
    "SINGLE_SPACE_BOUND",
    "CONTEXTUAL_BOUND",
]

SINGLE_SPACE_BOUND = 2.0
CONTEXTUAL_BOUND = 4.0
_TERMS = ("AB", "AB'", "A'B", "A'B'")


class Semantics(enum.Enum):
    SINGLE_SPACE = "single-space"
    CONTEXTUAL = "contextual"


@dataclass(frozen=True)
class CorrelationQuad:
    ab: float
    ab_prime: float
    a_prime_b: float
    a_prime_b_prime: float
    semantics: Semantics = Semantics.CONTEXTUAL

    def __post_init__(self):
        for name, value in zip(_TERMS, self.values()):
            if not -1 <= value <= 1:
                raise ValueError(f"correlation <{name}> = {value} outside [-1, 1]")

    def values(self) -> Tuple[float, float, float, float]:
        return (self.ab, self.ab_prime, self.a_prime_b, self.a_prime_b_prime)


def _quad(q) -> CorrelationQuad:
    return q if isinstance(q, CorrelationQuad) else CorrelationQuad(*q)


def chsh_f(q) -> float:
    """Signed f = <AB> + <AB'> - <A'B> + <A'B'>."""
    ab, abp, apb, apbp = _quad(q).values()
    return ab + abp - apb + apbp


def _placements():
    # minus sign on term i, for i over the four terms, then both overall signs
    for sign in (1, -1):
        for minus in range(4):
            yield sign, minus


def variant_names() -> List[str]:
    names = []
    for sign, minus in _placements():
        parts = [("-" if i == minus else "+") + t for i, t in enumerate(_TERMS)]
        expr = "".join(parts).lstrip("+")
        names.append(expr if sign == 1 else f"-({expr})")
    return names


def chsh_all_variants(q) -> List[float]:
    vals = _quad(q).values()
    return [
        sign * sum(-v if i == minus else v for i, v in enumerate(vals))
        for sign, minus in _placements()
    ]


def chsh_max(q) -> Tuple[float, str]:
    """Largest variant value and the variant's name."""
    values = chsh_all_variants(q)
    best = max(range(len(values)), key=values.__getitem__)
    return values[best], variant_names()[best]
