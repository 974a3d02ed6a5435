"""Classical, local, deterministic spin model on the circle.

The hidden variable is one angle lam per particle pair.  Each device
setting c has an alignment angle; the left particle reads +1 when lam is
within a quarter turn of the alignment, the right particle (spin -S)
reads +1 on the opposite half circle.  Inside a single context the
epistemic state is the density N |cos(lam - angle)|, and a joint context
uses any convex mixture of the two single-context densities.  Joint
probabilities come out as (1 - jk cos(angle_c - angle_c')) / 4, the
singlet predictions, for every mixture weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Mapping, Tuple

import numpy as np

from .chsh import CorrelationQuad, Semantics, chsh_all_variants
from .circle import TWO_PI, Density, EventRegion, canonical_angle
from .table import LEFT, RIGHT, Outcome, Setting, ValidationError, _opposite

__all__ = [
    "DeviceSetting",
    "ModelConfig",
    "read_config",
    "domain_arcs",
    "observable",
    "observable_array",
    "context_density",
    "joint_density",
    "single_prob",
    "single_prob_quadrature",
    "joint_prob",
    "joint_prob_quadrature",
    "correlation",
    "correlation_quad",
    "quantum_oracle",
    "parameter_independence",
    "device_selection_measure",
    "grid_max_chsh",
    "NORMALISED",
]

HALF_PI = 0.5 * math.pi
NORMALISED = 0.25  # N making N|cos| integrate to 1 over the circle
_OUTCOMES = (1, -1)


@dataclass(frozen=True)
class DeviceSetting:
    label: Setting
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "label", Setting.parse(self.label))
        object.__setattr__(self, "angle", canonical_angle(float(self.angle)))

    @property
    def side(self) -> str:
        return self.label.side


@dataclass(frozen=True)
class ModelConfig:
    """Device angles (radians), mixture weight ``alpha`` and density constant ``norm``."""

    angles: Mapping[Setting, float] = field(default_factory=lambda: {
        Setting.A: 0.0,
        Setting.A_PRIME: HALF_PI,
        Setting.B: math.pi / 4,
        Setting.B_PRIME: 3 * math.pi / 4,
    })
    alpha: float = 0.5
    norm: float = NORMALISED

    def __post_init__(self):
        angles = {Setting.parse(k): canonical_angle(float(v)) for k, v in self.angles.items()}
        if set(angles) != set(Setting):
            raise ValidationError("config needs angles for A, A', B and B'")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.norm > 0.0:
            raise ValidationError(f"norm must be positive, got {self.norm}")
        object.__setattr__(self, "angles", angles)

    @classmethod
    def from_degrees(cls, a=0.0, a_prime=90.0, b=45.0, b_prime=135.0, **kwargs) -> "ModelConfig":
        angles = dict(zip(
            (Setting.A, Setting.A_PRIME, Setting.B, Setting.B_PRIME),
            (math.radians(x) for x in (a, a_prime, b, b_prime)),
        ))
        return cls(angles, **kwargs)

    @property
    def beta(self) -> float:
        return 1.0 - self.alpha

    def device(self, setting) -> DeviceSetting:
        setting = Setting.parse(setting)
        return DeviceSetting(setting, self.angles[setting])

    def with_alpha(self, alpha: float) -> "ModelConfig":
        return replace(self, alpha=alpha)

    def to_text(self) -> str:
        keys = {Setting.A: "angle_a", Setting.A_PRIME: "angle_a_prime",
                Setting.B: "angle_b", Setting.B_PRIME: "angle_b_prime"}
        lines = [f"{keys[s]} = {math.degrees(self.angles[s]):.12g}" for s in keys]
        lines += [f"alpha = {self.alpha:.12g}", f"norm = {self.norm:.12g}"]
        return "\n".join(lines) + "\n"


_CONFIG_KEYS = {
    "angle_a": Setting.A,
    "angle_a_prime": Setting.A_PRIME,
    "angle_b": Setting.B,
    "angle_b_prime": Setting.B_PRIME,
}


def parse_config(text: str) -> ModelConfig:
    """Parse ``key = value`` lines; angles are in degrees.  Missing keys keep defaults."""
    default = ModelConfig()
    angles = dict(default.angles)
    extra = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            number = float(value)
        except ValueError:
            raise ValidationError(f"config line {lineno}: {value!r} is not a number") from None
        if key in _CONFIG_KEYS:
            angles[_CONFIG_KEYS[key]] = math.radians(number)
        elif key in ("alpha", "norm"):
            extra[key] = number
        else:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
    return ModelConfig(angles, **extra)


def read_config(path) -> ModelConfig:
    return parse_config(Path(path).read_text())


# ------------------------------------------------------------ observables

def domain_arcs(angle: float, side: str) -> Tuple[EventRegion, EventRegion]:
    """(plus, minus) half circles for a device at ``angle`` on ``side``."""
    north = EventRegion.arc(angle - HALF_PI, angle + HALF_PI)
    south = EventRegion.arc(angle + HALF_PI, angle + 3 * HALF_PI)
    if side == "left":
        return north, south
    if side == "right":
        return south, north
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def _side_offset(side: str) -> float:
    if side == "left":
        return HALF_PI
    if side == "right":
        return -HALF_PI
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def observable(lam: float, angle: float, side: str) -> Outcome:
    """Deterministic outcome of a device at ``angle`` for hidden state ``lam``."""
    return Outcome.PLUS if canonical_angle(lam - angle + _side_offset(side)) < math.pi else Outcome.MINUS


def observable_array(lam: np.ndarray, angle: float, side: str) -> np.ndarray:
    """Vectorised :func:`observable`, returning an int8 array of +1/-1."""
    shifted = np.mod(np.asarray(lam, dtype=float) - angle + _side_offset(side), TWO_PI)
    shifted[shifted >= TWO_PI] = 0.0
    return np.where(shifted < math.pi, 1, -1).astype(np.int8)


def outcome_region(cfg: ModelConfig, setting, j) -> EventRegion:
    dev = cfg.device(setting)
    plus, minus = domain_arcs(dev.angle, dev.side)
    return plus if int(Outcome.parse(j)) == 1 else minus


# -------------------------------------------------------------- densities

def context_density(angle: float, norm: float = NORMALISED) -> Density:
    """N |cos(lam - angle)| on the full circle; kinks where the cosine vanishes."""

    def pdf(lam: float) -> float:
        return norm * abs(math.cos(lam - angle))

    kinks = (canonical_angle(angle + HALF_PI), canonical_angle(angle - HALF_PI))
    return Density(pdf, EventRegion.full(), kinks, 4.0 * norm, ((1.0, canonical_angle(angle)),))


def density(setting: DeviceSetting, normalized: bool = True, norm: float = NORMALISED) -> Density:
    return context_density(setting.angle, NORMALISED if normalized else norm)


def joint_density(cfg: ModelConfig, c, c2, alpha: float | None = None) -> Density:
    """alpha rho'_c + (1 - alpha) rho'_c' for a left/right pair."""
    c, c2 = _opposite(c, c2)
    alpha = cfg.alpha if alpha is None else alpha
    first = context_density(cfg.angles[c])
    second = context_density(cfg.angles[c2])
    f1, f2 = first.pdf, second.pdf

    def pdf(lam: float) -> float:
        return alpha * f1(lam) + (1.0 - alpha) * f2(lam)

    mixture = ((alpha, cfg.angles[c]), (1.0 - alpha, cfg.angles[c2]))
    return Density(pdf, EventRegion.full(), first.kinks + second.kinks, 1.0, mixture)


# ---------------------------------------------------------- probabilities

def single_prob(setting, side: str | None = None, j=1) -> float:
    """Single-context outcome probability; 1/2 for every setting and outcome."""
    Outcome.parse(j)
    return 0.5


def single_prob_quadrature(cfg: ModelConfig, setting, j) -> float:
    setting = Setting.parse(setting)
    return context_density(cfg.angles[setting]).probability(outcome_region(cfg, setting, j))


def _ordered(c, j, c2, k):
    c, c2 = Setting.parse(c), Setting.parse(c2)
    if c.side == "right" and c2.side == "left":
        c, j, c2, k = c2, k, c, j
    _opposite(c, c2)
    return c, int(Outcome.parse(j)), c2, int(Outcome.parse(k))


def joint_prob(cfg: ModelConfig, c, j, c2, k) -> float:
    c, j, c2, k = _ordered(c, j, c2, k)
    return 0.25 * (1.0 - j * k * math.cos(cfg.angles[c] - cfg.angles[c2]))


def joint_prob_quadrature(cfg: ModelConfig, c, j, c2, k, alpha: float | None = None) -> float:
    """Integral of the joint-context density over the intersection of outcome arcs."""
    c, j, c2, k = _ordered(c, j, c2, k)
    region = outcome_region(cfg, c, j) & outcome_region(cfg, c2, k)
    return joint_density(cfg, c, c2, alpha).integrate(region)


def correlation(cfg: ModelConfig, c, c2) -> float:
    return math.fsum(
        j * k * joint_prob(cfg, c, j, c2, k) for j in _OUTCOMES for k in _OUTCOMES
    )


def correlation_quad(cfg: ModelConfig) -> CorrelationQuad:
    return CorrelationQuad(
        *(correlation(cfg, c, c2) for c in LEFT for c2 in RIGHT),
        semantics=Semantics.CONTEXTUAL,
    )


def quantum_oracle(j, k, angle_a: float, angle_b: float) -> float:
    """Singlet-state joint probability from the spin unit vectors.

    Angles are measured from the z axis in the xz plane; the singlet
    correlation is -a.b, so p(j, k) = (1 - j k a.b) / 4.
    """
    a = np.array([math.sin(angle_a), math.cos(angle_a)])
    b = np.array([math.sin(angle_b), math.cos(angle_b)])
    return 0.25 * (1.0 - int(j) * int(k) * float(a @ b))


def parameter_independence(cfg: ModelConfig) -> Dict[str, float]:
    """Largest deviation of one side's marginals across the remote setting.

    Also compares each marginal against the single-context value 1/2.
    """
    left = 0.0
    for c in LEFT:
        for j in _OUTCOMES:
            m = [math.fsum(joint_prob(cfg, c, j, c2, k) for k in _OUTCOMES) for c2 in RIGHT]
            left = max(left, abs(m[0] - m[1]), *(abs(x - single_prob(c, "left", j)) for x in m))
    right = 0.0
    for c2 in RIGHT:
        for k in _OUTCOMES:
            m = [math.fsum(joint_prob(cfg, c, j, c2, k) for j in _OUTCOMES) for c in LEFT]
            right = max(right, abs(m[0] - m[1]), *(abs(x - single_prob(c2, "right", k)) for x in m))
    return {"left": left, "right": right, "max_deviation": max(left, right)}


def device_selection_measure(cfg: ModelConfig) -> Dict[str, object]:
    """Context masses when N = 1/8 reads them as setting-selection probabilities."""
    if abs(cfg.norm - 0.125) > 1e-15:
        raise ValidationError(f"setting-selection reading needs norm = 1/8, got {cfg.norm}")
    single = {
        s: context_density(cfg.angles[s], cfg.norm).integrate()
        for s in (*LEFT, *RIGHT)
    }
    joint = {(c, c2): single[c] * single[c2] for c in LEFT for c2 in RIGHT}
    conditional = {
        (c, j, c2, k): joint_prob(cfg, c, j, c2, k)
        for c in LEFT for c2 in RIGHT for j in _OUTCOMES for k in _OUTCOMES
    }
    return {"single": single, "joint": joint, "conditional": conditional}


def grid_max_chsh(step_deg: float = 1.0) -> Tuple[float, Tuple[float, float, float, float]]:
    """Maximum CHSH variant value over a grid of device angles.

    Correlations depend on angle differences only, so A is pinned at 0
    and A', B, B' sweep [0, 360) in ``step_deg`` steps.  Returns the value
    and the maximising angles (degrees) in the order A, A', B, B'.
    """
    grid = np.arange(0.0, 360.0, step_deg)
    if grid.size == 0:
        raise ValidationError("empty angle grid")
    rad = np.radians(grid)
    b = rad[:, None]
    bp = rad[None, :]
    e_ab = -np.cos(0.0 - b)
    e_abp = -np.cos(0.0 - bp)
    best, best_angles = -np.inf, (0.0, 0.0, 0.0, 0.0)
    for i, ap in enumerate(rad):
        e_apb = -np.cos(ap - b)
        e_apbp = -np.cos(ap - bp)
        terms = np.broadcast_arrays(e_ab, e_abp, e_apb, e_apbp)
        total = terms[0] + terms[1] + terms[2] + terms[3]
        value = np.max(np.abs(total[None] - 2.0 * np.stack(terms)), axis=0)
        idx = np.unravel_index(int(np.argmax(value)), value.shape)
        if value[idx] > best:
            best = float(value[idx])
            best_angles = (0.0, float(grid[i]), float(grid[idx[0]]), float(grid[idx[1]]))
    return best, best_angles


def chsh_of_config(cfg: ModelConfig) -> float:
    return max(chsh_all_variants(correlation_quad(cfg)))
