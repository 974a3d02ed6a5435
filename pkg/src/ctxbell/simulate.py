"""Seeded Monte Carlo of the local model, table analysis and angle scans.

Randomness is drawn in fixed blocks of ``BLOCK_SIZE`` runs.  Block ``b``
uses a Philox generator seeded from ``SeedSequence(seed, spawn_key=(b,))``,
so the stream for any run depends only on (seed, run index) and the
output is identical for every thread count.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .chsh import CorrelationQuad, chsh_all_variants, chsh_f, chsh_max, variant_names
from .circle import TWO_PI, Density
from .dempster_shafer import JOINT_CONTEXTS, context_stats_joint, ds_report
from .local_model import ModelConfig, correlation, correlation_quad, joint_density, joint_prob, observable_array
from .table import LEFT, RIGHT, Setting, Table, ValidationError, frequency, table_correlation

__all__ = [
    "BLOCK_SIZE",
    "RNG_ALGORITHM",
    "Schedule",
    "SimConfig",
    "RunRecord",
    "SimulationResult",
    "sample_lambda",
    "inverse_cdf_abs_cos",
    "simulate",
    "analyze",
    "contextual_quad",
    "scan",
    "format_scan_csv",
]

BLOCK_SIZE = 1 << 16
RNG_ALGORITHM = "numpy.random.Philox via SeedSequence(seed, spawn_key=(block,)), block=65536 runs"
_DRAWS_PER_RUN = 3  # context choice, mixture component, position on the lobe


@dataclass(frozen=True)
class Schedule:
    """Fixed joint context, or random switching with probabilities over AB, AB', A'B, A'B'."""

    fixed: Optional[Tuple[Setting, Setting]] = None
    probabilities: Tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)

    def __post_init__(self):
        if self.fixed is not None:
            c, c2 = (Setting.parse(s) for s in self.fixed)
            if c.side != "left" or c2.side != "right":
                raise ValidationError("fixed schedule needs a left and a right setting")
            object.__setattr__(self, "fixed", (c, c2))
        p = tuple(float(x) for x in self.probabilities)
        if len(p) != 4 or any(x < 0 for x in p) or abs(sum(p) - 1.0) > 1e-12:
            raise ValidationError("switching probabilities must be 4 nonnegative numbers summing to 1")
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def parse(cls, text: str) -> "Schedule":
        """``fixed:AB``, ``fixed:A'B'``, ``random`` or ``random:p1,p2,p3,p4``."""
        kind, _, arg = text.strip().partition(":")
        kind = kind.lower()
        if kind == "fixed":
            arg = arg.strip()
            split = arg.upper().find("B")
            if split <= 0:
                raise ValidationError(f"bad fixed schedule {text!r}; use e.g. fixed:AB")
            return cls(fixed=(Setting.parse(arg[:split]), Setting.parse(arg[split:])))
        if kind == "random":
            if not arg:
                return cls()
            try:
                probs = tuple(float(x) for x in arg.split(","))
            except ValueError:
                raise ValidationError(f"bad switching probabilities {arg!r}") from None
            return cls(probabilities=probs)
        raise ValidationError(f"unknown schedule {text!r}")

    def __str__(self) -> str:
        if self.fixed is not None:
            return f"fixed:{self.fixed[0]}{self.fixed[1]}"
        return "random:" + ",".join(f"{p:g}" for p in self.probabilities)


@dataclass(frozen=True)
class SimConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    runs: int = 1000
    seed: int = 0
    schedule: Schedule = field(default_factory=Schedule)

    def __post_init__(self):
        if self.runs < 1:
            raise ValidationError("runs must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class RunRecord:
    index: int
    context: Tuple[Setting, Setting]
    lam: float
    outcomes: Tuple[int, int]


@dataclass(frozen=True)
class SimulationResult:
    table: Table
    lam: np.ndarray
    context: np.ndarray  # index into JOINT_CONTEXTS
    left_outcome: np.ndarray
    right_outcome: np.ndarray
    config: SimConfig

    def __iter__(self):
        # allows ``table, records = simulate(cfg)``
        return iter((self.table, self.records))

    @property
    def records(self) -> "_Records":
        return _Records(self)

    def metadata(self) -> dict:
        m = self.config.model
        meta = {
            "rng": RNG_ALGORITHM,
            "seed": self.config.seed,
            "runs": self.config.runs,
            "schedule": str(self.config.schedule),
            "alpha": f"{m.alpha:.12g}",
        }
        for s in Setting:
            meta[f"angle_{s.name.lower()}_deg"] = f"{math.degrees(m.angles[s]):.12g}"
        return meta


class _Records(Sequence):
    def __init__(self, result: SimulationResult):
        self._r = result

    def __len__(self) -> int:
        return int(self._r.lam.shape[0])

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        r = self._r
        return RunRecord(
            index=int(range(len(self))[i]),
            context=JOINT_CONTEXTS[int(r.context[i])],
            lam=float(r.lam[i]),
            outcomes=(int(r.left_outcome[i]), int(r.right_outcome[i])),
        )

    def __iter__(self) -> Iterator[RunRecord]:
        return (self[i] for i in range(len(self)))


def inverse_cdf_abs_cos(u: np.ndarray, angle) -> np.ndarray:
    """Map uniforms in [0, 1) to angles distributed as |cos(lam - angle)| / 4.

    The circle splits into four quarter lobes of mass 1/4 starting at
    angle - pi/2.  Within a rising quarter the CDF is 1 + sin(x), within a
    falling one sin(x), so each inverts with one arcsine.
    """
    u = np.asarray(u, dtype=float)
    scaled = 4.0 * u
    quarter = np.minimum(np.floor(scaled), 3.0)
    r = scaled - quarter
    rising = (quarter % 2) == 0
    offset = np.where(rising, np.arcsin(np.clip(r - 1.0, -1.0, 0.0)), np.arcsin(np.clip(r, 0.0, 1.0)))
    lam = np.asarray(angle) + np.floor(quarter / 2) * math.pi + offset
    lam = np.mod(lam, TWO_PI)
    lam[lam >= TWO_PI] = 0.0
    return lam


def _mixture_sample(u_component: np.ndarray, u_position: np.ndarray, mixture) -> np.ndarray:
    weights = np.array([w for w, _ in mixture], dtype=float)
    angles = np.array([a for _, a in mixture], dtype=float)
    cum = np.cumsum(weights)
    cum[-1] = 1.0
    comp = np.searchsorted(cum, u_component, side="right")
    comp = np.minimum(comp, len(mixture) - 1)
    return inverse_cdf_abs_cos(u_position, angles[comp])


def sample_lambda(density: Density, rng: np.random.Generator, size: Optional[int] = None):
    """Draw hidden states from a |cos| mixture density by exact inverse CDF."""
    if not density.cos_mixture:
        raise ValueError("sampling needs a |cos| mixture density from the local model")
    n = 1 if size is None else size
    u = rng.random((n, 2))
    lam = _mixture_sample(u[:, 0], u[:, 1], density.cos_mixture)
    return float(lam[0]) if size is None else lam


def _block_uniforms(seed: int, block: int, n: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss)).random((n, _DRAWS_PER_RUN))


def _simulate_block(cfg: SimConfig, block: int, start: int, stop: int):
    u = _block_uniforms(cfg.seed, block, stop - start)
    sched = cfg.schedule
    if sched.fixed is not None:
        ctx = np.full(stop - start, JOINT_CONTEXTS.index(sched.fixed), dtype=np.int8)
    else:
        cum = np.cumsum(sched.probabilities)
        cum[-1] = 1.0
        ctx = np.minimum(np.searchsorted(cum, u[:, 0], side="right"), 3).astype(np.int8)
    lam = np.empty(stop - start)
    left = np.empty(stop - start, dtype=np.int8)
    right = np.empty(stop - start, dtype=np.int8)
    for i, (c, c2) in enumerate(JOINT_CONTEXTS):
        mask = ctx == i
        if not mask.any():
            continue
        dens = joint_density(cfg.model, c, c2)
        lam[mask] = _mixture_sample(u[mask, 1], u[mask, 2], dens.cos_mixture)
        left[mask] = observable_array(lam[mask], cfg.model.angles[c], "left")
        right[mask] = observable_array(lam[mask], cfg.model.angles[c2], "right")
    return lam, ctx, left, right


def simulate(cfg: SimConfig, n_jobs: int = 1) -> SimulationResult:
    """Run the model ``cfg.runs`` times and tabulate the measured cells.

    Each run picks a joint context from the schedule, draws lam from that
    context's mixture density and records the two deterministic outcomes.
    The unmeasured settings stay unknown in the returned table.
    """
    n = cfg.runs
    bounds = [(b, b * BLOCK_SIZE, min(n, (b + 1) * BLOCK_SIZE)) for b in range(math.ceil(n / BLOCK_SIZE))]
    if n_jobs > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(lambda args: _simulate_block(cfg, *args), bounds))
    else:
        parts = [_simulate_block(cfg, *args) for args in bounds]
    lam, ctx, left, right = (np.concatenate(x) for x in zip(*parts))
    left_setting = np.array([LEFT.index(c) for c, _ in JOINT_CONTEXTS])[ctx]
    right_setting = np.array([RIGHT.index(c2) for _, c2 in JOINT_CONTEXTS])[ctx]
    table = Table.from_measurements(left_setting, left, right_setting, right)
    for arr in (lam, ctx, left, right):
        arr.flags.writeable = False
    return SimulationResult(table, lam, ctx, left, right, cfg)


# ---------------------------------------------------------------- analysis

def contextual_quad(t: Table) -> CorrelationQuad:
    """Correlations of the four joint contexts, each over its own measured runs."""
    return CorrelationQuad(*(float(context_stats_joint(t, c, c2).average) for c, c2 in JOINT_CONTEXTS))


def _num(x) -> float:
    return float(f"{float(x):.12g}")


def analyze(t: Table) -> dict:
    """Interval, contextual and naive statistics plus contextual CHSH values."""
    report = ds_report(t)
    try:
        quad = contextual_quad(t)
    except ValidationError:
        report["chsh"] = None
    else:
        values = chsh_all_variants(quad)
        best, name = chsh_max(quad)
        report["chsh"] = {
            "semantics": "contextual",
            "correlations": dict(zip(("AB", "AB'", "A'B", "A'B'"), map(_num, quad.values()))),
            "f": _num(chsh_f(quad)),
            "variants": dict(zip(variant_names(), map(_num, values))),
            "max": _num(best),
            "max_variant": name,
        }
    report["naive"] = {
        "frequency": {
            s.value: {"+": _num(frequency(t, s, 1)), "-": _num(frequency(t, s, -1))}
            for s in (*LEFT, *RIGHT)
        },
        "correlation": {
            c.value + c2.value: _num(table_correlation(t, c, c2)) for c, c2 in JOINT_CONTEXTS
        },
    }
    return report


# -------------------------------------------------------------------- scan

SCAN_HEADER = ("theta_deg", "p_pp", "p_pm", "corr", "chsh_variant_max")


def scan(step_deg: float, stop_deg: float = 360.0) -> List[Tuple[float, float, float, float, float]]:
    """Analytic curves over theta in [0, stop_deg] in ``step_deg`` steps.

    ``p_pp``, ``p_pm`` and ``corr`` are for a left/right pair whose angles
    differ by theta.  ``chsh_variant_max`` evaluates the equally spaced
    configuration A = 0, B = theta, A' = 2 theta, B' = 3 theta.
    """
    if not step_deg > 0 or not math.isfinite(step_deg):
        raise ValidationError("scan step must be a positive number of degrees")
    count = int(math.floor(stop_deg / step_deg + 1e-9)) + 1
    if count < 1:
        raise ValidationError("empty angle grid")
    rows = []
    for i in range(count):
        theta = i * step_deg
        cfg = ModelConfig.from_degrees(a=0.0, b=theta, a_prime=2 * theta, b_prime=3 * theta)
        p_pp = joint_prob(cfg, Setting.A, 1, Setting.B, 1)
        p_pm = joint_prob(cfg, Setting.A, 1, Setting.B, -1)
        corr = correlation(cfg, Setting.A, Setting.B)
        rows.append((theta, p_pp, p_pm, corr, max(chsh_all_variants(correlation_quad(cfg)))))
    return rows


def format_scan_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCAN_HEADER)
    for theta, *values in rows:
        writer.writerow([f"{theta:.12g}", *(f"{v:.12g}" for v in values)])
    return buf.getvalue()
