"""The outer decision loop and finite-sample measurement simulation.

``decide`` doubles the evolution time until one occupation state carries
more than half of the probability, then reads the answer off that state:
a zero of ``D`` there means a solution exists, anything else means none
exists within the truncated box.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .diophantine import Polynomial, evaluate
from .evolve import (
    EvolutionRecord,
    spectral_diameter,
    step_extrapolate,
    suggested_steps,
    truncation_check,
)
from .fock import (
    BasisIndexer,
    CoherentParams,
    TruncationError,
    add_symmetry_breaking,
    build_HI,
    build_HP,
    coherent_state,
    hp_diagonal,
)
from .spectral import default_grid, gap_profile, spectral_flow

log = logging.getLogger(__name__)

SOLUTION = "solution-exists"
NO_SOLUTION = "no-solution"
INCONCLUSIVE = "inconclusive"

EXCITED_CAP_SLACK = 1e-3


# --- measurement ---------------------------------------------------------


@dataclass(frozen=True)
class Dominant:
    occupation: tuple[int, ...]
    probability: float
    tie: bool


def max_probability(psi: np.ndarray, indexer: BasisIndexer, tie_tol: float = 1e-12) -> Dominant:
    """Most probable occupation tuple; ties go to the lexicographically smallest."""
    p = np.abs(psi) ** 2
    best = p.max()
    # Flat order is lexicographic in the occupation tuple.
    near = np.flatnonzero(p >= best - tie_tol)
    return Dominant(indexer.occupation(int(near[0])), float(best), len(near) > 1)


@dataclass(frozen=True)
class SamplingPlan:
    epsilon: float
    delta: float
    repetitions: int

    def __post_init__(self):
        if self.repetitions <= _weak_law_bound(self.epsilon, self.delta):
            raise ValueError(
                f"L={self.repetitions} does not exceed 1/(4 eps^2 delta) for "
                f"eps={self.epsilon}, delta={self.delta}"
            )


def _weak_law_bound(epsilon, delta) -> Fraction:
    # Decimal inputs such as 0.1 are taken at face value, not as binary floats.
    eps = Fraction(repr(float(epsilon)))
    dlt = Fraction(repr(float(delta)))
    return 1 / (4 * eps**2 * dlt)


def plan_repetitions(epsilon: float, delta: float) -> SamplingPlan:
    """Smallest ``L`` with ``L > 1 / (4 epsilon^2 delta)``."""
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise ValueError("need 0 < epsilon < 1 and 0 < delta < 1")
    bound = _weak_law_bound(epsilon, delta)
    return SamplingPlan(epsilon, delta, math.floor(bound) + 1)


@dataclass(frozen=True)
class SampleResult:
    counts: dict[tuple[int, ...], int]
    repetitions: int
    seed: int | None

    @property
    def frequencies(self) -> dict[tuple[int, ...], Fraction]:
        return {k: Fraction(v, self.repetitions) for k, v in self.counts.items()}

    @property
    def dominant(self) -> tuple[tuple[int, ...], float]:
        occ = min(self.counts, key=lambda k: (-self.counts[k], k))
        return occ, self.counts[occ] / self.repetitions

    def exceeds(self, threshold: float = 0.5) -> bool:
        return self.dominant[1] > threshold


def simulate_measurements(
    psi: np.ndarray, indexer: BasisIndexer, plan: SamplingPlan, seed: int | None = None
) -> SampleResult:
    """Draw ``plan.repetitions`` occupation-basis outcomes from ``|psi|^2``."""
    p = np.abs(psi) ** 2
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("state is not normalised")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(plan.repetitions, p / p.sum())
    hist = {indexer.occupation(int(j)): int(counts[j]) for j in np.flatnonzero(counts)}
    return SampleResult(hist, plan.repetitions, seed)


# --- decision ------------------------------------------------------------


@dataclass
class ProblemConfig:
    """Everything ``decide`` needs besides the polynomial."""

    alphas: Sequence[complex] | None = None
    cutoff: int | None = None
    gamma: complex = 0.0
    gamma_mode: int = 0
    t0: float = 1.0
    doublings: int = 12
    margin: float = 0.02
    steps: int | None = None
    steps_per_unit: float = 100.0
    min_steps: int = 64
    max_steps: int = 2000
    extrapolation_tol: float = 1e-3
    truncation_cutoffs: Sequence[int] | None = None
    truncation_tol: float = 1e-4
    coherent_tol: float = 1e-5
    gap_points: int = 101
    sampling: bool = False
    epsilon: float = 0.1
    delta: float = 0.05
    seed: int = 0

    def resolved(self, arity: int) -> ProblemConfig:
        """Copy with per-instance defaults filled in and checked."""
        alphas = tuple(complex(a) for a in (self.alphas if self.alphas is not None else [1.0] * arity))
        if len(alphas) == 1 and arity > 1:
            alphas = alphas * arity
        if len(alphas) != arity:
            raise ValueError(f"{len(alphas)} alphas for {arity} unknowns")
        cutoff = self.cutoff if self.cutoff is not None else default_cutoff(alphas, arity)
        if cutoff < 1:
            raise ValueError("cutoff must be at least 1")
        if self.t0 <= 0 or self.doublings < 0:
            raise ValueError("need t0 > 0 and doublings >= 0")
        if not 0 <= self.margin < 0.5:
            raise ValueError("margin must lie in [0, 0.5)")
        cfg = ProblemConfig(**{**asdict(self), "alphas": alphas, "cutoff": int(cutoff)})
        if cfg.truncation_cutoffs is not None:
            cfg.truncation_cutoffs = tuple(int(n) for n in cfg.truncation_cutoffs)
        return cfg

    def to_dict(self) -> dict:
        out = asdict(self)
        if out["alphas"] is not None:
            out["alphas"] = [_complex_json(a) for a in out["alphas"]]
        out["gamma"] = _complex_json(out["gamma"])
        if out["truncation_cutoffs"] is not None:
            out["truncation_cutoffs"] = list(out["truncation_cutoffs"])
        return out


def _complex_json(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def default_cutoff(alphas: Sequence[complex], arity: int, dim_cap: int = 400) -> int:
    """Largest per-mode cutoff (at most 16) keeping the dimension under ``dim_cap``."""
    spread = 4 * max(math.ceil(abs(a) ** 2) for a in alphas)
    fit = int(math.floor(dim_cap ** (1.0 / max(arity, 1)) + 1e-9)) - 1
    return max(spread, min(16, fit))


@dataclass
class Verdict:
    decision: str
    witness: tuple[int, ...] | None
    probability: float | None
    T: float | None
    dominant: tuple[int, ...] | None
    d_value: int | None
    diagnostics: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    seed: int = 0
    equation: str = ""

    def to_dict(self) -> dict:
        return {
            "decision": self.decision,
            "witness": list(self.witness) if self.witness is not None else None,
            "probability": self.probability,
            "T": self.T,
            "dominant": list(self.dominant) if self.dominant is not None else None,
            "d_value": self.d_value,
            "equation": self.equation,
            "diagnostics": self.diagnostics,
            "config": self.config,
            "seed": self.seed,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), default=_json_default, **kwargs)


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _instance_builder(p: Polynomial, cfg: ProblemConfig):
    params = CoherentParams(cfg.alphas)

    def build(N):
        indexer = BasisIndexer.uniform(p.arity, N)
        HI = build_HI(indexer, params)
        HP = build_HP(indexer, p)
        HP = add_symmetry_breaking(HP, indexer, cfg.gamma, cfg.gamma_mode)
        psi0, _ = coherent_state(indexer, params, tol=cfg.coherent_tol)
        return indexer, HI, HP, psi0

    return build


def box_minimizers(p: Polynomial, indexer: BasisIndexer) -> tuple[int, list[tuple[int, ...]]]:
    """Minimum of ``D^2`` over the box and every tuple attaining it."""
    diag = hp_diagonal(indexer, p)
    lowest = min(diag)
    return lowest, [indexer.occupation(j) for j, v in enumerate(diag) if v == lowest]


def decide(p: Polynomial, cfg: ProblemConfig | None = None) -> Verdict:
    """Run the adiabatic decision procedure on ``D = p`` inside the truncated box."""
    cfg = (cfg or ProblemConfig()).resolved(p.arity)
    build = _instance_builder(p, cfg)
    indexer, HI, HP, psi0 = build(cfg.cutoff)
    lowest, minimizers = box_minimizers(p, indexer)

    samples = spectral_flow(HI, HP, default_grid(cfg.gap_points, include_endpoint=False))
    gap_min, gap_at = gap_profile(samples)
    diameter = spectral_diameter(HI, HP)
    threshold = 0.5 + cfg.margin
    plan = plan_repetitions(cfg.epsilon, cfg.delta) if cfg.sampling else None

    diagnostics = {
        "cutoff": cfg.cutoff,
        "dimension": indexer.dim,
        "gap_min": gap_min,
        "gap_argmin": gap_at,
        "spectral_diameter": diameter,
        "box_min_d2": lowest,
        "box_minimizers": minimizers,
        "history": [],
        "excited_cap_violations": [],
        "extrapolation": None,
        "truncation": None,
    }

    def verdict(decision, **kw):
        return Verdict(
            decision=decision,
            diagnostics=diagnostics,
            config=cfg.to_dict(),
            seed=cfg.seed,
            equation=str(p),
            **{"witness": None, "probability": None, "T": None, "dominant": None, "d_value": None, **kw},
        )

    for j in range(cfg.doublings + 1):
        T = cfg.t0 * 2.0**j
        n = cfg.steps or suggested_steps(T, diameter, cfg.steps_per_unit, cfg.min_steps, cfg.max_steps)
        ext = step_extrapolate(HI, HP, psi0, T, (n, 2 * n), tol=cfg.extrapolation_tol, checkpoints=1)
        final: EvolutionRecord = ext.records[-1]
        dom = max_probability(final.final_state, indexer)
        probs = final.final_probabilities
        entry = {
            "T": T,
            "steps": [n, 2 * n],
            "dominant": dom.occupation,
            "probability": dom.probability,
            "extrapolated": ext.extrapolated,
            "spread": ext.spread,
            "tie": dom.tie,
            "norm_drift": max(r.norm_drift for r in ext.records),
        }
        if cfg.sampling:
            sample = simulate_measurements(final.final_state, indexer, plan, seed=cfg.seed + j)
            entry["sampled"] = {"dominant": sample.dominant[0], "frequency": sample.dominant[1]}
        diagnostics["history"].append(entry)
        for k in np.flatnonzero(probs > 0.5 + EXCITED_CAP_SLACK):
            occ = indexer.occupation(int(k))
            if occ not in minimizers:
                diagnostics["excited_cap_violations"].append({"T": T, "occupation": occ, "probability": float(probs[k])})
        log.info("T=%g dominant=%s P=%.6f", T, dom.occupation, ext.extrapolated)

        if not all(r.valid for r in ext.records):
            diagnostics["reason"] = "norm drift exceeded tolerance"
            return verdict(INCONCLUSIVE, T=T)

        if cfg.sampling:
            occ, score = entry["sampled"]["dominant"], entry["sampled"]["frequency"]
        else:
            occ, score = dom.occupation, ext.extrapolated
        if score <= threshold:
            continue

        diagnostics["extrapolation"] = {
            "levels": list(ext.levels),
            "probabilities": ext.probabilities.tolist(),
            "extrapolated": ext.extrapolated,
            "spread": ext.spread,
            "converged": ext.converged,
        }
        if not ext.converged:
            diagnostics["reason"] = "step extrapolation did not converge"
            return verdict(INCONCLUSIVE, T=T, dominant=occ, probability=score)

        cutoffs = cfg.truncation_cutoffs or (cfg.cutoff - max(1, cfg.cutoff // 4), cfg.cutoff)
        try:
            trunc = truncation_check(build, T, cutoffs, steps=2 * n, tol=cfg.truncation_tol, occupation=occ)
            diagnostics["truncation"] = {
                "cutoffs": list(trunc.cutoffs),
                "probabilities": trunc.probabilities.tolist(),
                "disagreements": trunc.disagreements.tolist(),
                "converged": trunc.converged,
            }
            if not trunc.converged:
                diagnostics["reason"] = "truncation sweep did not converge"
                return verdict(INCONCLUSIVE, T=T, dominant=occ, probability=score)
        except TruncationError as exc:
            diagnostics["truncation"] = {"cutoffs": list(cutoffs), "error": str(exc)}

        d_value = evaluate(p, occ)
        if d_value == 0:
            return verdict(SOLUTION, witness=occ, T=T, dominant=occ, probability=score, d_value=0)
        return verdict(NO_SOLUTION, T=T, dominant=occ, probability=score, d_value=d_value)

    diagnostics["reason"] = "evolution-time budget exhausted"
    last = diagnostics["history"][-1]
    return verdict(INCONCLUSIVE, T=last["T"], dominant=last["dominant"], probability=last["extrapolated"])


@dataclass
class GuardReport:
    active: bool
    minimum: int
    minimizers: list[tuple[int, ...]]
    verdicts: dict[complex, Verdict] = field(default_factory=dict)

    @property
    def witnesses(self) -> dict[complex, tuple[int, ...] | None]:
        return {g: v.witness for g, v in self.verdicts.items()}

    @property
    def stable(self) -> bool:
        """Every perturbed run reached the same decision."""
        return len({v.decision for v in self.verdicts.values()}) <= 1


def degeneracy_guard(
    p: Polynomial, cfg: ProblemConfig | None = None, gammas: Sequence[complex] = (0.1, 0.05, 0.02)
) -> GuardReport:
    """Detect a tied minimum of ``D^2`` in the box and, if found, sweep ``gamma``."""
    cfg = (cfg or ProblemConfig()).resolved(p.arity)
    indexer = BasisIndexer.uniform(p.arity, cfg.cutoff)
    lowest, minimizers = box_minimizers(p, indexer)
    report = GuardReport(active=len(minimizers) > 1, minimum=lowest, minimizers=minimizers)
    if report.active:
        for g in gammas:
            report.verdicts[g] = decide(p, ProblemConfig(**{**asdict(cfg), "gamma": g}))
    return report
