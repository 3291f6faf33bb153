"""Time-dependent Schroedinger integration for ``H(t) = (1 - t/T) H_I + (t/T) H_P``.

Each step applies the exact unitary of the Hamiltonian frozen at the step
midpoint, which is second order in ``dt`` and unitary up to eigensolver
roundoff.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .fock import BasisIndexer

NORM_TOL = 1e-9
DEFAULT_CHECKPOINTS = 64


@dataclass(frozen=True)
class EvolutionConfig:
    T: float
    steps: int = 1000
    levels: tuple[int, ...] = ()
    cutoffs: tuple[int, ...] = ()
    checkpoints: int = DEFAULT_CHECKPOINTS
    norm_tol: float = NORM_TOL

    def __post_init__(self):
        if self.T < 0:
            raise ValueError("evolution time must be non-negative")
        if self.steps < 1:
            raise ValueError("need at least one step")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError(f"extrapolation levels must be strictly increasing: {self.levels}")
        if self.checkpoints < 1:
            raise ValueError("need at least one checkpoint")


@dataclass
class EvolutionRecord:
    final_state: np.ndarray
    times: np.ndarray
    probabilities: np.ndarray  # (checkpoints, dim)
    norms: np.ndarray
    T: float
    steps: int
    norm_tol: float = NORM_TOL

    @property
    def norm_drift(self) -> float:
        return float(np.abs(self.norms - 1.0).max())

    @property
    def valid(self) -> bool:
        return self.norm_drift <= self.norm_tol

    @property
    def final_probabilities(self) -> np.ndarray:
        return np.abs(self.final_state) ** 2


def _as_real_if_possible(H):
    return H.real.copy() if not np.any(H.imag) else H


def suggested_steps(T: float, diameter: float, per_unit: float = 100.0, lo: int = 64, hi: int = 2000) -> int:
    """``per_unit * T * diameter`` clipped to ``[lo, hi]``."""
    return int(min(hi, max(lo, math.ceil(per_unit * T * diameter))))


def spectral_diameter(HI: np.ndarray, HP: np.ndarray) -> float:
    """Upper bound on the spectral spread of every interpolated Hamiltonian."""
    spans = []
    for H in (HI, HP):
        w = np.linalg.eigvalsh(H)
        spans.append((w[0], w[-1]))
    return float(max(hi for _, hi in spans) - min(lo for lo, _ in spans))


def evolve(
    HI: np.ndarray, HP: np.ndarray, psi0: np.ndarray, cfg: EvolutionConfig
) -> EvolutionRecord:
    """Propagate ``psi0`` from ``t = 0`` to ``t = T``."""
    norm0 = np.linalg.norm(psi0)
    if abs(norm0 - 1.0) > cfg.norm_tol:
        raise ValueError(f"initial state norm {norm0!r} is not 1")
    psi = np.asarray(psi0, dtype=complex).copy()
    n_ckpt = min(cfg.checkpoints, cfg.steps)
    ckpt_steps = np.unique(np.round(np.linspace(0, cfg.steps, n_ckpt + 1)).astype(int))
    times, probs, norms = [], [], []

    def record(k):
        times.append(cfg.T * k / cfg.steps)
        p = np.abs(psi) ** 2
        probs.append(p)
        norms.append(math.sqrt(p.sum()))

    record(0)
    if cfg.T > 0:
        HI_ = _as_real_if_possible(HI)
        HP_ = _as_real_if_possible(HP)
        dt = cfg.T / cfg.steps
        next_ckpt = 1
        for k in range(cfg.steps):
            s = (k + 0.5) / cfg.steps
            w, V = np.linalg.eigh((1.0 - s) * HI_ + s * HP_)
            psi = V @ (np.exp(-1j * w * dt) * (V.conj().T @ psi))
            if k + 1 == ckpt_steps[next_ckpt]:
                record(k + 1)
                next_ckpt += 1
    else:
        for k in ckpt_steps[1:]:
            record(k)
    return EvolutionRecord(
        final_state=psi,
        times=np.array(times),
        probabilities=np.array(probs),
        norms=np.array(norms),
        T=cfg.T,
        steps=cfg.steps,
        norm_tol=cfg.norm_tol,
    )


@dataclass
class ExtrapolationResult:
    levels: tuple[int, ...]
    index: int
    probabilities: np.ndarray
    extrapolated: float
    spread: float
    tol: float
    records: list[EvolutionRecord] = field(repr=False, default_factory=list)

    @property
    def converged(self) -> bool:
        return self.spread <= self.tol


def step_extrapolate(
    HI: np.ndarray,
    HP: np.ndarray,
    psi0: np.ndarray,
    T: float,
    levels: Sequence[int],
    tol: float = 1e-3,
    index: int | None = None,
    checkpoints: int = DEFAULT_CHECKPOINTS,
) -> ExtrapolationResult:
    """Evolve at several step counts and extrapolate ``P(T)`` to ``dt -> 0``.

    The tracked basis index is ``index`` or, by default, the dominant state
    of the finest level. The extrapolated value is the intercept of a linear
    fit in ``dt^2``; ``spread`` is the range of the per-level values.
    """
    levels = tuple(int(n) for n in levels)
    if len(levels) < 2:
        raise ValueError("need at least two step levels")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError(f"levels must be strictly increasing: {levels}")
    records = [evolve(HI, HP, psi0, EvolutionConfig(T, n, checkpoints=checkpoints)) for n in levels]
    if index is None:
        index = int(np.argmax(records[-1].final_probabilities))
    probs = np.array([r.final_probabilities[index] for r in records])
    dt2 = np.array([(T / n) ** 2 for n in levels])
    if np.ptp(dt2) > 0:
        extrapolated = float(np.polyval(np.polyfit(dt2, probs, 1), 0.0))
    else:
        extrapolated = float(probs[-1])
    return ExtrapolationResult(
        levels=levels,
        index=index,
        probabilities=probs,
        extrapolated=extrapolated,
        spread=float(np.ptp(probs)),
        tol=tol,
        records=records,
    )


@dataclass
class TruncationReport:
    cutoffs: tuple[int, ...]
    occupation: tuple[int, ...]
    probabilities: np.ndarray
    disagreements: np.ndarray
    tol: float

    @property
    def converged(self) -> bool:
        return bool(self.disagreements[-1] < self.tol)


def truncation_check(
    build: Callable[[int], tuple[BasisIndexer, np.ndarray, np.ndarray, np.ndarray]],
    T: float,
    cutoffs: Sequence[int],
    steps: int | Callable[[float], int] = 1000,
    tol: float = 1e-4,
    occupation: Sequence[int] | None = None,
) -> TruncationReport:
    """Re-run one physical instance at increasing cutoffs.

    ``build(N)`` returns ``(indexer, H_I, H_P, psi0)`` at per-mode cutoff
    ``N``; construction errors (for example an over-truncated coherent state)
    propagate. ``P(T)`` of ``occupation`` (default: dominant tuple at the
    largest cutoff) is compared between successive cutoffs.
    """
    cutoffs = tuple(int(n) for n in cutoffs)
    if len(cutoffs) < 2:
        raise ValueError("need at least two cutoffs")
    finals = []
    for N in cutoffs:
        indexer, HI, HP, psi0 = build(N)
        n_steps = steps(T) if callable(steps) else steps
        rec = evolve(HI, HP, psi0, EvolutionConfig(T, n_steps, checkpoints=1))
        finals.append((indexer, rec.final_probabilities))
    if occupation is None:
        indexer, p = finals[-1]
        occupation = indexer.occupation(int(np.argmax(p)))
    occupation = tuple(occupation)
    values = []
    for indexer, p in finals:
        try:
            values.append(float(p[indexer.index(occupation)]))
        except IndexError:
            values.append(0.0)
    values = np.array(values)
    return TruncationReport(cutoffs, occupation, values, np.abs(np.diff(values)), tol)


def write_evolution_csv(path, record: EvolutionRecord, indexer: BasisIndexer, top_k: int = 5) -> None:
    """CSV rows ``t, norm, p(n...)`` for the ``top_k`` states at the final time."""
    top = np.argsort(-record.final_probabilities, kind="stable")[:top_k]
    labels = ["p(" + ",".join(map(str, indexer.occupation(int(j)))) + ")" for j in top]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "norm", *labels])
        for t, nrm, p in zip(record.times, record.norms, record.probabilities):
            writer.writerow([repr(float(t)), repr(float(nrm)), *[repr(float(p[j])) for j in top]])
