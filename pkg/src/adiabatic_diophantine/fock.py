"""Truncated bosonic Fock spaces and the adiabatic Hamiltonians.

Operators are dense complex ``numpy`` arrays over the product basis of
occupation numbers. The flat index of ``(n_1, ..., n_K)`` is row-major with
mode 0 most significant, i.e. ``np.ravel_multi_index(n, cutoffs + 1)``.
Modes are 0-indexed in this API; mode ``i`` carries the unknown ``x{i+1}``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.stats import poisson

from .diophantine import Polynomial, evaluate

HERMITIAN_RTOL = 1e-12
DEFAULT_COHERENT_TOL = 1e-8


class TruncationError(ValueError):
    """Raised when the cutoff discards too much of a coherent state."""


@dataclass(frozen=True)
class BasisIndexer:
    """Bijection between flat indices and occupation tuples."""

    cutoffs: tuple[int, ...]

    def __post_init__(self):
        cutoffs = tuple(int(n) for n in self.cutoffs)
        if not cutoffs or any(n < 0 for n in cutoffs):
            raise ValueError("need at least one mode with a non-negative cutoff")
        object.__setattr__(self, "cutoffs", cutoffs)

    @classmethod
    def uniform(cls, modes: int, cutoff: int) -> BasisIndexer:
        return cls((cutoff,) * modes)

    @property
    def modes(self) -> int:
        return len(self.cutoffs)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(n + 1 for n in self.cutoffs)

    @property
    def dim(self) -> int:
        return math.prod(self.shape)

    def index(self, occupation: Sequence[int]) -> int:
        occupation = tuple(occupation)
        if len(occupation) != self.modes:
            raise ValueError(f"expected {self.modes} occupation numbers, got {len(occupation)}")
        for n, cap in zip(occupation, self.cutoffs):
            if not 0 <= n <= cap:
                raise IndexError(f"occupation {occupation} outside cutoffs {self.cutoffs}")
        return int(np.ravel_multi_index(occupation, self.shape))

    def occupation(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.dim:
            raise IndexError(f"index {index} outside [0, {self.dim})")
        return tuple(int(n) for n in np.unravel_index(index, self.shape))

    @cached_property
    def occupations(self) -> np.ndarray:
        """``(dim, K)`` integer array, row ``j`` is the tuple of index ``j``."""
        grids = np.indices(self.shape).reshape(self.modes, -1)
        return grids.T.copy()

    def embed(self, single: np.ndarray, mode: int) -> np.ndarray:
        """Lift a single-mode matrix to the product space."""
        if not 0 <= mode < self.modes:
            raise IndexError(f"mode {mode} out of range for {self.modes} modes")
        out = np.ones((1, 1), dtype=single.dtype)
        for k, size in enumerate(self.shape):
            out = np.kron(out, single if k == mode else np.eye(size))
        return out

    def basis_state(self, occupation: Sequence[int]) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(occupation)] = 1.0
        return psi


@dataclass(frozen=True)
class CoherentParams:
    """Coherent amplitudes ``alpha_i``, one per mode.

    Every ``alpha_i`` must be non-zero. ``moduli`` and ``thetas`` follow the
    convention ``alpha = exp(-1j * theta) * |alpha|``.
    """

    alphas: tuple[complex, ...]
    max_weight: float = field(default=0.5, compare=False)

    def __post_init__(self):
        alphas = tuple(complex(a) for a in np.atleast_1d(self.alphas))
        if not alphas:
            raise ValueError("need at least one coherent amplitude")
        if any(a == 0 for a in alphas):
            raise ValueError("coherent amplitudes must be non-zero (H_I would commute with H_P)")
        object.__setattr__(self, "alphas", alphas)

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.alphas)

    @property
    def thetas(self) -> np.ndarray:
        return -np.angle(self.alphas)

    def is_real_positive(self) -> bool:
        return all(a.imag == 0 and a.real > 0 for a in self.alphas)

    def dominant_weight(self, indexer: BasisIndexer) -> float:
        """Largest product Poisson weight over the truncated basis."""
        weight = 1.0
        for a, cap in zip(self.moduli, indexer.cutoffs):
            weight *= poisson.pmf(np.arange(cap + 1), a**2).max()
        return float(weight)

    def validate(self, indexer: BasisIndexer) -> None:
        if len(self.alphas) != indexer.modes:
            raise ValueError(f"{len(self.alphas)} amplitudes for {indexer.modes} modes")
        w = self.dominant_weight(indexer)
        if w > self.max_weight:
            raise ValueError(
                f"initial state has a dominant component (weight {w:.4g} > {self.max_weight}); "
                "increase |alpha|"
            )


def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1)


def ladder_operators(indexer: BasisIndexer, mode: int) -> tuple[np.ndarray, np.ndarray]:
    """``(a_i, a_i^dagger)`` on the product space.

    The truncation sets ``a^dagger |N_i> = 0``, so ``[a, a^dagger]`` equals the
    identity except on the top level of mode ``i`` where it is ``-N_i``.
    """
    if not 0 <= mode < indexer.modes:
        raise IndexError(f"mode {mode} out of range for {indexer.modes} modes")
    a = indexer.embed(annihilation(indexer.cutoffs[mode]), mode).astype(complex)
    return a, a.conj().T.copy()


def number_operator(indexer: BasisIndexer, mode: int) -> np.ndarray:
    return np.diag(indexer.occupations[:, mode].astype(float)).astype(complex)


def coherent_state(
    indexer: BasisIndexer, params: CoherentParams, tol: float = DEFAULT_COHERENT_TOL
) -> tuple[np.ndarray, float]:
    """Truncated product coherent state and the probability weight it discards.

    The returned vector is renormalised. Raises :class:`TruncationError` when
    the discarded weight exceeds ``tol``.
    """
    params.validate(indexer)
    psi = np.ones(1, dtype=complex)
    log_kept = 0.0
    for alpha, cap in zip(params.alphas, indexer.cutoffs):
        n = np.arange(cap + 1)
        log_fact = np.array([math.lgamma(k + 1) for k in n])
        amps = np.exp(-abs(alpha) ** 2 / 2 - 0.5 * log_fact) * alpha**n
        psi = np.kron(psi, amps)
        log_kept += math.log1p(-poisson.sf(cap, abs(alpha) ** 2))
    discarded = -math.expm1(log_kept)
    if discarded > tol:
        raise TruncationError(
            f"cutoffs {indexer.cutoffs} discard coherent weight {discarded:.3g} > {tol:.3g}"
        )
    return psi / np.linalg.norm(psi), discarded


def build_HI(indexer: BasisIndexer, params: CoherentParams) -> np.ndarray:
    """``sum_i (a_i^dagger - conj(alpha_i)) (a_i - alpha_i)``."""
    params.validate(indexer)
    eye = np.eye(indexer.dim)
    H = np.zeros((indexer.dim, indexer.dim), dtype=complex)
    for i, alpha in enumerate(params.alphas):
        a, ad = ladder_operators(indexer, i)
        H += (ad - np.conj(alpha) * eye) @ (a - alpha * eye)
    return _hermitize(H)


def hp_diagonal(indexer: BasisIndexer, p: Polynomial) -> list[int]:
    """Exact integer values ``D(n)^2`` in basis order."""
    if p.arity != indexer.modes:
        raise ValueError(f"polynomial arity {p.arity} != {indexer.modes} modes")
    return [evaluate(p, row) ** 2 for row in indexer.occupations.tolist()]


def build_HP(indexer: BasisIndexer, p: Polynomial) -> np.ndarray:
    """Diagonal operator with entries ``D(n_1, ..., n_K)^2``."""
    exact = hp_diagonal(indexer, p)
    try:
        diag = np.array([float(v) for v in exact])
    except OverflowError as exc:
        raise OverflowError("D(n)^2 too large for double precision") from exc
    if not np.all(np.isfinite(diag)):
        raise OverflowError("D(n)^2 too large for double precision")
    return np.diag(diag).astype(complex)


def build_H(s: float, HI: np.ndarray, HP: np.ndarray) -> np.ndarray:
    """Interpolated Hamiltonian ``(1 - s) H_I + s H_P``."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"reduced time s={s} outside [0, 1]")
    return (1.0 - s) * HI + s * HP


def add_symmetry_breaking(
    HP: np.ndarray, indexer: BasisIndexer, gamma: complex, mode: int = 0
) -> np.ndarray:
    """``H_P + gamma a_i^dagger + conj(gamma) a_i``; ``gamma = 0`` is a no-op."""
    if gamma == 0:
        return HP
    a, ad = ladder_operators(indexer, mode)
    return _hermitize(HP + gamma * ad + np.conj(gamma) * a)


def phase_transform(op: np.ndarray, indexer: BasisIndexer, thetas: Sequence[float]) -> np.ndarray:
    """``U^dagger op U`` with ``U = exp(i sum_i theta_i n_i)``.

    Under this map ``a_i -> exp(i theta_i) a_i``, so a Hamiltonian built with
    ``alpha_i = exp(i theta_i) |alpha_i|`` becomes the one built with
    ``|alpha_i|``.
    """
    thetas = np.broadcast_to(np.asarray(thetas, dtype=float), (indexer.modes,))
    u = np.exp(1j * (indexer.occupations @ thetas))
    return u.conj()[:, None] * op * u[None, :]


def to_real_frame(op: np.ndarray, indexer: BasisIndexer, params: CoherentParams) -> np.ndarray:
    """Phase-rotate ``op`` so complex ``alpha_i`` become ``|alpha_i|``."""
    return phase_transform(op, indexer, -params.thetas)


def is_hermitian(op: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    scale = np.abs(op).max()
    return bool(np.abs(op - op.conj().T).max() <= rtol * max(scale, np.finfo(float).tiny))


def _hermitize(op):
    return 0.5 * (op + op.conj().T)


def dump_operator(path, op: np.ndarray, threshold: float = 0.0) -> None:
    """Write non-zero entries as ``row col re im`` lines (1-based indices)."""
    rows, cols = np.nonzero(np.abs(op) > threshold)
    with open(path, "w") as fh:
        fh.write(f"% {op.shape[0]} {op.shape[1]} {len(rows)}\n")
        for r, c in zip(rows, cols):
            z = op[r, c]
            fh.write(f"{r + 1} {c + 1} {z.real:.17g} {z.imag:.17g}\n")
