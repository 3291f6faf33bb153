"""Spectral flow of ``(1 - s) H_I + s H_P`` and the positivity machinery.

Covers eigenvalue sweeps and gap tracking, entrywise positivity of the
semigroup ``exp(-a H)``, the Lie-Trotter product of ladder exponentials and
the closed-form matrix element ``<m| exp(b a^dagger) exp(conj(b) a) |n>``.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .fock import BasisIndexer, CoherentParams, annihilation, build_H

DEGENERACY_RTOL = 1e-8
UNDERFLOW_FLOOR = 1e-300


def default_grid(points: int = 101, stop: float = 0.99, include_endpoint: bool = True) -> np.ndarray:
    """``points`` uniform values on ``[0, stop]``, plus ``s = 1``."""
    grid = np.linspace(0.0, stop, points)
    return np.append(grid, 1.0) if include_endpoint else grid


@dataclass(frozen=True)
class SpectralSample:
    s: float
    eigenvalues: np.ndarray
    gap: float
    min_spacing: float
    degenerate: bool

    @property
    def diameter(self) -> float:
        return float(self.eigenvalues[-1] - self.eigenvalues[0])


def spectral_flow(
    HI: np.ndarray, HP: np.ndarray, grid: Iterable[float], rtol: float = DEGENERACY_RTOL
) -> list[SpectralSample]:
    """Full eigendecomposition of the interpolated Hamiltonian on ``grid``.

    ``degenerate`` is set when the ground gap falls below ``rtol`` times the
    spectral diameter at that ``s``.
    """
    samples = []
    for s in grid:
        s = float(s)
        w = np.linalg.eigvalsh(build_H(s, HI, HP))
        spacings = np.diff(w)
        gap = float(spacings[0]) if len(w) > 1 else math.inf
        min_spacing = float(spacings.min()) if len(w) > 1 else math.inf
        threshold = rtol * max(w[-1] - w[0], 1.0)
        samples.append(SpectralSample(s, w, max(gap, 0.0), max(min_spacing, 0.0), gap < threshold))
    return samples


def gap_profile(samples: Sequence[SpectralSample]) -> tuple[float, float]:
    """Smallest ground gap over samples with ``s < 1`` and where it occurs."""
    inner = [smp for smp in samples if smp.s < 1.0]
    if not inner:
        raise ValueError("need at least one sample with s < 1")
    best = min(inner, key=lambda smp: smp.gap)
    return best.gap, best.s


def write_spectral_csv(path, samples: Sequence[SpectralSample], levels: int | None = None) -> None:
    """CSV rows ``s, E0, ..., E{k-1}, gap``."""
    k = min(len(smp.eigenvalues) for smp in samples)
    if levels is not None:
        k = min(k, levels)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", *[f"E{j}" for j in range(k)], "gap"])
        for smp in samples:
            writer.writerow([repr(smp.s), *[repr(float(e)) for e in smp.eigenvalues[:k]], repr(smp.gap)])


# --- matrix exponentials -------------------------------------------------


def expm_hermitian(H: np.ndarray, a: complex = 1.0) -> np.ndarray:
    """``exp(-a H)`` via ``V exp(-a w) V^dagger``."""
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-a * w)) @ V.conj().T


def is_metzler_generator(H: np.ndarray, atol: float = 0.0) -> bool:
    """True if ``-H`` is real with non-negative off-diagonal entries."""
    if np.abs(H.imag).max(initial=0.0) > atol:
        return False
    off = H.real - np.diag(np.diag(H.real))
    return bool(off.max(initial=0.0) <= atol)


def expm_metzler(H: np.ndarray, a: float = 1.0) -> np.ndarray:
    """``exp(-a H)`` for ``-H`` with non-negative off-diagonal entries.

    Shifts ``-a H`` by its smallest diagonal entry to obtain a non-negative
    matrix, then uses scaling and squaring on a Taylor series. Every
    intermediate sum has non-negative terms, so each entry of the result is
    accurate to a few ulps relative to itself, however small.
    """
    M = -a * np.asarray(H).real
    shift = np.diag(M).min()
    P = M - shift * np.eye(len(M))
    norm = np.abs(P).sum(axis=1).max()
    squarings = max(0, math.ceil(math.log2(norm))) if norm > 1 else 0
    B = P / 2.0**squarings
    result = np.eye(len(M))
    term = np.eye(len(M))
    for k in range(1, 1000):
        term = term @ B / k
        result = result + term
        if not np.any(term > 1e-17 * result):
            break
    result *= math.exp(shift / 2.0**squarings)
    for _ in range(squarings):
        result = result @ result
    return result


@dataclass(frozen=True)
class PositivityReport:
    a: float
    min_real: float
    max_abs_imag: float
    underflow_entries: int
    offdiag_max_abs: float
    route: str

    @property
    def positive(self) -> bool:
        """Positivity improving: every entry real and strictly positive."""
        return self.min_real > 0.0 and self.max_abs_imag < 1e-10


def semigroup_positivity(H: np.ndarray, a: float = 1.0, route: str = "auto") -> PositivityReport:
    """Entrywise sign report for ``exp(-a H)`` in the occupation basis.

    ``route`` is ``"eigh"``, ``"metzler"`` or ``"auto"`` (Metzler route when
    ``-H`` is sign-definite, eigendecomposition otherwise). Entries in
    ``(0, 1e-300)`` are counted as underflow-suspect but still positive.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if route == "auto":
        route = "metzler" if is_metzler_generator(H) else "eigh"
    if route == "metzler":
        if not is_metzler_generator(H):
            raise ValueError("metzler route needs real H with non-positive off-diagonals")
        E = expm_metzler(H, a).astype(complex)
    elif route == "eigh":
        E = expm_hermitian(H, a)
    else:
        raise ValueError(f"unknown route {route!r}")
    off = E - np.diag(np.diag(E))
    return PositivityReport(
        a=a,
        min_real=float(E.real.min()),
        max_abs_imag=float(np.abs(E.imag).max()),
        underflow_entries=int(np.count_nonzero((E.real > 0) & (E.real < UNDERFLOW_FLOOR))),
        offdiag_max_abs=float(np.abs(off).max(initial=0.0)),
        route=route,
    )


# --- Lie-Trotter product -------------------------------------------------


@dataclass(frozen=True)
class TrotterConfig:
    slices: int
    s: float

    def __post_init__(self):
        if self.slices < 1:
            raise ValueError("need at least one Trotter slice")
        if not 0.0 <= self.s < 1.0:
            raise ValueError("Trotter expansion needs 0 <= s < 1")

    def betas(self, params: CoherentParams) -> np.ndarray:
        return (1.0 - self.s) * np.asarray(params.alphas) / self.slices


def _nilpotent_exp(X: np.ndarray) -> np.ndarray:
    """``exp(X)`` for nilpotent ``X``; the series stops once a power vanishes."""
    result = np.eye(len(X), dtype=complex)
    term = np.eye(len(X), dtype=complex)
    for k in range(1, len(X) + 1):
        term = term @ X / k
        if not term.any():
            break
        result += term
    return result


def trotter_factor(
    HP: np.ndarray, indexer: BasisIndexer, params: CoherentParams, cfg: TrotterConfig
) -> np.ndarray:
    """One slice: diagonal weight times ``exp(b a^dagger) exp(conj(b) a)``."""
    hp = np.diag(HP)
    if np.abs(HP - np.diag(hp)).max(initial=0.0) > 0:
        raise ValueError("Trotter factorisation needs a diagonal H_P")
    M, s = cfg.slices, cfg.s
    occ = indexer.occupations
    number_part = (occ + np.abs(params.alphas) ** 2).sum(axis=1)
    diag = np.exp(-(s / M) * hp.real - ((1.0 - s) / M) * number_part)
    bracket = np.eye(indexer.dim, dtype=complex)
    for i, beta in enumerate(cfg.betas(params)):
        a = annihilation(indexer.cutoffs[i])
        single = _nilpotent_exp(beta * a.T) @ _nilpotent_exp(np.conj(beta) * a)
        bracket = bracket @ indexer.embed(single, i)
    return diag[:, None] * bracket


def trotter_product(
    HP: np.ndarray, indexer: BasisIndexer, params: CoherentParams, cfg: TrotterConfig
) -> np.ndarray:
    """``M``-th power of :func:`trotter_factor`, approximating ``exp(-H(s))``."""
    return np.linalg.matrix_power(trotter_factor(HP, indexer, params, cfg), cfg.slices)


def displacement_matrix_element(m: int, n: int, beta: complex) -> complex:
    """``<m| exp(beta a^dagger) exp(conj(beta) a) |n>`` in closed form.

    ``sqrt(m! n!) sum_k beta^(m-k) conj(beta)^(n-k) / (k! (m-k)! (n-k)!)``,
    evaluated with log-factorials so large ``m, n`` do not overflow early.
    """
    if m < 0 or n < 0:
        raise ValueError("occupation numbers must be non-negative")
    beta = complex(beta)
    if beta == 0:
        return complex(m == n)
    log_abs = math.log(abs(beta))
    phase = beta / abs(beta)
    half = 0.5 * (math.lgamma(m + 1) + math.lgamma(n + 1))
    total = 0j
    for k in range(min(m, n) + 1):
        log_mag = (
            half
            - math.lgamma(k + 1)
            - math.lgamma(m - k + 1)
            - math.lgamma(n - k + 1)
            + (m + n - 2 * k) * log_abs
        )
        if log_mag > 709:
            raise OverflowError(f"matrix element overflows for m={m}, n={n}, |beta|={abs(beta)}")
        total += math.exp(log_mag) * phase ** (m - k) * phase.conjugate() ** (n - k)
    return total
