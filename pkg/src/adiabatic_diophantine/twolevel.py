"""Two-state adiabatic model and the excited-state probability bound.

The initial Hamiltonian is diagonal in the fixed basis ``g(0) = (1, 0)``,
``e(0) = (0, 1)``. The final eigenbasis is rotated by ``chi`` with
``sin(chi)^2 = mixing = |<g(0)|e(T)>|^2``::

    g(T) = (cos chi, -sin chi),    e(T) = (sin chi, cos chi)
"""

from __future__ import annotations

import csv
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

_SQRT3 = math.sqrt(3.0)
# Commutator-free fourth-order Magnus coefficients and Gauss nodes.
_CF4_A1 = (3.0 - 2.0 * _SQRT3) / 12.0
_CF4_A2 = (3.0 + 2.0 * _SQRT3) / 12.0
_CF4_C1 = 0.5 - _SQRT3 / 6.0
_CF4_C2 = 0.5 + _SQRT3 / 6.0


@dataclass(frozen=True)
class TwoLevelProblem:
    mixing: float
    eps_g: float = 0.0
    eps_e: float = 1.0
    ups_g: float = 0.0
    ups_e: float = 1.0

    def __post_init__(self):
        if not self.eps_g < self.eps_e:
            raise ValueError("initial levels must satisfy eps_g < eps_e")
        if not self.ups_g < self.ups_e:
            raise ValueError("final levels must satisfy ups_g < ups_e")
        if not 0.0 < self.mixing < 1.0:
            raise ValueError("mixing must lie strictly inside (0, 1); endpoints commute otherwise")

    @property
    def chi(self) -> float:
        return math.asin(math.sqrt(self.mixing))

    def final_basis(self) -> tuple[np.ndarray, np.ndarray]:
        c, s = math.cos(self.chi), math.sin(self.chi)
        return np.array([c, -s]), np.array([s, c])

    def hamiltonians(self) -> tuple[np.ndarray, np.ndarray]:
        HI = np.diag([self.eps_g, self.eps_e]).astype(float)
        g, e = self.final_basis()
        HP = self.ups_g * np.outer(g, g) + self.ups_e * np.outer(e, e)
        return HI, HP


def check_condition(problem: TwoLevelProblem) -> bool:
    """True when ``|<g(0)|e(T)>|^2 <= 1/2``, i.e. the excited-state bound must hold."""
    return problem.mixing <= 0.5


def build_two_level(problem: TwoLevelProblem, T: float) -> Callable[[float], np.ndarray]:
    """``t -> (1 - t/T) H_I + (t/T) H_P`` for ``t`` in ``[0, T]``."""
    if T <= 0:
        raise ValueError("T must be positive")
    HI, HP = problem.hamiltonians()

    def hamiltonian(t):
        s = np.clip(np.asarray(t, dtype=float) / T, 0.0, 1.0)[..., None, None]
        return (1.0 - s) * HI + s * HP

    return hamiltonian


def _expm_2x2(H: np.ndarray, tau: float) -> np.ndarray:
    """Batched ``exp(-1j * tau * H)`` for real symmetric 2x2 ``H``."""
    h0 = 0.5 * (H[..., 0, 0] + H[..., 1, 1])
    hz = 0.5 * (H[..., 0, 0] - H[..., 1, 1])
    hx = H[..., 0, 1]
    r = np.hypot(hz, hx)
    c = np.cos(r * tau)
    sinc = tau * np.sinc(r * tau / np.pi)  # sin(r tau) / r, finite at r = 0
    out = np.empty(H.shape, dtype=complex)
    out[..., 0, 0] = c - 1j * sinc * hz
    out[..., 1, 1] = c + 1j * sinc * hz
    out[..., 0, 1] = -1j * sinc * hx
    out[..., 1, 0] = -1j * sinc * hx
    return np.exp(-1j * h0 * tau)[..., None, None] * out


def _step_unitaries(problem: TwoLevelProblem, T: float, t0: np.ndarray, dt: float) -> np.ndarray:
    """CF4 propagators for steps starting at the times ``t0``."""
    HI, HP = problem.hamiltonians()
    s1 = ((t0 + _CF4_C1 * dt) / T)[:, None, None]
    s2 = ((t0 + _CF4_C2 * dt) / T)[:, None, None]
    H1 = (1 - s1) * HI + s1 * HP
    H2 = (1 - s2) * HI + s2 * HP
    first = _expm_2x2(_CF4_A2 * H1 + _CF4_A1 * H2, dt)
    second = _expm_2x2(_CF4_A1 * H1 + _CF4_A2 * H2, dt)
    return second @ first


def _ordered_product(U: np.ndarray) -> np.ndarray:
    """``U[n-1] @ ... @ U[0]`` by pairwise reduction."""
    while len(U) > 1:
        if len(U) % 2:
            U = np.concatenate([U, np.eye(2, dtype=complex)[None]])
        U = U[1::2] @ U[0::2]
    return U[0]


def default_steps(T: float) -> int:
    return max(1000, math.ceil(20.0 * T))


def propagate(problem: TwoLevelProblem, T: float, steps: int | None = None) -> np.ndarray:
    """State at ``t = T`` starting from ``g(0)``."""
    psi0 = np.array([1.0, 0.0], dtype=complex)
    if T == 0:
        return psi0
    n = steps or default_steps(T)
    dt = T / n
    U = _ordered_product(_step_unitaries(problem, T, dt * np.arange(n), dt))
    return U @ psi0


@dataclass(frozen=True)
class SweepResult:
    T: np.ndarray
    ground: np.ndarray
    excited: np.ndarray

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["T", "ground_probability", "excited_probability"])
            for row in zip(self.T, self.ground, self.excited):
                writer.writerow([repr(float(v)) for v in row])


def default_T_grid(points: int = 200, lo: float = 1e-2, hi: float = 1e3) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), points)


def sweep_T(problem: TwoLevelProblem, Ts: Sequence[float] | None = None) -> SweepResult:
    """Final ground and excited probabilities (w.r.t. ``H_P``) for each ``T``."""
    Ts = default_T_grid() if Ts is None else np.asarray(Ts, dtype=float)
    if np.any(Ts <= 0):
        raise ValueError("T values must be positive")
    g, e = problem.final_basis()
    ground, excited = [], []
    for T in Ts:
        psi = propagate(problem, float(T))
        ground.append(abs(g @ psi) ** 2)
        excited.append(abs(e @ psi) ** 2)
    return SweepResult(Ts, np.array(ground), np.array(excited))


@dataclass(frozen=True)
class TwoLevelFlow:
    t: np.ndarray
    rate: np.ndarray  # integrand 2<e|dH/dt|g> / (E_e - E_g)
    omega: np.ndarray  # accumulated angle, omega(0) = 0
    phi: np.ndarray
    theta: np.ndarray

    @property
    def sign_constant(self) -> bool:
        return bool(np.all(self.rate > 0) or np.all(self.rate < 0))

    @property
    def min_abs_rate(self) -> float:
        return float(np.abs(self.rate).min())

    @property
    def omega_max(self) -> float:
        return float(self.omega.max())

    def within_first_quadrant(self, atol: float = 1e-9) -> bool:
        return bool(np.all(self.omega >= -atol) and np.all(self.omega <= math.pi / 2 + atol))

    @property
    def bound(self) -> np.ndarray:
        """``sin^2(omega / 2)`` along the flow."""
        return np.sin(self.omega / 2.0) ** 2

    @property
    def excited(self) -> np.ndarray:
        """``sin^2(phi)``: instantaneous excited-state probability."""
        return np.sin(self.phi) ** 2


def instantaneous_eigenbasis(H: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvalues and phase-fixed ground/excited eigenvectors of a batch of 2x2 ``H``.

    Each eigenvector is made real with its first non-negligible component
    positive.
    """
    w, V = np.linalg.eigh(H)
    V = V.real
    for col in range(2):
        vec = V[..., :, col]
        lead = np.where(np.abs(vec[..., 0]) > 1e-12, vec[..., 0], vec[..., 1])
        V[..., :, col] *= np.where(lead < 0, -1.0, 1.0)[..., None]
    return w, V[..., :, 0], V[..., :, 1]


def flow_integral(problem: TwoLevelProblem, T: float, points: int = 10_000, substeps: int = 4) -> TwoLevelFlow:
    """Accumulate the eigenbasis rotation angle and track the evolving state.

    ``omega(tau)`` is the running trapezoid integral of the rotation rate. The
    state is propagated between grid points with ``substeps`` CF4 steps and
    decomposed as ``cos(phi) g(t) + exp(-i theta) sin(phi) e(t)``.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    HI, HP = problem.hamiltonians()
    t = np.linspace(0.0, T, points)
    H = build_two_level(problem, T)(t)
    w, g, e = instantaneous_eigenbasis(H)
    gaps = w[:, 1] - w[:, 0]
    if gaps.min() < 1e-12:
        raise ValueError("instantaneous degeneracy along the flow")
    dH = (HP - HI) / T
    rate = 2.0 * np.einsum("ti,ij,tj->t", e, dH, g) / gaps
    omega = np.concatenate([[0.0], np.cumsum(0.5 * (rate[1:] + rate[:-1]) * np.diff(t))])

    dt = (t[1] - t[0]) / substeps
    starts = (t[:-1, None] + dt * np.arange(substeps)[None, :]).ravel()
    U = _step_unitaries(problem, T, starts, dt).reshape(points - 1, substeps, 2, 2)
    psi = np.empty((points, 2), dtype=complex)
    psi[0] = (1.0, 0.0)
    for k in range(points - 1):
        state = psi[k]
        for j in range(substeps):
            state = U[k, j] @ state
        psi[k + 1] = state
    cg = np.einsum("ti,ti->t", g, psi)
    ce = np.einsum("ti,ti->t", e, psi)
    phi = np.arctan2(np.abs(ce), np.abs(cg))
    theta = -(np.angle(ce) - np.angle(cg))
    return TwoLevelFlow(t=t, rate=rate, omega=omega, phi=phi, theta=theta)


FIG1_PRESETS = {
    "A": TwoLevelProblem(mixing=0.75),
    "B": TwoLevelProblem(mixing=0.5),
}
