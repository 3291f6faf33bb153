"""The ten acceptance criteria, each reported as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary section at the
end lists every criterion.
"""

import cmath
import math

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.stats import binomtest

from adiabatic_diophantine import (
    BasisIndexer,
    CoherentParams,
    TrotterConfig,
    build_H,
    build_HI,
    build_HP,
    coherent_state,
    displacement_matrix_element,
    parse,
    plan_repetitions,
    search_box,
    semigroup_positivity,
    simulate_measurements,
    step_extrapolate,
    sweep_T,
    trotter_product,
    truncation_check,
)
from adiabatic_diophantine.fock import annihilation
from adiabatic_diophantine.protocol import NO_SOLUTION, SOLUTION, box_minimizers
from adiabatic_diophantine.spectral import default_grid, expm_hermitian, spectral_flow
from adiabatic_diophantine.twolevel import FIG1_PRESETS

from conftest import SHIPPED


def _instance(source, cutoff, alphas=None):
    p = parse(source)
    indexer = BasisIndexer.uniform(p.arity, cutoff)
    params = CoherentParams(alphas or [1.0] * p.arity)
    return p, indexer, params, build_HI(indexer, params), build_HP(indexer, p)


def test_criterion_01_two_level_sweep(report):
    a = sweep_T(FIG1_PRESETS["A"])
    b = sweep_T(FIG1_PRESETS["B"])
    checks = {
        "A crosses 1/2": bool(np.any(a.excited > 0.5)),
        "B capped": bool(np.all(b.excited <= 0.5 + 1e-3)),
        "A adiabatic": a.excited[-1] < 1e-2,
        "B adiabatic": b.excited[-1] < 1e-2,
    }
    ok = all(checks.values())
    report(1, ok, f"{len(b.T)} T points; max A={a.excited.max():.6f}, max B={b.excited.max():.6f}, "
                  f"P_e(T_max)={a.excited[-1]:.1e}/{b.excited[-1]:.1e}")
    assert ok, checks


def test_criterion_02_decision_soundness(shipped_verdicts, report):
    expected = {"linear-zero": SOLUTION, "no-zero": NO_SOLUTION, "pell-shift": NO_SOLUTION}
    failures, parts = [], []
    for label, source, cutoff in SHIPPED:
        p, v = shipped_verdicts[label]
        oracle = search_box(p, cutoff)
        oracle_decision = SOLUTION if oracle is not None else NO_SOLUTION
        if v.decision != expected[label] or v.decision != oracle_decision:
            failures.append(f"{label}: {v.decision} (oracle {oracle_decision})")
        if v.decision == SOLUTION and (v.witness != oracle or p(*v.witness) != 0):
            failures.append(f"{label}: witness {v.witness} vs oracle {oracle}")
        if v.probability is None or not v.probability > 0.52:
            failures.append(f"{label}: P(T)={v.probability}")
        parts.append(f"{label}={v.decision}@T={v.T:g},P={v.probability:.4f}")
    assert shipped_verdicts["linear-zero"][1].witness == (2,)
    report(2, not failures, "; ".join(parts))
    assert not failures, failures


def test_criterion_03_halting_safety(shipped_verdicts, report):
    violations = []
    visited = 0
    for label, _, cutoff in SHIPPED:
        p, v = shipped_verdicts[label]
        _, minimizers = box_minimizers(p, BasisIndexer.uniform(p.arity, cutoff))
        violations += [(label, e) for e in v.diagnostics["excited_cap_violations"]]
        for entry in v.diagnostics["history"]:
            visited += 1
            if entry["probability"] > 0.5 + 1e-3 and tuple(entry["dominant"]) not in minimizers:
                violations.append((label, entry))
    report(3, not violations, f"{visited} (instance, T) pairs checked, {len(violations)} violations")
    assert not violations


def test_criterion_04_spectral_nondegeneracy(report):
    grid = default_grid(101, include_endpoint=False)
    gap_ok, spacing_ok, parts = True, True, []
    for label, source, cutoff in SHIPPED:
        _, _, params, HI, HP = _instance(source, cutoff)
        assert params.is_real_positive()
        worst_gap = worst_spacing = math.inf
        where = None
        for smp in spectral_flow(HI, HP, grid):
            threshold = 1e-8 * smp.diameter
            spacings = np.diff(smp.eigenvalues)
            worst_gap = min(worst_gap, smp.gap / threshold)
            ratio = spacings.min() / threshold
            if ratio < worst_spacing:
                worst_spacing, where = ratio, smp.s
        gap_ok &= worst_gap > 1
        spacing_ok &= worst_spacing > 1
        parts.append(f"{label}: min gap/thr={worst_gap:.3g}, min spacing/thr={worst_spacing:.3g} at s={where:g}")
    ok = gap_ok and spacing_ok
    report(4, ok, "; ".join(parts))
    assert gap_ok, parts
    assert spacing_ok, parts


def test_criterion_05_semigroup_positivity(report):
    parts, ok = [], True
    for source in ("x1 - 2", "x1 + 1"):
        _, _, _, HI, HP = _instance(source, 12)
        lows = []
        for s in (0.0, 0.25, 0.5, 0.75, 0.99):
            rep = semigroup_positivity(build_H(s, HI, HP), 1.0)
            ok &= rep.positive
            lows.append(rep.min_real)
        end = semigroup_positivity(build_H(1.0, HI, HP), 1.0)
        ok &= end.offdiag_max_abs == 0.0 and not end.positive
        parts.append(f"{source}: min entry {min(lows):.2e}, s=1 off-diagonal max {end.offdiag_max_abs}")
    report(5, ok, "; ".join(parts))
    assert ok


def test_criterion_06_trotter_convergence(report):
    _, indexer, params, HI, HP = _instance("x1 - 2", 8)
    s = 0.5
    exact = expm_hermitian(build_H(s, HI, HP), 1.0)
    errors = [
        float(np.abs(trotter_product(HP, indexer, params, TrotterConfig(M, s)) - exact).max())
        for M in (1, 2, 4, 8, 16, 32)
    ]
    ok = all(b < a for a, b in zip(errors, errors[1:]))
    report(6, ok, "errors " + ", ".join(f"{e:.3g}" for e in errors))
    assert ok, errors


def test_criterion_07_holomorphic_closed_form(report):
    a = annihilation(40)
    worst = 0.0
    for beta in (0.3, 0.3 + 0.2j):
        oracle = expm(beta * a.T) @ expm(np.conj(beta) * a)
        for m in range(11):
            for n in range(11):
                worst = max(worst, abs(displacement_matrix_element(m, n, beta) - oracle[m, n]))
    ok = worst <= 1e-10
    report(7, ok, f"max |closed form - matrix product| = {worst:.2e}")
    assert ok


def test_criterion_08_phase_invariance(report):
    _, _, _, HIc, HP = _instance("x1 - 2", 12, [cmath.exp(1j * math.pi / 3)])
    _, _, _, HIr, _ = _instance("x1 - 2", 12, [1.0])
    worst = 0.0
    for s in (0.2, 0.6):
        wc = np.linalg.eigvalsh(build_H(s, HIc, HP))
        wr = np.linalg.eigvalsh(build_H(s, HIr, HP))
        worst = max(worst, float(np.abs(wc - wr).max()))
    ok = worst <= 1e-9
    report(8, ok, f"max eigenvalue difference {worst:.2e}")
    assert ok


def test_criterion_09_weak_law_sampling(report):
    plan = plan_repetitions(0.1, 0.05)
    indexer = BasisIndexer.uniform(1, 1)
    psi = np.array([math.sqrt(0.75), math.sqrt(0.25)], dtype=complex)
    trials = 1000
    misses = 0
    for seed in range(trials):
        freq = simulate_measurements(psi, indexer, plan, seed=seed).frequencies.get((0,), 0)
        misses += abs(float(freq) - 0.75) > 0.1
    # Reject only if the miss rate is significantly above delta.
    pvalue = binomtest(misses, trials, 0.05, alternative="greater").pvalue
    ok = plan.repetitions == 501 and pvalue > 0.01
    report(9, ok, f"L={plan.repetitions}; {misses}/{trials} trials off by > 0.1 (binomial p={pvalue:.3g})")
    assert ok


@pytest.mark.slow
def test_criterion_10_numerical_hygiene(shipped_verdicts, report):
    drift = max(
        entry["norm_drift"] for _, v in shipped_verdicts.values() for entry in v.diagnostics["history"]
    )

    _, _, params, HI, HP = _instance("x1 - 1", 12)
    psi0, _ = coherent_state(BasisIndexer.uniform(1, 12), params, tol=1e-5)
    coarse = step_extrapolate(HI, HP, psi0, 2.0, (100, 200), index=1).spread
    fine = step_extrapolate(HI, HP, psi0, 2.0, (200, 400), index=1).spread
    ratio = coarse / fine

    sweeps = {"linear-zero": (8, 12, 16), "no-zero": (8, 12, 16), "pell-shift": (8, 10, 12)}
    decreasing, parts = True, []
    for label, source, _ in SHIPPED:
        p, v = shipped_verdicts[label]
        params = CoherentParams([1.0] * p.arity)

        def build(N, p=p, params=params):
            indexer = BasisIndexer.uniform(p.arity, N)
            psi, _ = coherent_state(indexer, params, tol=1e-5)
            return indexer, build_HI(indexer, params), build_HP(indexer, p), psi

        trunc = truncation_check(build, v.T, sweeps[label], steps=1000, occupation=v.dominant)
        d = trunc.disagreements
        decreasing &= bool(np.all(np.diff(d) < 0))
        parts.append(f"{label} dP={', '.join(f'{x:.1e}' for x in d)}")

    ok = drift <= 1e-9 and 3.0 <= ratio <= 5.0 and decreasing
    report(10, ok, f"norm drift {drift:.1e}; spread ratio {ratio:.2f}; " + "; ".join(parts))
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
