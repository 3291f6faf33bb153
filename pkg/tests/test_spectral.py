import cmath
import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from adiabatic_diophantine import (
    BasisIndexer,
    CoherentParams,
    TrotterConfig,
    build_H,
    build_HI,
    build_HP,
    displacement_matrix_element,
    parse,
    semigroup_positivity,
    spectral_flow,
    to_real_frame,
)
from adiabatic_diophantine.spectral import (
    default_grid,
    expm_metzler,
    gap_profile,
    trotter_factor,
    write_spectral_csv,
)


def instance(source, cutoff, alphas=None):
    p = parse(source)
    ix = BasisIndexer.uniform(p.arity, cutoff)
    params = CoherentParams(alphas or [1.0] * p.arity)
    return ix, params, build_HI(ix, params), build_HP(ix, p)


def test_default_grid():
    grid = default_grid()
    assert len(grid) == 102 and grid[0] == 0 and grid[-2] == pytest.approx(0.99) and grid[-1] == 1


def test_initial_gap_is_one():
    _, _, HI, HP = instance("x1 - 2", 30)
    (smp,) = spectral_flow(HI, HP, [0.0])
    assert smp.gap == pytest.approx(1.0, abs=1e-6)


def test_final_spectrum_is_squared_values():
    _, _, HI, HP = instance("x1 - 3", 6)
    (smp,) = spectral_flow(HI, HP, [1.0])
    assert np.allclose(smp.eigenvalues, [0, 1, 1, 4, 4, 9, 9])
    assert smp.gap == 1 and smp.min_spacing == 0


def test_gap_profile_on_linear_instance():
    _, _, HI, HP = instance("x1 - 2", 16)
    samples = spectral_flow(HI, HP, default_grid())
    gap, where = gap_profile(samples)
    assert gap > 0.5
    assert where in [smp.s for smp in samples]
    assert not any(smp.degenerate for smp in samples if smp.s < 1)
    assert all(np.all(np.diff(smp.eigenvalues) >= 0) for smp in samples)


def test_gap_profile_constant_flow():
    _, _, HI, _ = instance("x1 - 2", 10)
    samples = spectral_flow(HI, HI, np.linspace(0, 0.99, 11))
    assert gap_profile(samples)[0] == pytest.approx(samples[0].gap)


def test_gap_profile_needs_interior_samples():
    _, _, HI, HP = instance("x1 - 2", 4)
    with pytest.raises(ValueError):
        gap_profile(spectral_flow(HI, HP, [1.0]))


def test_spectral_csv(tmp_path):
    _, _, HI, HP = instance("x1 - 2", 6)
    path = tmp_path / "flow.csv"
    write_spectral_csv(path, spectral_flow(HI, HP, default_grid()))
    rows = list(csv.reader(path.open()))
    assert len(rows) == 103
    assert rows[0][0] == "s" and rows[0][-1] == "gap"
    assert len({len(r) for r in rows}) == 1


def test_positivity_midpoint():
    _, _, HI, HP = instance("x1 - 2", 10)
    rep = semigroup_positivity(build_H(0.5, HI, HP), 1.0)
    assert rep.positive and rep.route == "metzler"


def test_positivity_breaks_at_endpoint():
    _, _, HI, HP = instance("x1 - 2", 10)
    rep = semigroup_positivity(HP, 1.0)
    assert rep.offdiag_max_abs == 0.0
    assert not rep.positive


def test_positivity_needs_real_frame():
    ix, params, HI, HP = instance("x1 - 2", 10, [cmath.exp(1j * math.pi / 4)])
    H = build_H(0.5, HI, HP)
    assert not semigroup_positivity(H, 1.0).positive
    assert semigroup_positivity(to_real_frame(H, ix, params), 1.0).positive


def test_metzler_route_agrees_with_eigh():
    _, _, HI, HP = instance("x1 + 1", 10)
    H = build_H(0.3, HI, HP).real
    a = expm_metzler(H, 0.7)
    b = expm(-0.7 * H)
    assert np.allclose(a, b, rtol=1e-10, atol=1e-14)
    with pytest.raises(ValueError):
        semigroup_positivity(-H, route="metzler")
    with pytest.raises(ValueError):
        semigroup_positivity(H, a=0.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 0.99), st.floats(0.05, 3.0), st.sampled_from(["x1 - 2", "x1 + 1", "x1 - 4"]))
def test_positivity_property(s, a, source):
    _, _, HI, HP = instance(source, 12)
    rep = semigroup_positivity(build_H(s, HI, HP), a)
    assert rep.positive


def test_trotter_single_slice_positive():
    ix, params, _, HP = instance("x1 - 2", 8)
    factor = trotter_factor(HP, ix, params, TrotterConfig(1, 0.0))
    assert np.all(factor.real > 0) and np.abs(factor.imag).max() == 0


def test_trotter_bracket_positive():
    ix, params, _, HP = instance("x1 - 2", 8)
    cfg = TrotterConfig(1, 0.5)
    bracket = trotter_factor(np.zeros_like(HP), ix, params, cfg)
    assert np.all(bracket.real > 0)


def test_trotter_config_validation():
    with pytest.raises(ValueError):
        TrotterConfig(0, 0.5)
    with pytest.raises(ValueError):
        TrotterConfig(2, 1.0)
    assert np.allclose(TrotterConfig(4, 0.5).betas(CoherentParams([2.0])), [0.25])


def test_closed_form_low_orders():
    beta = 0.4 - 0.1j
    assert displacement_matrix_element(0, 0, beta) == 1
    assert displacement_matrix_element(1, 0, beta) == pytest.approx(beta)
    assert displacement_matrix_element(0, 1, beta) == pytest.approx(np.conj(beta))
    assert displacement_matrix_element(3, 5, 0) == 0
    with pytest.raises(OverflowError):
        displacement_matrix_element(900, 900, 50.0)
