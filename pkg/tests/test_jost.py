import numpy as np
import pytest

from loveres.errors import OverflowGuardError
from loveres.jost import (JostEvaluator, bound_check, faddeev_raw,
                          jost_function, jost_solution_at, norming_integral)

from oracles import step_fh, well_eigenvalues_mp


def test_free_robin_is_exact(free_pot):
    ev = JostEvaluator(free_pot, 1.0)
    rng = np.random.default_rng(3)
    k = rng.normal(size=64) + 1j * rng.normal(size=64)
    assert np.max(np.abs(ev(k) - (1j * k + 1.0))) < 1e-12


def test_barrier_matches_closed_form(barrier_fine):
    rng = np.random.default_rng(5)
    k = rng.uniform(-10, 10, 80) + 1j * rng.uniform(-6, 3, 80)
    got = barrier_fine(k)
    want = step_fh(k, 4.0, 0.0)
    assert np.max(np.abs(got - want) / np.abs(want)) < 1e-9


def test_derivative_matches_finite_difference(barrier_fine):
    for k0 in (2.0 - 0.7j, 0.4 + 1.3j, -3.1 - 2.0j):
        d = barrier_fine.derivative(k0)
        eps = 1e-6
        fd = (barrier_fine(k0 + eps) - barrier_fine(k0 - eps)) / (2 * eps)
        assert abs(d - fd) < 1e-7 * max(1.0, abs(d))


def test_wronskian_residual_small_at_real_k(barrier_pot):
    res = jost_function(barrier_pot, 0.0, 3.7)
    assert res.wronskian_residual < 1e-10
    assert res.k == 3.7


def test_jost_solution_plane_wave_outside_support(barrier_pot):
    k = 2.0 + 0.5j
    f, fp = jost_solution_at(barrier_pot, k, 1.5)
    assert abs(f - np.exp(1j * k * 1.5)) < 1e-10
    assert abs(fp - 1j * k * np.exp(1j * k * 1.5)) < 1e-10


def test_overflow_guard(barrier_pot):
    with pytest.raises(OverflowGuardError):
        faddeev_raw(barrier_pot, -700j)


def test_explicit_bounds_hold(barrier_pot):
    for k in (3.0, 5.0 - 1.0j, 0.5 + 2.0j, 12.0):
        report = bound_check(barrier_pot, 0.0, k)
        assert report["holds"], report


def test_norming_integral_equals_derivative_ratio(well_pot):
    ev = JostEvaluator(well_pot, 0.0)
    k1 = well_eigenvalues_mp(-60.0, 0.0)[0]
    m_ratio = -1j * ev.derivative(k1) / ev(-k1)
    m_int = norming_integral(well_pot, k1)
    assert abs(m_ratio.imag) < 1e-9 * abs(m_ratio)
    assert abs(m_ratio.real - m_int.real) < 1e-8 * abs(m_int)
