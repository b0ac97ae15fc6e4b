import numpy as np
import pytest

from loveres.errors import (ClassViolationError, DomainError,
                            SingularRecoveryError, StageError)
from loveres.inversion import (check_sign_alternation, hadamard_jost, invert,
                               recover_shear, scattering_from_zeros)
from loveres.profile import PotentialProfile
from loveres.resonances import ResonanceSet

from oracles import bump_mu


def free_set():
    return ResonanceSet.from_zeros([1j], [0.0])


def test_hadamard_free_robin_reproduces_jost_function():
    had = hadamard_jost(free_set(), R=2.0)
    assert had.exp_coeff == 0.0
    assert abs(had.f0 - 1.0) < 1e-4
    k = np.linspace(-5, 5, 41) + 0.3j
    assert np.max(np.abs(had(k) - (1j * k + 1.0))) < 1e-3


def test_hadamard_scattering_is_ratio_of_products():
    had = hadamard_jost(free_set(), R=2.0)
    S = had.scattering()
    k = np.linspace(0.2, 8.0, 50)
    want = -had(-k) / had(k)
    assert np.max(np.abs(S(k) - want)) < 1e-12
    sp, sm = S.pair(k)
    assert np.max(np.abs(sp * sm - 1.0)) < 1e-12


def test_derivative_of_product_safe_at_zero():
    had = hadamard_jost(free_set(), R=2.0)
    d = had.derivative(1j)
    eps = 1e-6
    fd = (had(1j + eps) - had(1j - eps)) / (2 * eps)
    assert abs(d - fd) < 1e-6


def test_scattering_from_zeros_free_norming_constant():
    data = scattering_from_zeros(free_set(), x_i=1.0, R=2.0)
    assert data.N == 1
    assert data.m[0] == pytest.approx(0.5, rel=1e-4)


def test_sign_alternation_free():
    check_sign_alternation(hadamard_jost(free_set(), R=2.0))


def test_broken_symmetry_rejected():
    lopsided = ResonanceSet.from_zeros([1.0 - 1.0j], [0.0])
    with pytest.raises(ClassViolationError):
        hadamard_jost(lopsided, R=2.0)
    with pytest.raises(StageError) as err:
        invert(lopsided, x_i=1.0)
    assert err.value.stage == "calibration"
    assert isinstance(err.value.original, ClassViolationError)


def test_recover_shear_inverts_calibration_identity():
    grid = np.linspace(0.0, 1.0, 201)
    mu = bump_mu(grid)
    o1, o2 = 1.0, 2.0
    base = np.sin(3 * grid)    # frequency-independent part, cancels in V1-V2
    v1 = base - o1 ** 2 / mu + o1 ** 2
    v2 = base - o2 ** 2 / mu + o2 ** 2
    p1 = PotentialProfile(grid=grid, values=v1, x_i=1.0, h=0.5)
    p2 = PotentialProfile(grid=grid, values=v2, x_i=1.0, h=0.5)
    shear = recover_shear(p1, p2, o1, o2, mu_tail=1.0)
    assert np.max(np.abs(shear.mu_values - mu)) < 1e-12


def test_recover_shear_preconditions():
    grid = np.linspace(0.0, 1.0, 11)
    p = PotentialProfile(grid=grid, values=np.zeros(11), x_i=1.0, h=0.0)
    with pytest.raises(DomainError):
        recover_shear(p, p, 1.0, 1.0, mu_tail=1.0)
    other = PotentialProfile(grid=np.linspace(0, 2, 11), values=np.zeros(11),
                             x_i=1.0, h=0.0)
    with pytest.raises(DomainError):
        recover_shear(p, other, 1.0, 2.0, mu_tail=1.0)


def test_recover_shear_singular_denominator():
    grid = np.linspace(0.0, 1.0, 11)
    dw = 1.0 ** 2 - 2.0 ** 2
    v1 = np.zeros(11)
    v1[5] = dw   # makes dw - mu_tail (V1 - V2) vanish at one point
    p1 = PotentialProfile(grid=grid, values=v1, x_i=1.0, h=0.0)
    p2 = PotentialProfile(grid=grid, values=np.zeros(11), x_i=1.0, h=0.0)
    with pytest.raises(SingularRecoveryError):
        recover_shear(p1, p2, 1.0, 2.0, mu_tail=1.0)
