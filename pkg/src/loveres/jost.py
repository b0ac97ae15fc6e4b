"""Jost solution / Jost function evaluation at arbitrary complex k.

The second-order equation -u'' + V u = k^2 u is integrated backward from the
support edge x_i with plane-wave terminal data, in Faddeev-scaled variables
chi = f exp(-ikx) so the integration stays bounded by
exp((|Im k| - Im k) x_i) on both half-planes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from ._rk4 import _integrate, _integrate_traj
from .errors import OverflowGuardError
from .profile import PotentialProfile

# hard double-precision guard on (|Im k| - Im k) * x_i
_EXP_GUARD = 600.0

# target |k| * step; 0.002 puts fixed-step RK4 comfortably below 1e-9 relative
DEFAULT_STEP_FACTOR = 0.002
DEFAULT_MIN_STEPS = 256


@dataclass(frozen=True)
class JostEval:
    """Jost data at a single complex k."""

    k: complex
    f0: complex          # f(0, k)
    fp0: complex         # f'(0, k)
    fh: complex          # h f(0,k) + f'(0,k)
    fh_dk: complex       # d/dk of fh
    wronskian_residual: Optional[float]  # |W(f, fbar) + 2ik| at real k, else None


def _check_guard(k, x_i):
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    worst = float(np.max(np.abs(k.imag) - k.imag))
    if worst * x_i > _EXP_GUARD:
        raise OverflowGuardError(worst / 2.0, x_i, _EXP_GUARD / (2.0 * x_i))


def _n_steps(kmax: float, span: float, potential: PotentialProfile,
             step_factor: float, min_steps: int) -> int:
    rate = max(kmax, np.sqrt(np.max(np.abs(potential.values)) + 1.0))
    n = int(np.ceil(rate * span / step_factor))
    return max(min_steps, n)


def _v_half_grid(potential: PotentialProfile, x_lo: float, x_hi: float, n: int):
    nodes = np.linspace(x_lo, x_hi, 2 * n + 1)
    return np.ascontiguousarray(potential(nodes), dtype=np.float64)


def faddeev_raw(potential: PotentialProfile, k, x: float = 0.0,
                with_deriv: bool = True,
                step_factor: float = DEFAULT_STEP_FACTOR,
                min_steps: int = DEFAULT_MIN_STEPS):
    """Integrate the Faddeev system down to ``x`` for an array of k.

    Returns (chi, chip, psi, psip) evaluated at x, where psi carries the
    k-derivative data (garbage if with_deriv is False).
    """
    karr = np.ascontiguousarray(np.atleast_1d(np.asarray(k, dtype=complex)))
    x_i = potential.x_i
    _check_guard(karr, x_i - x)
    if x >= x_i:
        # outside the support f = exp(ikx): chi = 1, psi = ix
        shape = karr.shape
        return (np.ones(shape, complex), np.zeros(shape, complex),
                1j * x * np.ones(shape, complex), 1j * np.ones(shape, complex))
    kmax = float(np.max(np.abs(karr)))
    n = _n_steps(kmax, x_i - x, potential, step_factor, min_steps)
    v_half = _v_half_grid(potential, x, x_i, n)
    return _integrate(karr, v_half, x_i, x, n, with_deriv)


def faddeev_solve(potential: PotentialProfile, k,
                  step_factor: float = DEFAULT_STEP_FACTOR,
                  min_steps: int = DEFAULT_MIN_STEPS):
    """chi(0, k) = f(0, k) and chi'(0, k); f'(0,k) = chi'(0,k) + ik chi(0,k)."""
    chi, chip, _, _ = faddeev_raw(potential, k, 0.0, with_deriv=False,
                                  step_factor=step_factor, min_steps=min_steps)
    if np.isscalar(k) or np.asarray(k).shape == ():
        return complex(chi[0]), complex(chip[0])
    return chi, chip


class JostEvaluator:
    """Callable f_h(k) for a fixed (V, h), vectorized over arrays of k.

    Large batches are split into magnitude chunks so the fixed step adapts to
    each chunk's largest |k| instead of the global maximum.
    """

    def __init__(self, potential: PotentialProfile, h: float,
                 step_factor: float = DEFAULT_STEP_FACTOR,
                 min_steps: int = DEFAULT_MIN_STEPS,
                 n_chunks: int = 6):
        self.potential = potential
        self.h = float(h)
        self.step_factor = step_factor
        self.min_steps = min_steps
        self.n_chunks = n_chunks

    def _eval(self, k, with_deriv):
        karr = np.atleast_1d(np.asarray(k, dtype=complex)).ravel()
        out_fh = np.empty(karr.shape, complex)
        out_dk = np.empty(karr.shape, complex)
        out_f0 = np.empty(karr.shape, complex)
        out_fp0 = np.empty(karr.shape, complex)
        mags = np.abs(karr)
        order = np.argsort(mags)
        bounds = np.linspace(0, karr.size, self.n_chunks + 1).astype(int)
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            if hi <= lo:
                continue
            idx = order[lo:hi]
            chi, chip, psi, psip = faddeev_raw(
                self.potential, karr[idx], 0.0, with_deriv=with_deriv,
                step_factor=self.step_factor, min_steps=self.min_steps)
            kk = karr[idx]
            f0 = chi
            fp0 = chip + 1j * kk * chi
            out_f0[idx] = f0
            out_fp0[idx] = fp0
            out_fh[idx] = self.h * f0 + fp0
            if with_deriv:
                # w = d/dk f = psi e^{ikx}; at x = 0: w = psi, w' = psi' + ik psi
                out_dk[idx] = self.h * psi + psip + 1j * kk * psi
        return out_f0, out_fp0, out_fh, out_dk

    def _shape(self, k, arr):
        if np.isscalar(k) or np.asarray(k).shape == ():
            return complex(arr[0])
        return arr.reshape(np.shape(k))

    def __call__(self, k):
        _, _, fh, _ = self._eval(k, with_deriv=False)
        return self._shape(k, fh)

    def derivative(self, k):
        _, _, _, dk = self._eval(k, with_deriv=True)
        return self._shape(k, dk)

    def value_and_derivative(self, k):
        _, _, fh, dk = self._eval(k, with_deriv=True)
        return self._shape(k, fh), self._shape(k, dk)

    def components(self, k):
        f0, fp0, fh, _ = self._eval(k, with_deriv=False)
        return self._shape(k, f0), self._shape(k, fp0), self._shape(k, fh)


def jost_solution_at(potential: PotentialProfile, k: complex, x: float,
                     step_factor: float = DEFAULT_STEP_FACTOR):
    """(f(x,k), f'(x,k)) at a single point inside or outside the support."""
    chi, chip, _, _ = faddeev_raw(potential, k, x, with_deriv=False,
                                  step_factor=step_factor)
    phase = np.exp(1j * complex(k) * x)
    f = complex(chi[0]) * phase
    fp = (complex(chip[0]) + 1j * complex(k) * complex(chi[0])) * phase
    return f, fp


def jost_derivative(potential: PotentialProfile, h: float, k,
                    step_factor: float = DEFAULT_STEP_FACTOR) -> complex:
    """d/dk f_h(k) via the variational system integrated alongside chi."""
    ev = JostEvaluator(potential, h, step_factor=step_factor)
    return ev.derivative(k)


def jost_function(potential: PotentialProfile, h: float, k: complex,
                  step_factor: float = DEFAULT_STEP_FACTOR) -> JostEval:
    """Full Jost data at one k, including the Wronskian residual at real k."""
    ev = JostEvaluator(potential, h, step_factor=step_factor)
    k = complex(k)
    f0, fp0, fh = ev.components(k)
    fh_dk = ev.derivative(k)
    wr = None
    if k.imag == 0.0 and k != 0.0:
        g0, gp0, _ = ev.components(-k)
        wr = abs(f0 * gp0 - fp0 * g0 + 2j * k)
    return JostEval(k=k, f0=f0, fp0=fp0, fh=fh, fh_dk=fh_dk,
                    wronskian_residual=wr)


def norming_integral(potential: PotentialProfile, k: complex,
                     n_min: int = 4096) -> complex:
    """int_0^inf f(x,k)^2 dx for Im k > 0.

    Simpson over [0, x_i] on the stored trajectory plus the closed-form tail
    -exp(2ik x_i)/(2ik).
    """
    k = complex(k)
    if k.imag <= 0:
        raise ValueError("norming integral requires Im k > 0")
    x_i = potential.x_i
    n = max(n_min, _n_steps(abs(k), x_i, potential, DEFAULT_STEP_FACTOR, n_min))
    if n % 2:
        n += 1
    v_half = _v_half_grid(potential, 0.0, x_i, n)
    traj = _integrate_traj(complex(k), v_half, x_i, 0.0, n)
    x = np.linspace(0.0, x_i, n + 1)
    f_sq = (traj * np.exp(1j * k * x)) ** 2
    head = simpson(f_sq, x=x)
    tail = -np.exp(2j * k * x_i) / (2j * k)
    return complex(head + tail)


def bound_check(potential: PotentialProfile, h: float, k: complex,
                evaluator: Optional[JostEvaluator] = None) -> dict:
    """Slack report for the two explicit Jost-function estimates.

    First:  |f_h(k) - ik| <= ||V|| exp((|Im k| - Im k) x_i) exp(a)
    Second: |f_h(k) - ik - h + (V^(0) + V^(k))/2|
                <= (|h| + ||V||/2) a exp((|Im k| - Im k) x_i) exp(a)
    with a = ||V|| / max(1, |k|).  Nonnegative slack means the bound holds.
    """
    ev = evaluator or JostEvaluator(potential, h)
    k = complex(k)
    fh = ev(k)
    norm_v = potential.l1_norm
    a = norm_v / max(1.0, abs(k))
    growth = np.exp((abs(k.imag) - k.imag) * potential.x_i)
    rhs1 = norm_v * growth * np.exp(a)
    lhs1 = abs(fh - 1j * k)
    vhat0 = complex(potential.fourier(0.0))
    vhatk = complex(potential.fourier(k))
    rhs2 = (abs(h) + norm_v / 2.0) * a * growth * np.exp(a)
    lhs2 = abs(fh - 1j * k - h + (vhat0 + vhatk) / 2.0)
    return {
        "k": k,
        "first_lhs": lhs1, "first_rhs": float(rhs1),
        "first_slack": float(rhs1 - lhs1),
        "second_lhs": lhs2, "second_rhs": float(rhs2),
        "second_slack": float(rhs2 - lhs2),
        "holds": bool(rhs1 - lhs1 >= 0 and rhs2 - lhs2 >= 0),
    }
