"""Scattering data (S, eigenvalues, norming constants) and the Marchenko
input kernels G, G0.

S(k) = -f_h(-k)/f_h(k) on the real line; G is the Fourier transform of S - 1
over a truncated symmetric window with the O(1/k) and O(1/k^2) tails of S - 1
integrated in closed form; G0 adds the bound-state exponentials.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.special import sici

from .errors import ClassViolationError, InconsistencyError
from .jost import JostEvaluator, norming_integral
from .profile import PotentialProfile

DEFAULT_KMAX_FACTOR = 400.0     # quadrature window K = 400 / x_i
DEFAULT_MARGIN = 0.1            # kernel grid extends to (2 + margin) x_i
ORIGIN_ZERO_TOL = 1e-8


class ScatteringFunction:
    """S(k) = -f_h(-k)/f_h(k) for real k, vectorized.

    Raises ClassViolationError if f_h comes within ``zero_tol`` times the
    batch median of zero anywhere on the requested grid (a real zero of f_h
    puts the data outside the admissible class).
    """

    def __init__(self, fh: Callable, zero_tol: float = 1e-10):
        self.fh = fh
        self.zero_tol = zero_tol

    def __call__(self, k):
        karr = np.atleast_1d(np.asarray(k, dtype=float))
        f = np.asarray(self.fh(np.concatenate([karr, -karr]).astype(complex)))
        fp, fm = f[:karr.size], f[karr.size:]
        med = np.median(np.abs(f))
        if med == 0.0 or np.min(np.abs(fp)) < self.zero_tol * med:
            bad = karr[np.argmin(np.abs(fp))]
            raise ClassViolationError(
                f"Jost function vanishes on the real line near k = {bad:g}")
        s = -fm / fp
        if np.isscalar(k) or np.asarray(k).shape == ():
            return complex(s[0])
        return s

    def pair(self, k_pos):
        """(S(k), S(-k)) for k_pos > 0 from a single Jost batch."""
        k_pos = np.asarray(k_pos, dtype=float)
        f = np.asarray(self.fh(np.concatenate([k_pos, -k_pos]).astype(complex)))
        fp, fm = f[:k_pos.size], f[k_pos.size:]
        med = np.median(np.abs(f))
        if med == 0.0 or np.min(np.abs(f)) < self.zero_tol * med:
            raise ClassViolationError("Jost function vanishes on the real line")
        return -fm / fp, -fp / fm


@dataclass
class ScatteringData:
    """Everything the Marchenko step consumes."""

    S: Callable                     # unimodular evaluator on the real line
    k_bound: List[complex]          # eigenvalues on the positive imaginary axis
    m: List[float]                  # norming constants, all positive
    x_i: float

    @property
    def N(self) -> int:
        return len(self.k_bound)

    def manifest(self, report: Optional[dict] = None) -> dict:
        out = {
            "N": self.N,
            "k_bound": [[z.real, z.imag] for z in self.k_bound],
            "m": list(map(float, self.m)),
            "x_I": self.x_i,
        }
        if report is not None:
            out["class_report"] = report
        return out

    def save_manifest(self, path, report: Optional[dict] = None) -> None:
        with open(path, "w") as out:
            json.dump(self.manifest(report), out, indent=1, sort_keys=True)


@dataclass
class MarchenkoKernel:
    """G and G0 sampled on a uniform grid of y = x + t in [0, (2+margin) x_i].

    ``decay_certificate`` is max |G0| past 2 x_i; the kernel must (numerically)
    vanish there for the Marchenko equation to close on a finite interval.
    """

    grid: np.ndarray
    G_values: np.ndarray
    G0_values: np.ndarray
    decay_certificate: float
    x_i: float
    k_max: float
    tail_coeffs: tuple = (0.0, 0.0)
    imag_norm: float = 0.0          # size of the discarded imaginary part of G
    sign_convention: str = "plus"   # bound-state exponentials enter with +1/m_n

    def g0(self, y):
        """Linear interpolation of G0, zero outside the sampled range."""
        return np.interp(y, self.grid, self.G0_values, left=0.0, right=0.0)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as out:
            w = csv.writer(out)
            w.writerow(["y", "G", "G0"])
            for y, g, g0 in zip(self.grid, self.G_values, self.G0_values):
                w.writerow([repr(float(y)), repr(float(g)), repr(float(g0))])


def scattering_function(fh: Callable) -> ScatteringFunction:
    return ScatteringFunction(fh)


def norming_constants(potential: PotentialProfile, h: float,
                      eigenvalues: Sequence[complex],
                      evaluator: Optional[JostEvaluator] = None,
                      cross_check_tol: float = 1e-6) -> List[float]:
    """m_j = -i fh'(k_j)/f_h(-k_j), cross-checked against int_0^inf f^2 dx.

    Eigenvalues must be ordered by decreasing |k_j| (j = 1 the deepest bound
    state); the alternating sign ladder i(-1)^j fh'(k_j) > 0 and
    (-1)^j f_h(-k_j) < 0 is enforced.
    """
    ev = evaluator or JostEvaluator(potential, h)
    eigs = sorted((complex(k) for k in eigenvalues), key=lambda z: -abs(z))
    out = []
    for j, kj in enumerate(eigs, start=1):
        fh_m = ev(-kj)
        dk = ev.derivative(kj)
        if abs(dk) == 0:
            raise ClassViolationError(f"eigenvalue {kj} is not simple")
        sgn = (-1) ** j
        if not (np.real(1j * sgn * dk) > 0 and np.real(sgn * fh_m) < 0):
            raise ClassViolationError(
                f"sign ladder broken at j={j}: i(-1)^j fh'={1j * sgn * dk}, "
                f"(-1)^j fh(-k_j)={sgn * fh_m}")
        m_ratio = -1j * dk / fh_m
        if abs(m_ratio.imag) > 1e-8 * max(1.0, abs(m_ratio)):
            raise InconsistencyError(
                f"norming constant at k={kj} has imaginary part {m_ratio.imag:g}")
        m_ratio = float(m_ratio.real)
        m_int = norming_integral(potential, kj)
        if abs(m_ratio - m_int.real) > cross_check_tol * max(1.0, abs(m_int)):
            raise InconsistencyError(
                f"norming routes disagree at k={kj}: "
                f"ratio {m_ratio:.10g} vs integral {m_int.real:.10g}")
        if m_ratio <= 0:
            raise ClassViolationError(f"norming constant {m_ratio:g} <= 0 at {kj}")
        out.append(m_ratio)
    return out


# tail model for S - 1 at large k: shifts 0 and +-2 x_i catch both the
# smooth 1/k decay and the oscillatory components carried by the Fourier
# transform of a compactly supported V; all coefficients are real by the
# conjugation symmetry S(-k) = conj S(k)
def _tail_basis(x_i: float):
    basis = [(0.0, p) for p in (1, 2, 3, 4)]
    basis += [(2.0 * x_i, p) for p in (1, 2, 3)]
    basis += [(-2.0 * x_i, p) for p in (1, 2, 3)]
    return basis


def _tail_fit(k_pos: np.ndarray, s_vals: np.ndarray, x_i: float,
              frac: float = 0.2):
    """Real least-squares fit of S - 1 against e^{iks}/(ik)^p on the top of
    the quadrature window (columns normalized for conditioning)."""
    n = max(int(frac * k_pos.size), 32)
    k = k_pos[-n:]
    y = s_vals[-n:] - 1.0
    basis = _tail_basis(x_i)
    cols = np.stack([np.exp(1j * k * s) / (1j * k) ** p for s, p in basis],
                    axis=1)
    scale = np.linalg.norm(cols, axis=0)
    design = np.concatenate([cols.real, cols.imag]) / scale[None, :]
    rhs = np.concatenate([y.real, y.imag])
    coef, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    return coef / scale, basis


def _tail_integral(y: np.ndarray, coef, basis, k_max: float):
    """(1/2pi) * integral over |k| > k_max of the fitted tail model times
    e^{iky}, via the recursion J_p = e^{iKu} K^{1-p}/(p-1) + iu J_{p-1}/(p-1)
    with J_1 = -Ci(K|u|) + i(pi/2 sgn u - Si(Ku)).

    For real coefficients only the Si chain survives the final real part, so
    the Ci term (log-singular at u = 0) is dropped.  u = 0 points take the
    right-hand limit, the value the Marchenko kernel needs at a jump of G.
    """
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    p_max = max(p for _, p in basis)
    for s in sorted({s for s, _ in basis}):
        u = y + s
        sgn = np.where(u >= 0, 1.0, -1.0)
        si, _ = sici(k_max * u)
        j = [None] * (p_max + 1)
        j[1] = 1j * (np.pi / 2.0 * sgn - si)
        for p in range(2, p_max + 1):
            j[p] = (np.exp(1j * k_max * u) * k_max ** (1 - p)
                    + 1j * u * j[p - 1]) / (p - 1)
        for c, (s2, p) in zip(coef, basis):
            if s2 != s:
                continue
            out += (c / np.pi) * np.real(j[p] / 1j ** p)
    return out


def build_G0(data: ScatteringData, grid: Optional[np.ndarray] = None,
             k_max: Optional[float] = None, n_k: Optional[int] = None,
             margin: float = DEFAULT_MARGIN,
             n_grid: int = 841) -> MarchenkoKernel:
    """Assemble G and G0 = G + sum_n exp(-|k_n| y)/m_n on a uniform y grid."""
    x_i = data.x_i
    if grid is None:
        grid = np.linspace(0.0, (2.0 + margin) * x_i, n_grid)
    grid = np.asarray(grid, dtype=float)
    if k_max is None:
        k_max = DEFAULT_KMAX_FACTOR / x_i
    if n_k is None:
        # resolve both the S structure (resonance spacing ~ pi/x_i) and the
        # oscillation e^{iky} at the far end of the y grid
        n_k = int(max(200 * k_max * x_i / np.pi, 30 * k_max * grid[-1] / np.pi))
    if n_k % 2 == 0:
        n_k += 1                      # Simpson needs an odd node count
    dk = k_max / n_k
    # Simpson on the uniform segment (its endpoint error, oscillatory at
    # frequency k_max, would otherwise survive differentiation downstream);
    # geometric prefix + trapezoid shrinks the unsampled strip around k = 0
    k_uni = np.linspace(dk, k_max, n_k)
    w_uni = np.full(n_k, 2.0 * dk / 3.0)
    w_uni[1::2] = 4.0 * dk / 3.0
    w_uni[0] = w_uni[-1] = dk / 3.0
    k_pre = np.geomspace(1e-3 * dk, dk, 65)[:-1]
    w_pre = np.zeros(k_pre.size)
    edges = np.concatenate([k_pre, [dk]])
    w_pre[0] = 0.5 * (edges[1] - edges[0])
    w_pre[1:] = 0.5 * (edges[2:] - edges[:-2])
    w_uni[0] += 0.5 * (dk - k_pre[-1])
    k_pos = np.concatenate([k_pre, k_uni])
    w = np.concatenate([w_pre, w_uni])
    if hasattr(data.S, "pair"):
        s_p, s_m = data.S.pair(k_pos)
    else:
        s_p = np.asarray(data.S(k_pos))
        s_m = np.asarray(data.S(-k_pos))
    wp = (s_p - 1.0) * w
    wm = (s_m - 1.0) * w
    window = np.empty(grid.size, dtype=complex)
    block = max(1, int(4e6 // k_pos.size))
    for lo in range(0, grid.size, block):
        e = np.exp(1j * np.outer(grid[lo:lo + block], k_pos))
        window[lo:lo + block] = e @ wp + np.conj(e) @ wm
    window /= 2.0 * np.pi
    # central strip |k| < k_pos[0], treating S - 1 as locally constant
    s0 = 0.5 * (s_p[0] + s_m[0])
    window += (s0 - 1.0) * k_pos[0] / np.pi
    coef, basis = _tail_fit(k_pos, s_p, x_i)
    g = window + _tail_integral(grid, coef, basis, k_max)
    imag_norm = float(np.max(np.abs(g.imag)))
    g = g.real
    g0 = g.copy()
    for kj, mj in zip(data.k_bound, data.m):
        g0 = g0 + np.exp(-abs(kj.imag) * grid) / mj
    past = grid >= 2.0 * x_i
    cert = float(np.max(np.abs(g0[past]))) if np.any(past) else float("nan")
    return MarchenkoKernel(grid=grid, G_values=g, G0_values=g0,
                           decay_certificate=cert, x_i=x_i, k_max=float(k_max),
                           tail_coeffs=tuple(map(float, coef)),
                           imag_norm=imag_norm)


def validate_scattering_class(data: ScatteringData,
                              k_max: Optional[float] = None,
                              n: int = 8192,
                              origin_tol: float = ORIGIN_ZERO_TOL) -> dict:
    """Report on the admissible-class conditions.

    (1) unimodularity, S(-k) = conj S(k) = S(k)^{-1}, S -> 1 at infinity;
    (3) the phase increment of log(-S) along the positive real axis.  The raw
    continuous-phase increment measures N - 1/2 (the large-arc contribution
    accounts for the extra half), so the reported integer is raw + 1/2.
    """
    if k_max is None:
        k_max = DEFAULT_KMAX_FACTOR / data.x_i
    # geometric prefix resolves the phase of -S all the way down to k = 0+
    k = np.concatenate([np.geomspace(1e-8 * k_max, k_max / n, 256)[:-1],
                        np.linspace(k_max / n, k_max, n)])
    if hasattr(data.S, "pair"):
        s_p, s_m = data.S.pair(k)
    else:
        s_p, s_m = np.asarray(data.S(k)), np.asarray(data.S(-k))

    if hasattr(data.S, "fh"):
        f0 = complex(np.atleast_1d(data.S.fh(np.array([0.0 + 0j])))[0])
        fref = complex(np.atleast_1d(data.S.fh(np.array([1.0 + 0j])))[0])
        if abs(f0) < origin_tol * max(1.0, abs(fref)):
            raise ClassViolationError(
                "Jost function vanishes at k = 0 (origin zero count must be 0)")

    unimod = float(np.max(np.abs(np.abs(s_p) - 1.0)))
    conj_sym = float(np.max(np.abs(s_m - np.conj(s_p))))
    inv_sym = float(np.max(np.abs(s_p * s_m - 1.0)))
    s_inf_gap = float(abs(s_p[-1] - 1.0))
    s0 = complex(s_p[0])
    degenerate = abs(s0 - 1.0) < 1e-6

    phase = np.unwrap(np.angle(-s_p))
    raw = float((phase[0] - phase[-1]) / (2.0 * np.pi))
    increment = raw + 0.5
    n_int = int(np.round(increment))
    report = {
        "unimodularity_residual": unimod,
        "conjugate_symmetry_residual": conj_sym,
        "inverse_symmetry_residual": inv_sym,
        "s_infinity_gap": s_inf_gap,
        "s_at_origin": [s0.real, s0.imag],
        "degenerate_identity_S": bool(degenerate),
        "raw_phase_increment": raw,
        "phase_increment": increment,
        "increment_integer": n_int,
        "N": data.N,
        "condition1_pass": bool(unimod < 1e-8 and conj_sym < 1e-6
                                and inv_sym < 1e-6),
        "condition3_pass": bool(abs(increment - n_int) < 0.05
                                and n_int == data.N),
        "origin_zero_count": 0,
    }
    return report
