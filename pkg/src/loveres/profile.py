"""Shear-modulus profiles, calibration to a Schrodinger potential, and the
sheet-aware maps between wave number xi and quasi momentum k.

Coordinates: profiles are stored in x = -Z (depth measured positive downward
from the surface), so the half-line problem lives on x >= 0.  The Robin
coefficient is h = -(1/2) (d mu/dZ)(0) / mu(0) = +(1/2)*(-1)*(-1)... evaluated
with d/dZ = -d/dx, i.e. h = -(1/2) * (-(d mu/dx)(0)) / mu(0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, InvariantViolationError

# relative tolerance for "profile equals its tail value" checks
TAIL_TOL = 1e-12

DEFAULT_POTENTIAL_SIZE = 2048


@dataclass(frozen=True)
class ShearProfile:
    """Density-normalized shear modulus mu(x) on a depth grid.

    mu must be strictly positive, constant (= mu_tail) for x >= x_i, and
    genuinely non-constant in the last grid cell before x_i.  A cubic spline
    interpolant supplies the two derivatives the calibration needs; analytic
    derivative callables may be supplied instead for closed-form profiles.
    """

    depth_grid: np.ndarray
    mu_values: np.ndarray
    mu_tail: float
    x_i: float
    mu_func: Optional[Callable] = None
    dmu_func: Optional[Callable] = None
    d2mu_func: Optional[Callable] = None
    _spline: CubicSpline = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        grid = np.asarray(self.depth_grid, dtype=float)
        mu = np.asarray(self.mu_values, dtype=float)
        if grid.ndim != 1 or grid.size < 4 or np.any(np.diff(grid) <= 0):
            raise DomainError("depth_grid must be strictly increasing with >= 4 samples")
        if mu.shape != grid.shape:
            raise DomainError("mu_values must match depth_grid in shape")
        if np.any(mu <= 0):
            raise DomainError("shear modulus must be positive everywhere")
        if self.mu_tail <= 0:
            raise DomainError("mu_tail must be positive")
        if not (grid[0] <= 0 <= self.x_i <= grid[-1]):
            raise DomainError("grid must start at the surface and cover [0, x_i]")
        tail = grid >= self.x_i
        if np.any(np.abs(mu[tail] - self.mu_tail) > TAIL_TOL * self.mu_tail):
            raise InvariantViolationError("profile is not constant beyond x_i")
        object.__setattr__(self, "depth_grid", grid)
        object.__setattr__(self, "mu_values", mu)
        # natural end only on the right: mu'' ~ 0 in the constant tail, but
        # the surface curvature must stay free for the calibration
        object.__setattr__(self, "_spline",
                           CubicSpline(grid, mu, bc_type=("not-a-knot", "natural")))

    # -- evaluation ---------------------------------------------------------

    def mu(self, x):
        x = np.asarray(x, dtype=float)
        if self.mu_func is not None:
            return np.where(x >= self.x_i, self.mu_tail, self.mu_func(x))
        return np.where(x >= self.x_i, self.mu_tail, self._spline(x))

    def dmu(self, x):
        x = np.asarray(x, dtype=float)
        if self.dmu_func is not None:
            return np.where(x >= self.x_i, 0.0, self.dmu_func(x))
        return np.where(x >= self.x_i, 0.0, self._spline(x, 1))

    def d2mu(self, x):
        x = np.asarray(x, dtype=float)
        if self.d2mu_func is not None:
            return np.where(x >= self.x_i, 0.0, self.d2mu_func(x))
        return np.where(x >= self.x_i, 0.0, self._spline(x, 2))

    def last_cell_nonvanishing(self, rel_tol: float = TAIL_TOL) -> bool:
        """Grid-resolution stand-in for 'positive measure in every
        left-neighbourhood of x_i': some sample in the last cell before x_i
        differs from mu_tail."""
        grid = self.depth_grid
        inside = grid < self.x_i
        if not np.any(inside):
            return False
        last = np.max(np.nonzero(inside)[0])
        return abs(self.mu_values[last] - self.mu_tail) > rel_tol * self.mu_tail

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "depth_grid": self.depth_grid.tolist(),
            "mu": self.mu_values.tolist(),
            "mu_tail": self.mu_tail,
            "x_I": self.x_i,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ShearProfile":
        return cls(
            depth_grid=np.asarray(doc["depth_grid"], dtype=float),
            mu_values=np.asarray(doc["mu"], dtype=float),
            mu_tail=float(doc["mu_tail"]),
            x_i=float(doc["x_I"]),
        )


@dataclass(frozen=True)
class PotentialProfile:
    """Real potential V on [0, x_i] with Robin coefficient h.

    ``v_func`` optionally supplies the exact potential (used by the ODE
    integrator at off-grid nodes); otherwise values are cubic-interpolated.
    """

    grid: np.ndarray
    values: np.ndarray
    x_i: float
    h: float
    omega: Optional[float] = None
    v_func: Optional[Callable] = None
    _interp: CubicSpline = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise DomainError("potential grid must be strictly increasing")
        if vals.shape != grid.shape:
            raise DomainError("values must match grid in shape")
        if not np.all(np.isfinite(vals)):
            raise DomainError("potential values must be finite")
        if self.x_i <= 0:
            raise DomainError("x_i must be positive")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_interp", CubicSpline(grid, vals))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.v_func is not None:
            inside = self.v_func(x)
        else:
            inside = self._interp(np.clip(x, self.grid[0], self.grid[-1]))
        return np.where(x > self.x_i, 0.0, inside)

    @property
    def l1_norm(self) -> float:
        """||V|| = integral of |V| by composite trapezoid on the grid."""
        return float(np.trapezoid(np.abs(self.values), self.grid))

    def fourier(self, k):
        """V^(k) = int_0^{x_i} exp(2ikt) V(t) dt, composite trapezoid."""
        k = np.asarray(k, dtype=complex)
        t = self.grid
        phase = np.exp(2j * np.outer(np.atleast_1d(k).ravel(), t))
        vals = np.trapezoid(phase * self.values, t, axis=-1)
        return vals.reshape(np.shape(k)) if np.shape(k) else complex(vals[0])

    def last_cell_nonvanishing(self, abs_tol: float = 1e-12) -> bool:
        inside = self.grid < self.x_i
        if not np.any(inside):
            return False
        last = np.max(np.nonzero(inside)[0])
        return abs(self.values[last]) > abs_tol

    def to_dict(self) -> dict:
        doc = {
            "grid": self.grid.tolist(),
            "V": self.values.tolist(),
            "h": self.h,
            "x_I": self.x_i,
        }
        if self.omega is not None:
            doc["omega"] = self.omega
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "PotentialProfile":
        return cls(
            grid=np.asarray(doc["grid"], dtype=float),
            values=np.asarray(doc["V"], dtype=float),
            x_i=float(doc["x_I"]),
            h=float(doc["h"]),
            omega=float(doc["omega"]) if doc.get("omega") is not None else None,
        )


PHYSICAL = "physical"
UNPHYSICAL = "unphysical"


@dataclass(frozen=True)
class SheetPoint:
    """A wave number xi together with the Riemann-sheet it lives on."""

    xi: complex
    sheet: str

    def __post_init__(self):
        if self.sheet not in (PHYSICAL, UNPHYSICAL):
            raise DomainError(f"unknown sheet {self.sheet!r}")


def robin_coefficient(profile: ShearProfile) -> float:
    """Robin coefficient from the surface gradient of the shear modulus.

    The defining formula uses the derivative in Z = -x, so in stored (x)
    coordinates h = +(1/2) mu'(0)/mu(0) with mu' = d mu/dx... i.e. the Z-flip
    contributes one sign: h = -(1/2) * (d mu/dZ)(0)/mu(0) = (1/2)*(d mu/dx)(0)/mu(0).
    """
    mu0 = float(profile.mu(0.0))
    dmu0 = float(profile.dmu(0.0))
    return 0.5 * dmu0 / mu0


def calibrate(profile: ShearProfile, omega: float,
              n: int = DEFAULT_POTENTIAL_SIZE) -> PotentialProfile:
    """Transform a shear profile into the equivalent Schrodinger potential.

    V = (sqrt(mu))''/sqrt(mu) - omega^2/mu + omega^2/mu_tail, sampled on a
    uniform grid over [0, x_i]; V vanishes identically beyond x_i.
    """
    if omega <= 0:
        raise DomainError("omega must be positive")
    if not profile.last_cell_nonvanishing(rel_tol=1e-12):
        raise InvariantViolationError(
            "profile equals its tail value throughout the last grid cell")
    x = np.linspace(0.0, profile.x_i, n)
    mu = profile.mu(x)
    if np.any(mu <= 0):
        raise DomainError("shear modulus must be positive everywhere")
    dmu = profile.dmu(x)
    d2mu = profile.d2mu(x)
    # (sqrt(mu))''/sqrt(mu) = mu''/(2 mu) - (mu')^2/(4 mu^2)
    v = d2mu / (2.0 * mu) - dmu**2 / (4.0 * mu**2) \
        - omega**2 / mu + omega**2 / profile.mu_tail
    return PotentialProfile(grid=x, values=v, x_i=profile.x_i,
                            h=robin_coefficient(profile), omega=omega)


# -- sheet-aware maps -------------------------------------------------------

_CUT_NUDGE = 1e-14


def _nudged_xi(xi: complex, omega: float, mu_tail: float) -> complex:
    """Move a point sitting exactly on a cut to its conventional side.

    Convention: the imaginary-axis cut is approached from Re xi > 0; the real
    segment [-omega/sqrt(mu_tail), omega/sqrt(mu_tail)] from Im xi < 0, which
    makes the physical image of the segment the positive reals.
    """
    edge = omega / np.sqrt(mu_tail)
    scale = max(abs(xi), edge, 1.0)
    if xi.real == 0.0:
        xi = complex(_CUT_NUDGE * scale, xi.imag)
    if xi.imag == 0.0 and abs(xi.real) <= edge:
        xi = complex(xi.real, -_CUT_NUDGE * scale)
    return xi


def quasi_momentum(point: SheetPoint, omega: float, mu_tail: float) -> complex:
    """k_omega(xi) = i sqrt(xi^2 - omega^2/mu_tail) on the requested sheet.

    The branch is fixed so Im k > 0 on the physical sheet and Im k < 0 on the
    unphysical one; points exactly on a cut get the deterministic side of
    ``_nudged_xi``.
    """
    if omega <= 0 or mu_tail <= 0:
        raise DomainError("omega and mu_tail must be positive")
    xi = _nudged_xi(complex(point.xi), omega, mu_tail)
    w = np.sqrt(complex(xi * xi - omega**2 / mu_tail))  # principal: Re w >= 0
    k = 1j * w
    if point.sheet == UNPHYSICAL:
        k = -k
    return complex(k)


def xi_of_k(k: complex, omega: float, mu_tail: float) -> SheetPoint:
    """Inverse of ``quasi_momentum``: canonical xi with Re xi >= 0.

    Real k (exactly on the cut image) is assigned to the physical sheet.
    """
    if omega <= 0 or mu_tail <= 0:
        raise DomainError("omega and mu_tail must be positive")
    k = complex(k)
    xi = np.sqrt(complex(omega**2 / mu_tail - k * k))  # principal: Re xi >= 0
    sheet = PHYSICAL if k.imag >= 0 else UNPHYSICAL
    return SheetPoint(xi=complex(xi), sheet=sheet)


# -- JSON I/O ---------------------------------------------------------------

def load_shear_profile(path) -> ShearProfile:
    with open(path) as fh:
        return ShearProfile.from_dict(json.load(fh))


def save_shear_profile(profile: ShearProfile, path) -> None:
    with open(path, "w") as fh:
        json.dump(profile.to_dict(), fh, indent=1, sort_keys=True)


def load_potential(path) -> PotentialProfile:
    with open(path) as fh:
        return PotentialProfile.from_dict(json.load(fh))


def save_potential(potential: PotentialProfile, path) -> None:
    with open(path, "w") as fh:
        json.dump(potential.to_dict(), fh, indent=1, sort_keys=True)
