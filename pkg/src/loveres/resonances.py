"""Zero location for the Jost function: eigenvalues on the positive
imaginary axis, resonances in the lower half-plane.

Counting uses the argument principle evaluated as accumulated phase winding
over adaptively refined rectangle boundaries; location uses recursive
subdivision until each box isolates one zero, then Newton (Muller fallback).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import BoundaryDegeneracyError, CompletenessError
from .jost import JostEvaluator
from .profile import PotentialProfile, xi_of_k

ORIGIN_GUARD = 1e-3          # default exclusion margin around k = 0
BOX_DIAMETER = 0.5           # Newton starts only below this box diameter
PHASE_STEP_LIMIT = 1.5       # max trusted phase step between boundary samples


@dataclass(frozen=True)
class Rectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("degenerate rectangle")

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.re_max - self.re_min, self.im_max - self.im_min))

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max),
                       0.5 * (self.im_min + self.im_max))

    def contains(self, k: complex, pad: float = 0.0) -> bool:
        return (self.re_min - pad <= k.real <= self.re_max + pad
                and self.im_min - pad <= k.imag <= self.im_max + pad)

    def expanded(self, d: float) -> "Rectangle":
        return Rectangle(self.re_min - d, self.re_max + d,
                         self.im_min - d, self.im_max + d)

    def boundary(self, n: int) -> np.ndarray:
        """n points tracing the boundary counterclockwise (closed implicitly)."""
        per_side = max(n // 4, 4)
        t = np.arange(per_side) / per_side
        bottom = self.re_min + t * (self.re_max - self.re_min) + 1j * self.im_min
        right = self.re_max + 1j * (self.im_min + t * (self.im_max - self.im_min))
        top = self.re_max - t * (self.re_max - self.re_min) + 1j * self.im_max
        left = self.re_min + 1j * (self.im_max - t * (self.im_max - self.im_min))
        return np.concatenate([bottom, right, top, left])

    def as_tuple(self):
        return (self.re_min, self.re_max, self.im_min, self.im_max)


def count_zeros(fh: Callable, rect: Rectangle,
                n_start: int = 128, n_max: int = 1 << 16,
                guard_ratio: float = 1e-8,
                max_perturb: int = 8) -> int:
    """Number of zeros (with multiplicity) of an analytic function in rect.

    Phase winding is accumulated over boundary samples and the sampling is
    doubled until every phase step is small and the winding is integer-clean.
    A boundary sample with |f| below guard_ratio times the boundary median
    triggers a slight expansion of the rectangle (repeatedly, then fails).
    """
    r = rect
    scale = 1e-3 * max(rect.diameter, 1.0)
    for attempt in range(max_perturb + 1):
        n = n_start
        prev = None
        while n <= n_max:
            z = r.boundary(n)
            f = np.asarray(fh(z))
            med = np.median(np.abs(f))
            if med == 0.0 or np.min(np.abs(f)) < guard_ratio * med:
                break  # boundary zero suspected: perturb rectangle
            ratio = np.roll(f, -1) / f
            dphi = np.angle(ratio)
            total = float(np.sum(dphi))
            winding = int(np.round(total / (2.0 * np.pi)))
            clean = (np.max(np.abs(dphi)) < PHASE_STEP_LIMIT
                     and abs(total - 2.0 * np.pi * winding) < 0.25)
            if clean and prev == winding:
                return winding
            prev = winding if clean else None
            n *= 2
        r = rect.expanded(scale * (attempt + 1))
    raise BoundaryDegeneracyError(
        f"could not obtain a stable winding number on {rect} "
        f"after {max_perturb} perturbation attempts")


@dataclass
class ResonanceSet:
    """Zeros of a Jost-type function split into eigenvalues (on the positive
    imaginary axis) and resonances (lower half-plane)."""

    eigenvalues: np.ndarray          # complex, sorted by decreasing |k|
    resonances: np.ndarray           # complex, sorted by increasing Re
    eig_residuals: np.ndarray
    res_residuals: np.ndarray
    eig_multiplicities: np.ndarray
    res_multiplicities: np.ndarray
    search_region: Optional[Rectangle] = None
    unresolved: List[Rectangle] = field(default_factory=list)

    @classmethod
    def from_zeros(cls, zeros: Sequence[complex], residuals: Sequence[float],
                   multiplicities: Optional[Sequence[int]] = None,
                   search_region: Optional[Rectangle] = None,
                   unresolved: Optional[List[Rectangle]] = None,
                   axis_tol: float = 1e-9) -> "ResonanceSet":
        zeros = np.asarray(zeros, dtype=complex)
        residuals = np.asarray(residuals, dtype=float)
        if multiplicities is None:
            multiplicities = np.ones(zeros.size, dtype=int)
        multiplicities = np.asarray(multiplicities, dtype=int)
        upper = zeros.imag > 0
        eig, eig_r, eig_m = zeros[upper], residuals[upper], multiplicities[upper]
        res, res_r, res_m = zeros[~upper], residuals[~upper], multiplicities[~upper]
        order = np.argsort(-np.abs(eig))
        eig, eig_r, eig_m = eig[order], eig_r[order], eig_m[order]
        order = np.argsort(res.real + 1e-12 * res.imag)
        res, res_r, res_m = res[order], res_r[order], res_m[order]
        # eigenvalues are purely imaginary up to solver tolerance
        big = np.abs(eig.real) > np.maximum(axis_tol, 1e-9 * np.abs(eig))
        if np.any(big):
            raise CompletenessError(
                f"upper half-plane zeros off the imaginary axis: {eig[big]}")
        return cls(eig, res, eig_r, res_r, eig_m, res_m,
                   search_region=search_region, unresolved=unresolved or [])

    def all_zeros(self) -> np.ndarray:
        return np.concatenate([self.eigenvalues, self.resonances])

    def all_multiplicities(self) -> np.ndarray:
        return np.concatenate([self.eig_multiplicities, self.res_multiplicities])

    @property
    def n_eigenvalues(self) -> int:
        return int(np.sum(self.eig_multiplicities))

    def total_count(self) -> int:
        return int(np.sum(self.all_multiplicities()))

    def symmetry_defect(self) -> float:
        """max distance between the zero set and its image under k -> -conj k."""
        z = self.all_zeros()
        if z.size == 0:
            return 0.0
        mirrored = -np.conj(z)
        return float(np.max(np.min(np.abs(z[:, None] - mirrored[None, :]), axis=0)))

    # -- CSV schema: re_k, im_k, re_xi, im_xi, kind, residual, multiplicity --

    def to_csv(self, path, omega: Optional[float] = None,
               mu_tail: Optional[float] = None) -> None:
        with open(path, "w", newline="") as out:
            w = csv.writer(out)
            w.writerow(["re_k", "im_k", "re_xi", "im_xi", "kind",
                        "residual", "multiplicity"])
            for kind, ks, rs, ms in (
                    ("eigenvalue", self.eigenvalues, self.eig_residuals,
                     self.eig_multiplicities),
                    ("resonance", self.resonances, self.res_residuals,
                     self.res_multiplicities)):
                for k, r, m in zip(ks, rs, ms):
                    if omega is not None and mu_tail is not None:
                        xi = complex(xi_of_k(k, omega, mu_tail).xi)
                        xi_re, xi_im = repr(xi.real), repr(xi.imag)
                    else:
                        xi_re = xi_im = ""
                    k = complex(k)
                    w.writerow([repr(k.real), repr(k.imag), xi_re, xi_im,
                                kind, repr(float(r)), int(m)])

    @classmethod
    def from_csv(cls, path) -> "ResonanceSet":
        zeros, residuals, mults = [], [], []
        with open(path, newline="") as inp:
            for row in csv.DictReader(inp):
                zeros.append(complex(float(row["re_k"]), float(row["im_k"])))
                residuals.append(float(row.get("residual") or 0.0))
                mults.append(int(row.get("multiplicity") or 1))
        return cls.from_zeros(zeros, residuals, mults, axis_tol=1e-6)


# deliberately non-dyadic cut fractions: repeated midpoint cuts land on
# dyadic coordinates and can pass exactly through a zero that happens to sit
# on one (the winding then splits across the cut and multiplicity is lost)
_CUT_FRACS = (0.5137, 0.4863, 0.5521, 0.4479, 0.6042, 0.3958, 0.5)


def _split(rect: Rectangle, fh: Callable,
           transverse: bool = False) -> List[Rectangle]:
    """Bisect along the longer side (shorter if ``transverse``), shifting the
    cut off any nearby zero."""
    wide = (rect.re_max - rect.re_min) >= (rect.im_max - rect.im_min)
    if transverse:
        wide = not wide
    lo, hi = (rect.re_min, rect.re_max) if wide else (rect.im_min, rect.im_max)
    for frac in _CUT_FRACS:
        cut = lo + frac * (hi - lo)
        if wide:
            line = cut + 1j * np.linspace(rect.im_min, rect.im_max, 33)
        else:
            line = np.linspace(rect.re_min, rect.re_max, 33) + 1j * cut
        fv = np.abs(np.asarray(fh(line)))
        if np.min(fv) > 1e-6 * max(np.median(fv), 1e-300):
            if wide:
                return [Rectangle(rect.re_min, cut, rect.im_min, rect.im_max),
                        Rectangle(cut, rect.re_max, rect.im_min, rect.im_max)]
            return [Rectangle(rect.re_min, rect.re_max, rect.im_min, cut),
                    Rectangle(rect.re_min, rect.re_max, cut, rect.im_max)]
    # fall back to the first fraction; count_zeros will perturb if needed
    cut = lo + _CUT_FRACS[0] * (hi - lo)
    if wide:
        return [Rectangle(rect.re_min, cut, rect.im_min, rect.im_max),
                Rectangle(cut, rect.re_max, rect.im_min, rect.im_max)]
    return [Rectangle(rect.re_min, rect.re_max, rect.im_min, cut),
            Rectangle(rect.re_min, rect.re_max, cut, rect.im_max)]


def _exclude_origin(region: Rectangle, margin: float) -> List[Rectangle]:
    """Carve a margin-sized square around k = 0 out of the region."""
    if not region.contains(0.0):
        return [region]
    parts = []
    if region.re_min < -margin:
        parts.append(Rectangle(region.re_min, -margin, region.im_min, region.im_max))
    if region.re_max > margin:
        parts.append(Rectangle(margin, region.re_max, region.im_min, region.im_max))
    lo, hi = max(region.re_min, -margin), min(region.re_max, margin)
    if lo < hi:
        if region.im_min < -margin:
            parts.append(Rectangle(lo, hi, region.im_min, -margin))
        if region.im_max > margin:
            parts.append(Rectangle(lo, hi, margin, region.im_max))
    return parts


def _muller(fh: Callable, z0: complex, spread: float,
            tol: float, maxiter: int = 60) -> Optional[complex]:
    """Quadratic (Muller) iteration from three points around z0."""
    zs = [z0 - spread, z0 + spread * 1j, z0 + spread]
    fs = [complex(fh(z)) for z in zs]
    for _ in range(maxiter):
        z0_, z1, z2 = zs[-3], zs[-2], zs[-1]
        f0, f1, f2 = fs[-3], fs[-2], fs[-1]
        h1, h2 = z1 - z0_, z2 - z1
        if h1 == 0 or h2 == 0 or (h2 + h1) == 0:
            return None
        d1 = (f1 - f0) / h1
        d2 = (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = np.sqrt(b * b - 4 * f2 * a)
        den = b + disc if abs(b + disc) > abs(b - disc) else b - disc
        if den == 0:
            return None
        dz = -2 * f2 / den
        z3 = z2 + dz
        if not np.isfinite(z3):
            return None
        f3 = complex(fh(z3))
        zs.append(z3)
        fs.append(f3)
        if abs(dz) < tol:
            return z3
    return None


def find_zeros(fh: Callable, fh_dk: Callable, region: Rectangle,
               tol: float = 1e-10, origin_margin: float = ORIGIN_GUARD,
               max_depth: int = 60,
               fh_count: Optional[Callable] = None) -> ResonanceSet:
    """Locate every zero of fh in region to |dk| < tol.

    fh and fh_dk must accept complex arrays.  The region is subdivided until
    each box holds at most one zero and is smaller than BOX_DIAMETER, then all
    boxes are polished by batched Newton iteration; boxes whose Newton and
    Muller iterations both fail are reported in ``unresolved``.  Winding
    counts only need a few correct digits, so a cheaper evaluator can be
    supplied as fh_count.
    """
    fhc = fh_count or fh
    work = []
    total = 0
    for part in _exclude_origin(region, origin_margin):
        c = count_zeros(fhc, part)
        total += c
        if c:
            work.append((part, c))

    singles: List[Rectangle] = []
    doubles: List[tuple] = []       # (box, count) for multiple-zero collisions
    unresolved_splits: List[Rectangle] = []
    depth = 0
    while work and depth < max_depth:
        next_work = []
        for rect, cnt in work:
            if cnt == 1 and rect.diameter < BOX_DIAMETER:
                singles.append(rect)
                continue
            # a multiple zero can only be located to ~sqrt(eps) no matter the
            # tolerance (|f| is quadratically flat), so stop splitting there
            collision_diam = max(100 * tol,
                                 1.5e-8 * max(1.0, abs(rect.center)))
            if cnt >= 2 and rect.diameter < collision_diam:
                doubles.append((rect, cnt))   # unresolvable collision
                continue
            children = _split(rect, fhc)
            counts = [count_zeros(fhc, ch) for ch in children]
            if sum(counts) != cnt:
                # the cut swallowed a zero: re-split across the other axis
                children = _split(rect, fhc, transverse=True)
                counts = [count_zeros(fhc, ch) for ch in children]
                if sum(counts) != cnt:
                    unresolved_splits.append(rect)
                    continue
            for child, c in zip(children, counts):
                if c:
                    next_work.append((child, c))
        work = next_work
        depth += 1

    unresolved = unresolved_splits + [r for r, _ in work]

    zeros: List[complex] = []
    residuals: List[float] = []
    mults: List[int] = []

    # batched Newton from all box centers
    if singles:
        centers = np.array([r.center for r in singles], dtype=complex)
        active = np.ones(centers.size, dtype=bool)
        z = centers.copy()
        for _ in range(80):
            if not np.any(active):
                break
            fv = np.asarray(fh(z[active]))
            dv = np.asarray(fh_dk(z[active]))
            step = np.where(dv != 0, fv / np.where(dv != 0, dv, 1.0), 0.0)
            z_act = z[active] - step
            done = np.abs(step) < 0.1 * tol
            z[active] = z_act
            idx = np.nonzero(active)[0]
            active[idx[done]] = False
        for rect, zk in zip(singles, z):
            ok = np.isfinite(zk) and rect.contains(complex(zk), pad=10 * tol)
            if not ok:
                zk2 = _muller(lambda q: fh(np.atleast_1d(q))[0],
                              rect.center, 0.25 * rect.diameter, tol)
                if zk2 is not None and rect.contains(zk2, pad=10 * tol):
                    zk = zk2
                else:
                    unresolved.append(rect)
                    continue
            zk = complex(zk)
            zeros.append(zk)
            residuals.append(float(np.abs(fh(np.atleast_1d(zk))[0])))
            mults.append(1)

    for rect, cnt in doubles:
        zk = rect.center
        zeros.append(zk)
        residuals.append(float(np.abs(fh(np.atleast_1d(zk))[0])))
        mults.append(cnt)

    # dedupe (Newton basins can overlap across adjacent boxes)
    uniq_z, uniq_r, uniq_m = [], [], []
    for zk, r, m in zip(zeros, residuals, mults):
        if any(abs(zk - u) < 10 * tol for u in uniq_z):
            continue
        uniq_z.append(zk)
        uniq_r.append(r)
        uniq_m.append(m)

    return ResonanceSet.from_zeros(
        uniq_z, uniq_r, uniq_m, search_region=region, unresolved=unresolved,
        axis_tol=max(1e-9, 10 * tol))


COARSE_STEP_FACTOR = 0.03   # ~4e-5 relative accuracy: plenty for winding counts


def resonance_search(potential: PotentialProfile, h: float, region: Rectangle,
                     tol: float = 1e-10,
                     origin_margin: float = ORIGIN_GUARD) -> ResonanceSet:
    """find_zeros for the Jost function of (V, h) over region.

    Winding counts run on a coarse-step evaluator; Newton polish and the
    final residuals use the accurate one.
    """
    fine = JostEvaluator(potential, h)
    coarse = JostEvaluator(potential, h, step_factor=COARSE_STEP_FACTOR)
    return find_zeros(fine, fine.derivative, region, tol=tol,
                      origin_margin=origin_margin, fh_count=coarse)


def eigenvalues(potential: PotentialProfile, h: float,
                evaluator: Optional[JostEvaluator] = None,
                tol: float = 1e-12, n_scan: int = 2000) -> List[complex]:
    """Zeros of f_h on the positive imaginary axis by sign-change bisection
    of t -> Re f_h(it) followed by Newton polish."""
    ev = evaluator or JostEvaluator(potential, h)
    t_max = potential.l1_norm + abs(h) + 1.0
    t = np.linspace(ORIGIN_GUARD, t_max, n_scan)
    vals = np.real(ev(1j * t))
    roots = []
    sign = np.sign(vals)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in flips:
        t0 = brentq(lambda s: float(np.real(ev(1j * s))), t[i], t[i + 1],
                    xtol=1e-13)
        k0 = 1j * t0
        for _ in range(8):
            f, d = ev.value_and_derivative(k0)
            if d == 0:
                break
            step = f / d
            k0 = k0 - step
            if abs(step) < tol:
                break
        # keep the zero pinned to the axis (f_h is real there)
        k0 = 1j * k0.imag
        _, d = ev.value_and_derivative(k0)
        if abs(d) == 0:
            raise CompletenessError(f"eigenvalue at {k0} is not simple")
        roots.append(complex(k0))
    exact_zeros = [t0 for t0 in t[np.nonzero(vals == 0.0)]]
    roots.extend(1j * np.asarray(exact_zeros))
    return sorted(set(roots), key=lambda z: -abs(z))


def levinson_check(res_set: ResonanceSet, fh: Callable, r: float, x_i: float,
                   delta: float = 0.2, verify: bool = True) -> dict:
    """Counting-asymptotics report: N(r) pi / (2 x_i r) and the fraction of
    zeros outside the two near-real-axis sectors of half-angle delta."""
    region = res_set.search_region
    if verify:
        if region is None:
            raise CompletenessError("set carries no search region")
        if region.re_min > -r or region.re_max < r:
            raise CompletenessError("search region does not span [-r, r]")
        recount = 0
        for part in _exclude_origin(region, ORIGIN_GUARD):
            recount += count_zeros(fh, part)
        if recount != res_set.total_count():
            raise CompletenessError(
                f"set holds {res_set.total_count()} zeros, region holds {recount}")
        # no zeros hiding below the searched region, down to a buffer strip
        buffer = Rectangle(-r, r, region.im_min - 4.0, region.im_min)
        if count_zeros(fh, buffer) != 0:
            raise CompletenessError("zeros found below the searched region")
    z = res_set.all_zeros()
    m = res_set.all_multiplicities()
    inside = np.abs(z) <= r
    n_r = int(np.sum(m[inside]))
    ratio = n_r * np.pi / (2.0 * x_i * r)
    args = np.angle(z[inside])
    off_axis = np.minimum.reduce([np.abs(args), np.abs(np.pi - args),
                                  np.abs(np.pi + args)]) >= delta
    frac = float(np.sum(m[inside][off_axis]) / max(n_r, 1))
    return {"r": r, "count": n_r, "ratio": float(ratio),
            "outside_sector_fraction": frac, "delta": delta}


def forbidden_domain_xi(res_set: ResonanceSet, omega: float, mu_tail: float,
                        potential: PotentialProfile, h: float) -> dict:
    """Map each zero to the xi plane and report the forbidden-domain slacks
    |xi_n| <= C0 exp(2 |Re xi_n| x_i) (and the C1 variant using the grid
    total variation for ||V'||).  Violations are reported, never raised."""
    norm_v = potential.l1_norm
    x_i = potential.x_i
    c0 = norm_v * np.exp(norm_v)
    tv = float(np.sum(np.abs(np.diff(potential.values))))
    v0 = float(abs(potential.values[0]))
    c1 = (1.5 * norm_v**2 + 2.0 * abs(h) * norm_v
          + 0.25 * (v0 + tv) * np.exp(norm_v))
    entries = []
    for k in res_set.all_zeros():
        xi = xi_of_k(k, omega, mu_tail).xi
        grow = np.exp(2.0 * abs(xi.real) * x_i)
        entries.append({
            "k": k, "xi": xi,
            "c0_slack": float(c0 * grow - abs(xi)),
            "c1_slack": float(c1 * grow - abs(xi) ** 2),
            "asym_defect": float(abs(k + 1j * xi)),
        })
    return {"c0": float(c0), "c1": float(c1), "entries": entries,
            "all_c0_hold": all(e["c0_slack"] >= 0 for e in entries)}
