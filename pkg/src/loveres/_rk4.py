"""Fixed-step RK4 integration of the Faddeev-scaled Jost system.

States per wave number k (all complex):
    chi   = f(x,k) exp(-ikx)           chi'' + 2ik chi' = V chi
    psi   = (d/dk f)(x,k) exp(-ikx)    psi'' + 2ik psi' = V psi - 2k chi
integrated backward from x_i (chi = 1, chi' = 0, psi = i x_i, psi' = i) to
the left endpoint.  V is sampled once on the half-step grid shared by the
whole batch.
"""

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def _integrate(k, v_half, x_hi, x_lo, n_steps, with_deriv):
    """Backward RK4 over [x_lo, x_hi] for a batch of k values.

    v_half holds V at the 2*n_steps + 1 half-step nodes from x_lo to x_hi.
    Returns (chi, chip, psi, psip) at x_lo.
    """
    m = k.shape[0]
    h = (x_lo - x_hi) / n_steps  # negative
    chi = np.ones(m, dtype=np.complex128)
    chip = np.zeros(m, dtype=np.complex128)
    psi = np.empty(m, dtype=np.complex128)
    psip = np.empty(m, dtype=np.complex128)
    for j in range(m):
        psi[j] = 1j * x_hi
        psip[j] = 1j
    for s in range(n_steps):
        # node indices on the half-step grid, counting down from x_hi
        i0 = 2 * (n_steps - s)
        v0 = v_half[i0]
        vm = v_half[i0 - 1]
        v1 = v_half[i0 - 2]
        for j in range(m):
            tik = 2j * k[j]
            tk = 2.0 * k[j]
            c, cp = chi[j], chip[j]
            p, pp = psi[j], psip[j]

            k1c = cp
            k1cp = v0 * c - tik * cp
            k1p = pp
            k1pp = v0 * p - tk * c - tik * pp

            c2 = c + 0.5 * h * k1c
            cp2 = cp + 0.5 * h * k1cp
            p2 = p + 0.5 * h * k1p
            pp2 = pp + 0.5 * h * k1pp
            k2c = cp2
            k2cp = vm * c2 - tik * cp2
            k2p = pp2
            k2pp = vm * p2 - tk * c2 - tik * pp2

            c3 = c + 0.5 * h * k2c
            cp3 = cp + 0.5 * h * k2cp
            p3 = p + 0.5 * h * k2p
            pp3 = pp + 0.5 * h * k2pp
            k3c = cp3
            k3cp = vm * c3 - tik * cp3
            k3p = pp3
            k3pp = vm * p3 - tk * c3 - tik * pp3

            c4 = c + h * k3c
            cp4 = cp + h * k3cp
            p4 = p + h * k3p
            pp4 = pp + h * k3pp
            k4c = cp4
            k4cp = v1 * c4 - tik * cp4
            k4p = pp4
            k4pp = v1 * p4 - tk * c4 - tik * pp4

            chi[j] = c + (h / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
            chip[j] = cp + (h / 6.0) * (k1cp + 2.0 * k2cp + 2.0 * k3cp + k4cp)
            if with_deriv:
                psi[j] = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
                psip[j] = pp + (h / 6.0) * (k1pp + 2.0 * k2pp + 2.0 * k3pp + k4pp)
    return chi, chip, psi, psip


@njit(cache=True)
def _integrate_traj(k, v_half, x_hi, x_lo, n_steps):
    """As ``_integrate`` for a single k, storing chi at every node (for the
    norming-constant quadrature).  Returns chi along the descending grid."""
    h = (x_lo - x_hi) / n_steps
    chi = 1.0 + 0j
    chip = 0.0 + 0j
    traj = np.empty(n_steps + 1, dtype=np.complex128)
    traj[n_steps] = chi
    tik = 2j * k
    for s in range(n_steps):
        i0 = 2 * (n_steps - s)
        v0 = v_half[i0]
        vm = v_half[i0 - 1]
        v1 = v_half[i0 - 2]

        k1c = chip
        k1cp = v0 * chi - tik * chip
        c2 = chi + 0.5 * h * k1c
        cp2 = chip + 0.5 * h * k1cp
        k2c = cp2
        k2cp = vm * c2 - tik * cp2
        c3 = chi + 0.5 * h * k2c
        cp3 = chip + 0.5 * h * k2cp
        k3c = cp3
        k3cp = vm * c3 - tik * cp3
        c4 = chi + h * k3c
        cp4 = chip + h * k3cp
        k4c = cp4
        k4cp = v1 * c4 - tik * cp4

        chi = chi + (h / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
        chip = chip + (h / 6.0) * (k1cp + 2.0 * k2cp + 2.0 * k3cp + k4cp)
        traj[n_steps - s - 1] = chi
    return traj
