"""Reduced atomic master equation after adiabatic elimination of the cavity.

Both cavity modes are heavily damped, so the field follows the atom and the
atomic density matrix obeys a closed equation with effective decay rates,
level shifts and explicitly time-dependent cross terms oscillating at twice
the intermediate-level splitting. The equation is written in the interaction
picture of the bare atom.

Two implementations of the right-hand side are kept deliberately separate:
an operator form built from commutators and jump contributions, and an
element form that spells out all sixteen matrix entries. They are developed
independently and cross-checked against each other in the tests; do not
"simplify" one into a call of the other.
"""

from __future__ import annotations

import warnings

import numpy as np

from .integrator import IntegratorConfig, integrate
from .linalg import DriftError, density_matrix, hermitize_and_check
from .model import RateSet
from .series import TimeSeries

DRIFT_TOL = 1e-6
POSITIVITY_FLOOR = -1e-6


def _proj(i: int, j: int) -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    m[i, j] = 1.0
    return m


# Atomic basis operators |i><j| in the (e, 1, 2, g) ordering.
A_EE = _proj(0, 0)
A_11 = _proj(1, 1)
A_22 = _proj(2, 2)
A_GG = _proj(3, 3)
A_12 = _proj(1, 2)


def rhs_operator_form(t: float, rho: np.ndarray, rates: RateSet, eta: float = 1.0) -> np.ndarray:
    """Master-equation right-hand side assembled from operator products.

    eta scales only the cross terms that exist because one polarization
    couples to both intermediate levels; eta = 0 removes the interference
    while keeping every single-transition rate.
    """
    r = rates
    e_plus = np.exp(2j * r.Omega * t)
    e_minus = np.conj(e_plus)

    shift = (r.delta_1 + r.delta_2) * A_EE + r.delta_1p * A_11 + r.delta_2p * A_22
    out = -1j * (shift @ rho - rho @ shift)

    # Independent decay channels e -> 1, e -> 2, 1 -> g, 2 -> g.
    out += r.Gamma_1 * (2 * rho[0, 0] * A_11 - A_EE @ rho - rho @ A_EE)
    out += r.Gamma_2 * (2 * rho[0, 0] * A_22 - A_EE @ rho - rho @ A_EE)
    out += r.Gamma_1p * (2 * rho[1, 1] * A_GG - A_11 @ rho - rho @ A_11)
    out += r.Gamma_2p * (2 * rho[2, 2] * A_GG - A_22 @ rho - rho @ A_22)

    # Cross terms: upper feeding of the 1-2 coherence, coherence feeding of
    # the ground state, and the one-sided couplings that mix the coherence
    # into the intermediate populations. Each enters with its conjugate
    # transpose.
    cross = (eta * r.cross_upper * rho[0, 0] * e_plus) * A_12
    cross += (eta * r.cross_ground * rho[1, 2] * e_minus) * A_GG
    cross -= eta * e_plus * (r.cross_left * (A_12 @ rho) + r.cross_right * (rho @ A_12))
    out += cross + cross.conj().T
    return out


def rhs_element_form(t: float, rho: np.ndarray, rates: RateSet, eta: float = 1.0) -> np.ndarray:
    """Master-equation right-hand side with every matrix element written out.

    Valid for Hermitian rho (the conjugate elements are spelled out under
    that assumption). Kept as an independent derivation of
    rhs_operator_form.
    """
    r = rates
    ep = np.exp(2j * r.Omega * t)
    em = np.conj(ep)
    G = r.Gamma_1 + r.Gamma_2
    dsum = r.delta_1 + r.delta_2
    B1 = r.cross_right
    B2 = r.cross_left

    out = np.empty((4, 4), dtype=complex)

    out[0, 0] = -2 * G * rho[0, 0]
    out[0, 1] = (-1j * dsum + 1j * r.delta_1p - (G + r.Gamma_1p)) * rho[0, 1] \
        - eta * np.conj(B2) * em * rho[0, 2]
    out[0, 2] = (-1j * dsum + 1j * r.delta_2p - (G + r.Gamma_2p)) * rho[0, 2] \
        - eta * B1 * ep * rho[0, 1]
    out[0, 3] = (-1j * dsum - G) * rho[0, 3]

    out[1, 0] = (1j * dsum - 1j * r.delta_1p - (G + r.Gamma_1p)) * rho[1, 0] \
        - eta * B2 * ep * rho[2, 0]
    out[1, 1] = 2 * r.Gamma_1 * rho[0, 0] - 2 * r.Gamma_1p * rho[1, 1] \
        - eta * B2 * ep * rho[2, 1] - eta * np.conj(B2) * em * rho[1, 2]
    out[1, 2] = -(r.Gamma_1p + r.Gamma_2p + 1j * (r.delta_1p - r.delta_2p)) * rho[1, 2] \
        + eta * r.cross_upper * ep * rho[0, 0] \
        - eta * ep * (B2 * rho[2, 2] + B1 * rho[1, 1])
    out[1, 3] = -(r.Gamma_1p + 1j * r.delta_1p) * rho[1, 3] - eta * B2 * ep * rho[2, 3]

    out[2, 0] = (1j * dsum - 1j * r.delta_2p - (G + r.Gamma_2p)) * rho[2, 0] \
        - eta * np.conj(B1) * em * rho[1, 0]
    out[2, 1] = -(r.Gamma_1p + r.Gamma_2p - 1j * (r.delta_1p - r.delta_2p)) * rho[2, 1] \
        + eta * np.conj(r.cross_upper) * em * rho[0, 0] \
        - eta * em * (np.conj(B2) * rho[2, 2] + np.conj(B1) * rho[1, 1])
    out[2, 2] = 2 * r.Gamma_2 * rho[0, 0] - 2 * r.Gamma_2p * rho[2, 2] \
        - eta * B1 * ep * rho[2, 1] - eta * np.conj(B1) * em * rho[1, 2]
    out[2, 3] = -(r.Gamma_2p + 1j * r.delta_2p) * rho[2, 3] - eta * np.conj(B1) * em * rho[1, 3]

    out[3, 0] = (1j * dsum - G) * rho[3, 0]
    out[3, 1] = -(r.Gamma_1p - 1j * r.delta_1p) * rho[3, 1] - eta * np.conj(B2) * em * rho[3, 2]
    out[3, 2] = -(r.Gamma_2p - 1j * r.delta_2p) * rho[3, 2] - eta * B1 * ep * rho[3, 1]
    out[3, 3] = 2 * r.Gamma_1p * rho[1, 1] + 2 * r.Gamma_2p * rho[2, 2] \
        + eta * r.cross_ground * em * rho[1, 2] + eta * np.conj(r.cross_ground) * ep * rho[2, 1]

    return out


RHS_FORMS = {"operator": rhs_operator_form, "element": rhs_element_form}


def evolve(
    rho0: np.ndarray,
    t_grid: np.ndarray,
    rates: RateSet,
    eta: float = 1.0,
    form: str = "operator",
    config: IntegratorConfig | None = None,
    drift_tol: float = DRIFT_TOL,
    positivity_floor: float = POSITIVITY_FLOOR,
) -> TimeSeries:
    """Integrate the reduced master equation over t_grid.

    Every sample is validated: hermiticity and trace are repaired when the
    deviation stays below drift_tol and the largest repair is reported on
    the returned series; larger drift raises DriftError. A negative
    population eigenvalue beyond positivity_floor is recorded as a
    diagnostic and warned about, never silently accepted.
    """
    if form not in RHS_FORMS:
        raise ValueError(f"unknown rhs form {form!r}")
    rhs = RHS_FORMS[form]
    rho0 = density_matrix(rho0)

    def f(t: float, y: np.ndarray) -> np.ndarray:
        return rhs(t, y.reshape(4, 4), rates, eta).ravel()

    raw = integrate(f, rho0.ravel(), np.asarray(t_grid, dtype=float), config)

    states = np.empty((raw.shape[0], 4, 4), dtype=complex)
    max_corr = 0.0
    worst_eig = 0.0
    n_negative = 0
    diagnostics: list[str] = []
    for i in range(raw.shape[0]):
        try:
            states[i], corr = hermitize_and_check(raw[i].reshape(4, 4), tol=drift_tol)
        except DriftError as exc:
            raise DriftError(f"sample {i} (t={t_grid[i]:.6g}): {exc}") from exc
        max_corr = max(max_corr, corr)
        lo = float(np.linalg.eigvalsh(states[i])[0])
        if lo < positivity_floor:
            n_negative += 1
            worst_eig = min(worst_eig, lo)
            if len(diagnostics) < 20:
                diagnostics.append(f"negative eigenvalue {lo:.3e} at t={t_grid[i]:.6g}")
    if n_negative:
        warnings.warn(
            f"positivity violated at {n_negative} of {raw.shape[0]} samples "
            f"(worst eigenvalue {worst_eig:.3e})",
            stacklevel=2,
        )
        if n_negative > len(diagnostics):
            diagnostics.append(f"... {n_negative} samples below {positivity_floor:g} in total")

    return TimeSeries(
        times=np.asarray(t_grid, dtype=float),
        states=states,
        diagnostics=diagnostics,
        max_drift_correction=max_corr,
    )
