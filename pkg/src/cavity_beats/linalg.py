"""Dense complex matrix helpers and density-matrix validation.

Everything here works on plain numpy arrays. Validated density matrices
are returned as read-only views so downstream code cannot mutate them by
accident. All Hilbert spaces in this package are tiny (at most a few tens
of dimensions), so dense algebra is used throughout.
"""

from __future__ import annotations

import numpy as np

HERM_TOL = 1e-12
TRACE_TOL = 1e-10
EIG_FLOOR = -1e-9


class DriftError(RuntimeError):
    """Numerical drift exceeded the allowed tolerance during integration."""


def _as_square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return AB - BA for square matrices of equal dimension."""
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two matrices (thin wrapper over numpy)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def density_matrix(
    m: np.ndarray,
    herm_tol: float = HERM_TOL,
    trace_tol: float = TRACE_TOL,
    eig_floor: float = EIG_FLOOR,
) -> np.ndarray:
    """Validate m as a density matrix and return it read-only.

    Checks Hermiticity, unit trace and positivity (smallest eigenvalue not
    below eig_floor). Raises ValueError describing the first violation.
    """
    m = _as_square(m, "density matrix")
    herm_dev = np.max(np.abs(m - m.conj().T))
    if herm_dev > herm_tol:
        raise ValueError(f"not Hermitian: max deviation {herm_dev:.3e} > {herm_tol:.1e}")
    trace_dev = abs(m.trace() - 1.0)
    if trace_dev > trace_tol:
        raise ValueError(f"trace deviates from 1 by {trace_dev:.3e} > {trace_tol:.1e}")
    # eigvalsh on the symmetrized matrix; the anti-Hermitian part is below herm_tol
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if w[0] < eig_floor:
        raise ValueError(f"negative eigenvalue {w[0]:.3e} below {eig_floor:.1e}")
    out = m.copy()
    out.flags.writeable = False
    return out


def pure_state(index: int, dim: int) -> np.ndarray:
    """Density matrix |i><i| on a dim-dimensional space."""
    if not 0 <= index < dim:
        raise ValueError(f"index {index} outside [0, {dim})")
    m = np.zeros((dim, dim), dtype=complex)
    m[index, index] = 1.0
    return density_matrix(m)


def partial_trace_field(rho: np.ndarray, dims: tuple[int, int, int]) -> np.ndarray:
    """Trace out both field modes of an atom (x) mode-a (x) mode-b state.

    dims is (atom_dim, n_a, n_b) with the composite index ordered
    atom-major: i = atom*n_a*n_b + photons_a*n_b + photons_b.
    """
    rho = _as_square(rho, "rho")
    d_atom, n_a, n_b = dims
    if d_atom <= 0 or n_a <= 0 or n_b <= 0:
        raise ValueError(f"dims must be positive, got {dims}")
    if rho.shape[0] != d_atom * n_a * n_b:
        raise ValueError(
            f"dimension {rho.shape[0]} does not factor as {d_atom}*{n_a}*{n_b}"
        )
    r = rho.reshape(d_atom, n_a, n_b, d_atom, n_a, n_b)
    return np.einsum("ipqjpq->ij", r)


def hermitize_and_check(m: np.ndarray, tol: float) -> tuple[np.ndarray, float]:
    """Symmetrize and renormalize m, returning (rho, applied correction).

    The correction magnitude is the larger of the anti-Hermitian deviation
    and the trace deviation. Beyond tol the state is considered corrupted
    and DriftError is raised (integration failure, not a recoverable blip).
    """
    m = _as_square(m, "matrix")
    herm_dev = np.max(np.abs(m - m.conj().T))
    trace_dev = abs(m.trace() - 1.0)
    correction = max(herm_dev, trace_dev)
    if correction > tol:
        raise DriftError(
            f"drift {correction:.3e} exceeds tolerance {tol:.1e} "
            f"(hermiticity {herm_dev:.3e}, trace {trace_dev:.3e})"
        )
    out = (m + m.conj().T) / 2
    out /= out.trace().real
    return out, correction


def dump_matrix(m: np.ndarray) -> str:
    """Debug dump: one row per line, entries as re+imj separated by tabs."""
    m = np.asarray(m, dtype=complex)
    lines = []
    for row in np.atleast_2d(m):
        lines.append("\t".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in row))
    return "\n".join(lines)
