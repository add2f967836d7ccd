"""Dense linear algebra for the small real matrices used by the simulation.

Only dimensions 2, 4 and 8 occur (single quadrature pairs, the mechanical
submatrix, and the full drift/covariance matrices).  LAPACK via numpy backs
the eigenvalue and determinant routines; the symmetric 2x2 decomposition is
closed-form.  All other modules route their linear algebra through here so
the tolerances live in one place.
"""

from __future__ import annotations

import numpy as np

ALLOWED_DIMS = (2, 4, 8)

#: Residual bound guaranteed by :func:`eigenvalues`, relative to ||m||.
EIG_RESIDUAL_RTOL = 1e-9


class MatrixError(ValueError):
    """Raised for malformed matrix input (shape, finiteness, symmetry)."""


class EigenvalueError(RuntimeError):
    """Eigenvalue iteration failed to converge; carries the input matrix."""

    def __init__(self, message, matrix):
        super().__init__(message)
        self.matrix = np.array(matrix)


def _as_matrix(m, require_dim=None) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MatrixError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] not in ALLOWED_DIMS:
        raise MatrixError(f"dimension {a.shape[0]} not in {ALLOWED_DIMS}")
    if require_dim is not None and a.shape[0] != require_dim:
        raise MatrixError(f"expected {require_dim}x{require_dim}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise MatrixError("matrix has non-finite entries")
    return a


def eigenvalues(m) -> np.ndarray:
    """All eigenvalues of a real matrix, sorted by (real, imag).

    Sorting makes the ordering deterministic for identical input.  LAPACK's
    backward-stable QR iteration keeps the implied residual below
    ``EIG_RESIDUAL_RTOL * ||m||``.
    """
    a = _as_matrix(m)
    try:
        vals = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise EigenvalueError(f"eigenvalue iteration did not converge: {exc}", a) from exc
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]


def det(m) -> float:
    a = _as_matrix(m)
    return float(np.linalg.det(a))


def sym_eig_2x2(m, tol: float = 1e-10):
    """Closed-form eigendecomposition of a symmetric 2x2 matrix.

    Returns ``(eigvals, angle)`` with the eigenvalues ascending and the angle
    in [0, pi) such that ``R @ diag(eigvals) @ R.T`` reconstructs the input,
    where ``R = [[cos a, sin a], [-sin a, cos a]]`` (see :func:`rot2_cw`).
    """
    a = _as_matrix(m, require_dim=2)
    if abs(a[0, 1] - a[1, 0]) > tol:
        raise MatrixError(
            f"matrix is not symmetric within {tol:g}: "
            f"|m01 - m10| = {abs(a[0, 1] - a[1, 0]):.3e}"
        )
    b = 0.5 * (a[0, 1] + a[1, 0])
    mean = 0.5 * (a[0, 0] + a[1, 1])
    half = 0.5 * (a[0, 0] - a[1, 1])
    r = np.hypot(half, b)
    lo, hi = mean - r, mean + r
    # Eigenvector of the smaller eigenvalue; stable branch choice.
    if r == 0.0:
        v = np.array([1.0, 0.0])
    elif half <= 0.0:
        v = np.array([half - r, b])  # (a00 - hi, b) direction
    else:
        v = np.array([-b, half + r])
    n = np.hypot(v[0], v[1])
    if n == 0.0:
        v = np.array([1.0, 0.0])
    else:
        v = v / n
    angle = float(np.arctan2(-v[1], v[0])) % np.pi
    return np.array([lo, hi]), angle


def rot2_cw(angle: float) -> np.ndarray:
    """The rotation ``[[cos, sin], [-sin, cos]]`` used by :func:`sym_eig_2x2`."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, s], [-s, c]])


def rot2_ccw(angle: float) -> np.ndarray:
    """Counter-clockwise rotation ``[[cos, -sin], [sin, cos]]``."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def symplectic_form(dim: int) -> np.ndarray:
    """Block-diagonal symplectic form for the canonical pair ordering.

    For dim = 2k the quadrature vector is (q1, p1, q2, p2, ...) and Omega has
    k blocks [[0, 1], [-1, 0]] on the diagonal.
    """
    if dim % 2:
        raise MatrixError(f"symplectic form needs an even dimension, got {dim}")
    omega = np.zeros((dim, dim))
    for k in range(dim // 2):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


def symplectic_eigenvalues(v) -> np.ndarray:
    """Symplectic spectrum of a symmetric positive covariance matrix.

    The moduli of the eigenvalues of ``i Omega V`` come in equal pairs for
    symmetric V; one representative per pair is returned, ascending.
    Physical Gaussian states have all values >= 1/2 in the vacuum = 1/2
    variance convention used throughout.
    """
    a = _as_matrix(v)
    omega = symplectic_form(a.shape[0])
    vals = np.abs(np.linalg.eigvals(1j * (omega @ a)))
    vals.sort()
    return vals[::2]
