"""Dense complex linear algebra primitives.

Everything downstream (metric evolution, scattering, toy models) builds on
the operations here: Hermiticity and positivity predicates, the Hermitian
principal square root, biorthogonal eigendecompositions of diagonalizable
non-Hermitian matrices, and matrix-exponential propagators.

All functions are pure; matrices are plain ``numpy.ndarray`` values of
complex dtype and are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    NonHermitianInput,
    NotDiagonalizable,
    NotPositive,
)

__all__ = [
    "BiorthogonalSystem",
    "as_operator",
    "frobenius",
    "hermiticity_defect",
    "positivity_check",
    "hermitian_sqrt",
    "biorthogonal_decompose",
    "propagator",
    "spectrum_reality_check",
]

#: Default relative scale for Hermiticity checks.
HERMITICITY_TOL = 1e-10

#: Relative eigenvalue-gap floor below which a spectrum counts as degenerate.
GAP_TOL = 1e-8


def as_operator(m) -> np.ndarray:
    """Validate and coerce ``m`` to a finite square complex matrix."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise DimensionMismatch("matrix entries must be finite")
    return a


def frobenius(m) -> float:
    """Frobenius norm, the matrix norm used throughout the package."""
    return float(np.linalg.norm(m))


def hermiticity_defect(m) -> float:
    """``||M - M^dagger||_F``; zero exactly when M is Hermitian."""
    a = as_operator(m)
    return frobenius(a - a.conj().T)


def _require_hermitian(m, tol):
    a = as_operator(m)
    defect = frobenius(a - a.conj().T)
    if defect > tol * max(1.0, frobenius(a)):
        raise NonHermitianInput(
            f"hermiticity defect {defect:.3e} exceeds tolerance"
        )
    return 0.5 * (a + a.conj().T)


def positivity_check(m, tol=HERMITICITY_TOL):
    """Return ``(is_positive_definite, smallest_eigenvalue)`` of Hermitian M.

    Raises :class:`NonHermitianInput` when the Hermiticity defect exceeds
    ``tol`` relative to the matrix norm.
    """
    a = _require_hermitian(m, tol)
    smallest = float(np.linalg.eigvalsh(a)[0])
    return smallest > 0.0, smallest


def hermitian_sqrt(theta, tol=HERMITICITY_TOL) -> np.ndarray:
    """Hermitian positive-definite principal square root of ``theta``.

    This is the canonical factor in the decomposition theta = Omega^dagger
    Omega; it is the unique positive choice and varies smoothly with theta.
    """
    a = _require_hermitian(theta, tol)
    vals, vecs = np.linalg.eigh(a)
    if vals[0] <= 0.0:
        raise NotPositive(f"smallest eigenvalue {vals[0]:.3e} is not positive")
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


@dataclass(frozen=True)
class BiorthogonalSystem:
    """Eigenvalues with paired right/left eigenvector families.

    Columns of ``right`` are eigenvectors of H, columns of ``left`` are
    eigenvectors of H^dagger, normalized so that ``left^dagger @ right`` is
    the identity.  Right vectors have unit Euclidean norm with their first
    significant component rotated to the positive real axis, which makes
    decompositions reproducible.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray

    @property
    def dim(self) -> int:
        return self.right.shape[0]

    def biorthonormality_residual(self) -> float:
        """Max deviation of ``<left_m|right_n>`` from the Kronecker delta."""
        gram = self.left.conj().T @ self.right
        return float(np.max(np.abs(gram - np.eye(self.dim))))

    def eigen_residual(self, h) -> float:
        """Max residual of the right/left eigenvalue equations for ``h``."""
        h = as_operator(h)
        r = np.max(np.abs(h @ self.right - self.right * self.eigenvalues))
        l = np.max(
            np.abs(h.conj().T @ self.left - self.left * self.eigenvalues.conj())
        )
        return float(max(r, l))


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Unit-normalize columns; rotate first significant entry real positive."""
    out = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
    d = out.shape[0]
    for n in range(d):
        col = out[:, n]
        idx = np.argmax(np.abs(col) > 1e-12)
        phase = col[idx] / abs(col[idx])
        out[:, n] = col / phase
    return out


def _refine_eigenpair(a, lam, v, iterations=2):
    """Newton refinement of one eigenpair via the bordered system.

    Solves ``[[A - lam I, -v], [v^dag, 0]] (dv, dlam) = (-r, 0)`` so the
    eigenvector correction stays orthogonal to the current iterate; two
    iterations push the residual to roundoff even for poorly separated
    spectra, which is what keeps downstream static-metric residuals at
    the 1e-12 scale.
    """
    n = a.shape[0]
    eye = np.eye(n)
    for _ in range(iterations):
        residual = a @ v - lam * v
        bordered = np.zeros((n + 1, n + 1), dtype=complex)
        bordered[:n, :n] = a - lam * eye
        bordered[:n, n] = -v
        bordered[n, :n] = v.conj()
        rhs = np.concatenate([-residual, [0.0]])
        try:
            sol = np.linalg.solve(bordered, rhs)
        except np.linalg.LinAlgError:
            break
        v = v + sol[:n]
        lam = lam + sol[n]
        v = v / np.linalg.norm(v)
    return lam, v


def biorthogonal_decompose(h, gap_tol=None) -> BiorthogonalSystem:
    """Decompose a diagonalizable matrix into a biorthonormal eigensystem.

    Eigenvalues are sorted by (real, imaginary) part.  Raises
    :class:`DegenerateSpectrum` when the smallest eigenvalue gap falls
    below ``gap_tol`` (default ``GAP_TOL`` times the matrix norm) and
    :class:`NotDiagonalizable` when the eigenvector matrix is numerically
    defective.
    """
    a = as_operator(h)
    if gap_tol is None:
        gap_tol = GAP_TOL * max(1.0, frobenius(a))
    vals, vecs = np.linalg.eig(a)
    for n in range(a.shape[0]):
        vals[n], vecs[:, n] = _refine_eigenpair(a, vals[n], vecs[:, n])
    order = np.lexsort((vals.imag, vals.real))
    vals, vecs = vals[order], vecs[:, order]

    diffs = np.abs(vals[:, None] - vals[None, :])
    np.fill_diagonal(diffs, np.inf)
    gap = float(diffs.min()) if a.shape[0] > 1 else np.inf
    if gap < gap_tol:
        raise DegenerateSpectrum(
            f"minimal eigenvalue gap {gap:.3e} below tolerance {gap_tol:.3e}"
        )

    right = _fix_phases(vecs)
    cond = np.linalg.cond(right)
    if not np.isfinite(cond) or cond > 1e12:
        raise NotDiagonalizable(f"eigenvector condition number {cond:.3e}")
    left = np.linalg.inv(right).conj().T
    return BiorthogonalSystem(eigenvalues=vals, right=right, left=left)


def propagator(h, dt, method="auto") -> np.ndarray:
    """Evolution operator ``exp(-i H dt)``.

    ``method`` selects the evaluation path: ``"spectral"`` exponentiates
    eigenvalues on the (bi)orthogonal eigenbasis, ``"pade"`` uses
    scaling-and-squaring, and ``"auto"`` prefers the spectral route,
    falling back to Pade when the spectrum is degenerate or defective.
    The two paths cross-validate each other in the test suite.
    """
    a = as_operator(h)
    if dt == 0.0:
        return np.eye(a.shape[0], dtype=complex)
    if method not in ("auto", "spectral", "pade"):
        raise ValueError(f"unknown propagator method {method!r}")

    if method in ("auto", "spectral"):
        if hermiticity_defect(a) <= HERMITICITY_TOL * max(1.0, frobenius(a)):
            vals, vecs = np.linalg.eigh(0.5 * (a + a.conj().T))
            return (vecs * np.exp(-1j * vals * dt)) @ vecs.conj().T
        try:
            sys = biorthogonal_decompose(a)
        except (DegenerateSpectrum, NotDiagonalizable):
            if method == "spectral":
                raise
        else:
            phases = np.exp(-1j * sys.eigenvalues * dt)
            return (sys.right * phases) @ sys.left.conj().T
    return scipy.linalg.expm(-1j * dt * a)


def spectrum_reality_check(h, tol=1e-9) -> bool:
    """True when every eigenvalue has imaginary part below ``tol``."""
    a = as_operator(h)
    return bool(np.max(np.abs(np.linalg.eigvals(a).imag)) < tol)
