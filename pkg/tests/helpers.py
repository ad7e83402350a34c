"""Shared fixture builders for the test suite."""

import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def random_hermitian(rng, dim, scale=1.0):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = 0.5 * (a + a.conj().T)
    return scale * h / np.linalg.norm(h)


def random_quasi_hermitian(rng, dim, scale=1.0, mixing=0.3):
    """Conjugated Hermitian matrix: real spectrum guaranteed.

    Returns ``(H, S)`` with ``H = S^-1 h S`` for a Hermitian positive S
    (so ``S^dag S = S^2`` is a static metric for H).  Taking S Hermitian
    with spectrum in ``[1 - mixing, 1 + mixing]`` keeps the eigenvector
    condition of H bounded by cond(S) independently of spectral gaps,
    which is what makes tight residual bounds meaningful for random
    fixtures.
    """
    h = random_hermitian(rng, dim, scale)
    s = np.eye(dim) + mixing * random_hermitian(rng, dim)
    return np.linalg.solve(s, h @ s), s


def random_bounded_nonhermitian(rng, dim, herm_scale=0.2, anti_scale=0.2):
    """H = A + iB with controlled Hermitian/anti-Hermitian norms."""
    return random_hermitian(rng, dim, herm_scale) + 1j * random_hermitian(
        rng, dim, anti_scale
    )


def two_level_matrix(v, w):
    """Compose 2x2 from real 4-vectors without importing the package twice."""
    from adiametric.two_level import TwoLevelParams, pauli_compose

    return pauli_compose(TwoLevelParams(v=np.asarray(v, float), w=np.asarray(w, float)))
