"""Dense linear algebra and symplectic-form primitives.

Phase-space vectors are ordered ``z = (x_1..x_n, p_1..p_n)`` and the standard
symplectic form is ``sigma(z, z') = Jz . z'`` with ``J = [[0, I], [-I, 0]]``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DefinitenessError,
    InvalidDimensionError,
    NotHermitianError,
    NotSymmetricError,
)

TAU_SYM = 1e-10
TAU_SYMP = 1e-9
TAU_EIG = 1e-12


@dataclass(frozen=True)
class PhasePoint:
    """A point ``z = (x, p)`` of phase space."""

    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if x.ndim != 1 or x.shape != p.shape:
            raise InvalidDimensionError(
                f"x and p must be vectors of equal length, got {x.shape} and {p.shape}"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def n(self):
        return self.x.size

    @property
    def z(self):
        return np.concatenate([self.x, self.p])

    @classmethod
    def from_vector(cls, z):
        z = np.asarray(z, dtype=float).ravel()
        if z.size % 2:
            raise InvalidDimensionError(f"phase-space vector must have even length, got {z.size}")
        n = z.size // 2
        return cls(z[:n], z[n:])


def _as_vector(z):
    if isinstance(z, PhasePoint):
        return z.z
    z = np.asarray(z, dtype=float).ravel()
    if z.size % 2:
        raise InvalidDimensionError(f"phase-space vector must have even length, got {z.size}")
    return z


def standard_form_matrix(n):
    """Return the ``2n x 2n`` standard symplectic matrix ``J``."""
    if int(n) != n or n < 1:
        raise InvalidDimensionError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def symplectic_product(z, z2):
    """Return ``sigma(z, z2) = Jz . z2``.

    Accepts :class:`PhasePoint` instances or flat ``2n`` vectors.
    """
    a = _as_vector(z)
    b = _as_vector(z2)
    if a.size != b.size:
        raise InvalidDimensionError(f"dimension mismatch: {a.size} vs {b.size}")
    n = a.size // 2
    # Jz = (p, -x)
    return float(a[n:] @ b[:n] - a[:n] @ b[n:])


def _square(M, name="matrix"):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvalidDimensionError(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    return M


def _even_order(M, name="matrix"):
    M = _square(M, name)
    if M.shape[0] % 2:
        raise InvalidDimensionError(f"{name} must have even order, got {M.shape[0]}")
    return M


def is_symplectic(S, tol=TAU_SYMP):
    """Test ``S^T J S = J``.

    Returns:
        tuple[bool, float]: the verdict and the residual ``||S^T J S - J||_F``.
    """
    S = _even_order(np.asarray(S, dtype=float), "S")
    J = standard_form_matrix(S.shape[0] // 2)
    residual = float(np.linalg.norm(S.T @ J @ S - J))
    return residual <= tol, residual


def symplectic_inverse(S):
    """Inverse of a symplectic matrix, ``S^{-1} = -J S^T J``."""
    S = _even_order(np.asarray(S, dtype=float), "S")
    J = standard_form_matrix(S.shape[0] // 2)
    return -J @ S.T @ J


def as_symmetric(M, tol=TAU_SYM, name="matrix"):
    """Validate near-symmetry (relative Frobenius) and return ``(M + M^T)/2``."""
    M = _square(np.asarray(M, dtype=float), name)
    if not np.all(np.isfinite(M)):
        raise NotSymmetricError(f"{name} contains non-finite entries")
    norm = np.linalg.norm(M)
    asym = np.linalg.norm(M - M.T)
    if asym > tol * max(norm, np.finfo(float).tiny):
        raise NotSymmetricError(f"{name} is not symmetric (relative asymmetry {asym / norm:.3e})")
    return 0.5 * (M + M.T)


def as_spd(M, tol=TAU_SYM, name="matrix"):
    """Symmetrize ``M`` and check that it is positive-definite."""
    M = as_symmetric(M, tol=tol, name=name)
    w = np.linalg.eigvalsh(M)
    if w[0] <= 0:
        raise DefinitenessError(
            f"{name} is not positive-definite (smallest eigenvalue {w[0]:.6g})", eigenvalue=float(w[0])
        )
    return M


def eig_sym(M, tol=TAU_SYM):
    """Eigendecomposition of a real symmetric matrix, eigenvalues descending.

    Returns:
        tuple[ndarray, ndarray]: ``(w, V)`` with ``M = V diag(w) V^T``.
    """
    M = as_symmetric(M, tol=tol)
    w, V = np.linalg.eigh(M)
    return w[::-1].copy(), V[:, ::-1].copy()


def eig_hermitian(H, tol=TAU_SYM):
    """Real spectrum of a complex Hermitian matrix, descending."""
    H = _square(np.asarray(H, dtype=complex), "H")
    norm = np.linalg.norm(H)
    if np.linalg.norm(H - H.conj().T) > tol * max(norm, np.finfo(float).tiny):
        raise NotHermitianError("matrix is not Hermitian")
    return np.linalg.eigvalsh(0.5 * (H + H.conj().T))[::-1].copy()


def spd_power(M, power):
    """``M**power`` for SPD ``M`` via its eigendecomposition."""
    w, V = np.linalg.eigh(M)
    return (V * w**power) @ V.T


def block_diag2(A, B):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    za = np.zeros((A.shape[0], B.shape[1]))
    return np.block([[A, za], [za.T, B]])


# -- random generators used by the property sweeps ---------------------------


def random_spd(n, rng, spread=1.0):
    """Random SPD matrix with log-eigenvalues uniform in ``[-spread, spread]``."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    w = np.exp(rng.uniform(-spread, spread, size=n))
    return (Q * w) @ Q.T


def random_symplectic(n, rng, depth=3, scale=0.5):
    """Random ``S`` in ``Sp(n)`` built as a product of generators.

    Alternates block scalings ``M_L``, shears ``[[I, 0], [P, I]]`` and ``J``.
    """
    S = np.eye(2 * n)
    J = standard_form_matrix(n)
    for _ in range(depth):
        L = np.eye(n) + scale * rng.standard_normal((n, n)) / np.sqrt(n)
        Linv = np.linalg.inv(L)
        ML = block_diag2(Linv, L.T)
        P = rng.standard_normal((n, n)) * scale
        P = 0.5 * (P + P.T)
        shear = np.block([[np.eye(n), np.zeros((n, n))], [P, np.eye(n)]])
        S = S @ ML @ shear @ J
    return S


def random_orthosymplectic(n, rng):
    """Haar-random element of ``Sp(n) ∩ O(2n)``, the realification of ``U(n)``."""
    from scipy.stats import unitary_group

    U = unitary_group.rvs(n, random_state=rng) if n > 1 else np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return np.block([[U.real, -U.imag], [U.imag, U.real]])
