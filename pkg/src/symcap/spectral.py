"""Symplectic diagonalization: block pair diagonalization, Williamson normal form,
symplectic spectra.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from .errors import (
    DiagonalizationError,
    InvalidDimensionError,
    SingularMatrixError,
)
from .linalg import (
    as_spd,
    block_diag2,
    is_symplectic,
    spd_power,
    standard_form_matrix,
)

TAU_DIAG = 1e-9
COND_WARN = 1e12


@dataclass(frozen=True)
class PairDiagResult:
    """``L^T A L = L^{-1} B L^{-T} = diag(lambda_diag)``.

    ``lambda_diag`` holds the square roots of the eigenvalues of ``AB``,
    sorted descending.
    """

    L: np.ndarray
    lambda_diag: np.ndarray
    residual_a: float
    residual_b: float
    condition: float
    warnings: tuple = ()


@dataclass(frozen=True)
class SymplecticDecomp:
    """Williamson factorization ``S^T M S = diag(Lambda, Lambda)``."""

    S: np.ndarray
    spectrum: np.ndarray
    residual: float
    symplectic_residual: float
    refined: bool = False
    warnings: tuple = field(default_factory=tuple)

    @property
    def normal_form(self):
        return np.diag(np.concatenate([self.spectrum, self.spectrum]))


def pair_diagonalize(A, B):
    """Simultaneously diagonalize two SPD matrices by a congruence and its dual.

    Construction: whiten ``A`` with ``P = A^{-1/2}``, orthogonally diagonalize
    the whitened ``B``, then rescale each column by the fourth root of the
    corresponding eigenvalue of ``AB``.

    Args:
        A, B: SPD matrices of equal order.

    Returns:
        PairDiagResult
    """
    A = as_spd(A, name="A")
    B = as_spd(B, name="B")
    if A.shape != B.shape:
        raise InvalidDimensionError(f"A and B must have equal order, got {A.shape} and {B.shape}")
    wa, Va = np.linalg.eigh(A)
    P = (Va / np.sqrt(wa)) @ Va.T
    A_half = (Va * np.sqrt(wa)) @ Va.T
    # P^{-1} B P^{-T}; same spectrum as AB
    B1 = A_half @ B @ A_half
    d, V = np.linalg.eigh(0.5 * (B1 + B1.T))
    d, V = d[::-1], V[:, ::-1]
    R = P @ V
    lam = np.sqrt(d)
    L = R * np.sqrt(lam)
    D = np.diag(lam)
    Linv = np.linalg.inv(L)
    res_a = float(np.linalg.norm(L.T @ A @ L - D) / np.linalg.norm(A))
    res_b = float(np.linalg.norm(Linv @ B @ Linv.T - D) / np.linalg.norm(B))
    cond = float(np.linalg.cond(L))
    warns = (f"ill-conditioned L (cond {cond:.3e})",) if cond > COND_WARN else ()
    return PairDiagResult(L=L, lambda_diag=lam, residual_a=res_a, residual_b=res_b,
                          condition=cond, warnings=warns)


def _spd_even(M):
    M = as_spd(M, name="M")
    if M.shape[0] % 2:
        raise InvalidDimensionError(f"M must have even order, got {M.shape[0]}")
    return M


def symplectic_spectrum(M):
    """Symplectic spectrum of an SPD matrix of order ``2n``, descending.

    The spectrum is read off as the positive eigenvalues of the Hermitian
    matrix ``i M^{1/2} J M^{1/2}``.
    """
    M = _spd_even(M)
    n = M.shape[0] // 2
    R = spd_power(M, 0.5)
    K = R @ standard_form_matrix(n) @ R
    w = np.linalg.eigvalsh(1j * K)
    return w[::-1][:n].copy()


def _fix_phase(v):
    # largest-magnitude coordinate made real positive
    k = np.argmax(np.abs(v))
    return v * (np.conj(v[k]) / np.abs(v[k]))


def _normal_frame_eigh(K, n):
    """Orthogonal ``U`` with ``U^T K U = [[0, W], [-W, 0]]``, ``W`` ascending."""
    w, V = np.linalg.eigh(1j * K)
    omega = w[n:]
    vecs = np.column_stack([_fix_phase(V[:, n + j]) for j in range(n)])
    U = np.sqrt(2.0) * np.hstack([vecs.imag, vecs.real])
    return U, omega


def _normal_frame_schur(K, n):
    T, Z = sla.schur(K, output="real")
    cols_x, cols_p, omega = [], [], []
    j = 0
    while j < 2 * n:
        beta = T[j, j + 1]
        if beta >= 0:
            cols_x.append(Z[:, j])
            cols_p.append(Z[:, j + 1])
        else:
            cols_x.append(Z[:, j + 1])
            cols_p.append(Z[:, j])
        omega.append(abs(beta) if beta != 0 else np.sqrt(abs(T[j, j + 1] * T[j + 1, j])))
        j += 2
    order = np.argsort(omega, kind="stable")
    X = np.column_stack(cols_x)[:, order]
    P = np.column_stack(cols_p)[:, order]
    return np.hstack([X, P]), np.asarray(omega)[order]


def _williamson_once(M, method):
    n = M.shape[0] // 2
    w, V = np.linalg.eigh(M)
    Minv_half = (V / np.sqrt(w)) @ V.T
    K = Minv_half @ standard_form_matrix(n) @ Minv_half
    K = 0.5 * (K - K.T)
    if method == "eigh":
        U, omega = _normal_frame_eigh(K, n)
    elif method == "schur":
        U, omega = _normal_frame_schur(K, n)
    else:
        raise ValueError(f"unknown method {method!r}")
    lam = 1.0 / omega
    d = np.sqrt(np.concatenate([lam, lam]))
    S = (Minv_half @ U) * d
    return S, lam


def williamson(M, method="eigh"):
    """Williamson normal form of an SPD matrix.

    Finds symplectic ``S`` and the symplectic spectrum ``Lambda`` (descending)
    such that ``S^T M S = diag(Lambda, Lambda)``. ``S`` is assembled as
    ``M^{-1/2} U diag(Lambda^{1/2}, Lambda^{1/2})`` where ``U`` brings the
    antisymmetric matrix ``M^{-1/2} J M^{-1/2}`` to its real normal form.

    Args:
        M: SPD matrix of order ``2n``.
        method: ``"eigh"`` (Hermitian eigensolver on ``iK``) or ``"schur"``
            (real Schur form of ``K``). Both give valid, generally different,
            factors.

    Returns:
        SymplecticDecomp

    Raises:
        DiagonalizationError: if the residual stays above ``TAU_DIAG`` after
            one refinement pass.
    """
    M = _spd_even(M)
    norm = np.linalg.norm(M)
    warns = []
    cond = np.linalg.cond(M)
    if cond > COND_WARN:
        warns.append(f"ill-conditioned M (cond {cond:.3e})")

    S, lam = _williamson_once(M, method)
    D = np.diag(np.concatenate([lam, lam]))
    residual = np.linalg.norm(S.T @ M @ S - D) / norm
    refined = False
    if residual > TAU_DIAG:
        M1 = S.T @ M @ S
        S1, lam = _williamson_once(0.5 * (M1 + M1.T), method)
        S = S @ S1
        D = np.diag(np.concatenate([lam, lam]))
        residual = np.linalg.norm(S.T @ M @ S - D) / norm
        refined = True
        if residual > TAU_DIAG:
            raise DiagonalizationError(
                f"Williamson residual {residual:.3e} exceeds {TAU_DIAG:g} after refinement"
            )
    _, symp_res = is_symplectic(S)
    return SymplecticDecomp(S=S, spectrum=lam, residual=float(residual),
                            symplectic_residual=symp_res, refined=refined,
                            warnings=tuple(warns))


def block_symplectic_from_L(L):
    """Return ``M_L = diag(L^{-1}, L^T)``, which lies in ``Sp(n)``."""
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise InvalidDimensionError(f"L must be square, got shape {L.shape}")
    cond = np.linalg.cond(L)
    if not np.isfinite(cond) or cond > 1.0 / np.finfo(float).eps:
        raise SingularMatrixError(f"L is singular (condition number {cond:.3e})")
    return block_diag2(np.linalg.inv(L), L.T)


def normal_form_residual(M, S, spectrum):
    D = np.diag(np.concatenate([spectrum, spectrum]))
    return float(np.linalg.norm(S.T @ M @ S - D) / np.linalg.norm(M))


def blockdiag(A, B):
    """``[[A, 0], [0, B]]``."""
    return block_diag2(A, B)
