"""Lagrangian planes and frames, and the symplectic map between two frames."""

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import ConditioningError, InvalidDimensionError, ValidationError
from .linalg import random_orthosymplectic, standard_form_matrix, symplectic_inverse
from .wigner import marginal_p, marginal_x

TAU_LAG = 1e-9
COND_MAX = 1e12


def _basis(basis):
    B = np.asarray(basis, dtype=float)
    if B.ndim != 2 or B.shape[0] != 2 * B.shape[1]:
        raise InvalidDimensionError(f"a plane basis must be 2n x n, got shape {B.shape}")
    s = np.linalg.svd(B, compute_uv=False)
    if s[-1] <= max(B.shape) * np.finfo(float).eps * s[0]:
        raise ValidationError("plane basis is rank deficient")
    return B


def is_lagrangian(basis, tol=TAU_LAG):
    """Isotropy test: ``(ok, ||Q^T J Q||_F)`` for the orthonormalized basis ``Q``."""
    B = _basis(basis)
    Q, _ = np.linalg.qr(B)
    res = float(np.linalg.norm(Q.T @ standard_form_matrix(B.shape[1]) @ Q))
    return res <= tol, res


@dataclass(frozen=True)
class LagrangianPlane:
    """An n-dimensional isotropic subspace of phase space.

    The basis is orthonormalized (QR) on construction.
    """

    basis: np.ndarray

    def __post_init__(self):
        B = _basis(self.basis)
        ok, res = is_lagrangian(B)
        if not ok:
            raise ValidationError(f"plane is not Lagrangian (isotropy residual {res:.3e})")
        Q, _ = np.linalg.qr(B)
        object.__setattr__(self, "basis", Q)

    @property
    def n(self):
        return self.basis.shape[1]

    @classmethod
    def horizontal(cls, n):
        """``ell_X``: the position plane ``p = 0``."""
        return cls(np.vstack([np.eye(n), np.zeros((n, n))]))

    @classmethod
    def vertical(cls, n):
        """``ell_P``: the momentum plane ``x = 0``."""
        return cls(np.vstack([np.zeros((n, n)), np.eye(n)]))

    @classmethod
    def graph(cls, P):
        """The plane ``p = Px`` for symmetric ``P``."""
        P = np.atleast_2d(np.asarray(P, dtype=float))
        return cls(np.vstack([np.eye(P.shape[0]), P]))

    def image(self, S):
        return LagrangianPlane(np.asarray(S, dtype=float) @ self.basis)


def span_distance(U, V):
    """Sine of the largest principal angle between two column spans."""
    U = U.basis if isinstance(U, LagrangianPlane) else np.asarray(U, dtype=float)
    V = V.basis if isinstance(V, LagrangianPlane) else np.asarray(V, dtype=float)
    return float(np.sin(np.max(sla.subspace_angles(U, V))))


@dataclass(frozen=True)
class LagrangianFrame:
    """A pair of transversal Lagrangian planes."""

    ell: LagrangianPlane
    ell_prime: LagrangianPlane

    def __post_init__(self):
        if self.ell.n != self.ell_prime.n:
            raise InvalidDimensionError("frame planes must have the same dimension")
        ok, smin = is_transversal(self)
        if not ok:
            raise ValidationError(f"planes are not transversal (sigma_min {smin:.3e})")

    @property
    def n(self):
        return self.ell.n

    @classmethod
    def standard(cls, n):
        return cls(LagrangianPlane.horizontal(n), LagrangianPlane.vertical(n))


def is_transversal(f, tol=TAU_LAG):
    """``(ok, sigma_min)`` of the stacked orthonormal bases ``[ell | ell']``."""
    M = np.hstack([f.ell.basis, f.ell_prime.basis])
    smin = float(np.linalg.svd(M, compute_uv=False)[-1])
    return smin > tol, smin


def frame_basis(f):
    """Symplectic ``[X | Y]`` taking ``(ell_X, ell_P)`` onto the frame ``f``.

    With orthonormal bases ``X0``, ``Y0`` and the pairing matrix
    ``G = X0^T J Y0 = U diag(s) V^T``, the columns are ``X = X0 U s^{-1/2}``
    and ``Y = Y0 V s^{-1/2}``, so that ``X^T J Y = I``. Splitting the
    normalization evenly between the two planes keeps ``||[X | Y]||`` at
    ``s_min^{-1/2}`` rather than ``s_min^{-1}``.

    Raises:
        ConditioningError: the pairing system is near-degenerate.
    """
    X0 = f.ell.basis
    Y0 = f.ell_prime.basis
    G = X0.T @ standard_form_matrix(f.n) @ Y0
    U, s, Vt = np.linalg.svd(G)
    if s[-1] == 0 or s[0] / s[-1] > COND_MAX:
        cond = np.inf if s[-1] == 0 else s[0] / s[-1]
        raise ConditioningError(f"pairing system condition number {cond:.3e} exceeds {COND_MAX:g}")
    r = 1 / np.sqrt(s)
    return np.hstack([(X0 @ U) * r, (Y0 @ Vt.T) * r])


def frame_map(source, target):
    """A symplectic ``S`` with ``S ell_s = ell_t`` and ``S ell_s' = ell_t'``.

    ``S = F_t F_s^{-1}`` with ``F`` the normalized frame bases of
    :func:`frame_basis`. The map is not unique (any stabilizer element of the
    source frame can be composed in); this choice is deterministic.
    """
    if source.n != target.n:
        raise InvalidDimensionError("frames must live in the same phase space")
    return frame_basis(target) @ symplectic_inverse(frame_basis(source))


def marginal_along_plane(W, which):
    """Integrate a Wigner grid over a coordinate plane.

    ``"ell_P"`` integrates out momenta, giving ``|psi(x)|^2``; ``"ell_X"``
    integrates out positions, giving ``|F psi(p)|^2``.
    """
    if which == "ell_P":
        return marginal_x(W)
    if which == "ell_X":
        return marginal_p(W)
    raise ValidationError(f"which must be 'ell_X' or 'ell_P', got {which!r}")


def random_plane(n, rng):
    """Lagrangian plane uniform on the Lagrangian Grassmannian."""
    return LagrangianPlane.horizontal(n).image(random_orthosymplectic(n, rng))


def random_frame(n, rng):
    """Frame of two independent uniform planes (transversal almost surely)."""
    return LagrangianFrame(random_plane(n, rng), random_plane(n, rng))
