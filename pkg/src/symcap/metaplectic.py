"""Metaplectic generators and Heisenberg translations acting on grid states.

Each generator ``S_hat`` satisfies ``W(S_hat psi)(z) = W psi(S^{-1} z)`` with
``S`` the projection returned by :func:`metaplectic_projection`:

* scaling ``psi(x) -> i^m sqrt|det L| psi(Lx)`` projects to ``diag(L^{-1}, L^T)``;
* chirp ``psi(x) -> exp(i Px^2 / 2 hbar) psi(x)`` projects to ``[[I, 0], [P, I]]``;
* ``J_hat = i^{-n/2} F`` projects to ``J``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GridError, InvalidDimensionError, ValidationError
from .grids import GridState, boundary_ratio, fourier_hbar, interpolate
from .linalg import PhasePoint, as_symmetric, block_diag2, standard_form_matrix
from .spectral import block_symplectic_from_L

TAU_UNITARY = 1e-7
TAU_NORM = 1e-10


@dataclass(frozen=True)
class Scaling:
    L: np.ndarray
    m: int = 0


@dataclass(frozen=True)
class Chirp:
    P: np.ndarray


@dataclass(frozen=True)
class Fourier:
    pass


def _as_square(M, n, name):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape != (n, n):
        raise InvalidDimensionError(f"{name} must be {n}x{n}, got {M.shape}")
    return M


def _grid_points(psi):
    mesh = np.meshgrid(*[a.coords for a in psi.axes], indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _check_norm(psi, out, what, tol=TAU_UNITARY):
    n0, n1 = psi.norm(), out.norm()
    if abs(n1 - n0) > tol * n0:
        raise GridError(f"{what} leaves the grid: norm {n0:.12g} -> {n1:.12g}")


def metaplectic_apply(which, psi):
    """Apply a metaplectic generator to a grid state.

    Args:
        which: :class:`Scaling`, :class:`Chirp` or :class:`Fourier`.
        psi: GridState with n <= 2.

    Returns:
        GridState. Scaling and chirp keep the input grid; the Fourier generator
        lands on the reciprocal grid (the same grid when it is self-dual).

    Raises:
        GridError: resampling pushes mass off the grid (norm not preserved).
    """
    n = psi.n
    if n > 2:
        raise InvalidDimensionError("grid operations support n <= 2")
    if isinstance(which, Scaling):
        L = _as_square(which.L, n, "L")
        det = np.linalg.det(L)
        if abs(det) < 1e-14:
            raise ValidationError("L must be invertible")
        pts = _grid_points(psi) @ L.T
        vals = interpolate(psi, pts).reshape(psi.values.shape)
        vals = (1j ** which.m) * np.sqrt(abs(det)) * vals
        out = psi.with_values(vals)
        _check_norm(psi, out, "scaling")
        return out
    if isinstance(which, Chirp):
        P = as_symmetric(_as_square(which.P, n, "P"), name="P")
        X = _grid_points(psi)
        phase = np.exp(1j * np.einsum("ki,ij,kj->k", X, P, X) / (2 * psi.hbar))
        out = psi.with_values(psi.values * phase.reshape(psi.values.shape))
        # the chirp raises momentum content; it must stay inside the band
        if boundary_ratio(fourier_hbar(out).values) > 1e-8:
            raise GridError("chirp pushes momentum content past the grid's Nyquist limit")
        return out
    if isinstance(which, Fourier):
        F = fourier_hbar(psi)
        return F.with_values(F.values * 1j ** (-n / 2))
    raise ValidationError(f"unknown generator {which!r}")


def metaplectic_projection(which, n):
    """The symplectic matrix covering a generator (see module docstring)."""
    if isinstance(which, Scaling):
        return block_symplectic_from_L(_as_square(which.L, n, "L"))
    if isinstance(which, Chirp):
        P = as_symmetric(_as_square(which.P, n, "P"), name="P")
        I = np.eye(n)
        return np.block([[I, np.zeros((n, n))], [P, I]])
    if isinstance(which, Fourier):
        return standard_form_matrix(n)
    raise ValidationError(f"unknown generator {which!r}")


def heisenberg_translate(z0, psi):
    """Heisenberg-Weyl operator ``exp(i(p0.x - p0.x0/2)/hbar) psi(x - x0)``.

    Args:
        z0: PhasePoint or vector ``(x0, p0)``.
        psi: GridState.

    Raises:
        GridError: the shift carries mass off the grid, or the momentum shift
            passes the grid's Nyquist limit.
    """
    if not isinstance(z0, PhasePoint):
        z0 = PhasePoint.from_vector(z0)
    if z0.n != psi.n:
        raise InvalidDimensionError(f"z0 has n={z0.n}, state has n={psi.n}")
    x0, p0 = np.asarray(z0.x, float), np.asarray(z0.p, float)
    X = _grid_points(psi)
    if np.any(x0):
        vals = interpolate(psi, X - x0).reshape(psi.values.shape)
    else:
        vals = psi.values.copy()
    phase = np.exp(1j * (X @ p0 - p0 @ x0 / 2) / psi.hbar).reshape(psi.values.shape)
    out = psi.with_values(vals * phase)
    _check_norm(psi, out, "translation", tol=1e-8)
    if np.any(p0) and boundary_ratio(fourier_hbar(out).values) > 1e-8:
        raise GridError("momentum shift passes the grid's Nyquist limit")
    return out
