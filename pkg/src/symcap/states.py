"""Sampled Hermite and Gaussian states, and the closed-form Gaussian Wigner function."""

from dataclasses import dataclass

import numpy as np

from .errors import GridError, InvalidDimensionError, ValidationError
from .grids import GridState, default_axis
from .linalg import as_spd, as_symmetric

MAX_HERMITE_DEGREE = 20


def hermite_functions(kmax, u):
    """Orthonormal Hermite functions ``phi_0..phi_kmax`` at ``u`` (three-term recurrence)."""
    u = np.asarray(u, dtype=float)
    out = np.empty((kmax + 1,) + u.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * u**2)
    if kmax >= 1:
        out[1] = np.sqrt(2.0) * u * out[0]
    for k in range(1, kmax):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * u * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def _hermite_1d(k, axis, hbar):
    u = axis.coords / np.sqrt(hbar)
    return hermite_functions(k, u)[k] * hbar ** -0.25


def hermite_state(k, axes=None, hbar=1.0):
    """Normalized harmonic-oscillator eigenstate ``psi_k`` on a grid.

    ``psi_k(x)`` is proportional to ``h_k(x / sqrt(hbar)) exp(-x^2 / 2 hbar)``;
    ``k`` is an int (n = 1) or a multi-index of length n.

    Raises:
        GridError: the grid cannot hold the requested degree (edge too large).
    """
    k = tuple(np.atleast_1d(k).astype(int).tolist())
    n = len(k)
    if axes is None:
        axes = (default_axis(n, hbar),) * n
    axes = tuple(axes)
    if len(axes) != n:
        raise InvalidDimensionError(f"multi-index of length {n} needs {n} axes")
    if any(kk < 0 or kk > MAX_HERMITE_DEGREE for kk in k):
        raise ValidationError(f"degrees must lie in [0, {MAX_HERMITE_DEGREE}], got {k}")
    factors = [_hermite_1d(kk, ax, hbar) for kk, ax in zip(k, axes)]
    for f, ax, kk in zip(factors, axes, k):
        peak = np.abs(f).max()
        # momentum content reaches about sqrt(hbar) (sqrt(2k+1) + 5); stay below Nyquist
        nyquist = np.pi * hbar / ax.step
        if max(abs(f[0]), abs(f[-1])) > 1e-8 * peak or nyquist < np.sqrt(hbar) * (np.sqrt(2 * kk + 1) + 5):
            raise GridError(f"grid {ax} too narrow or coarse for Hermite degree {kk}")
    vals = factors[0] if n == 1 else np.outer(factors[0], factors[1])
    return GridState(axes, vals.astype(complex), hbar)


@dataclass(frozen=True)
class GaussianState:
    """``psi(x) = exp(-(X + iY) x^2 / 2 hbar)`` with ``X`` SPD and ``Y`` symmetric."""

    X: np.ndarray
    Y: np.ndarray = None
    hbar: float = 1.0

    def __post_init__(self):
        X = as_spd(np.atleast_2d(self.X), name="X")
        Y = np.zeros_like(X) if self.Y is None else as_symmetric(np.atleast_2d(self.Y), name="Y")
        if X.shape != Y.shape:
            raise InvalidDimensionError("X and Y must have the same order")
        if not self.hbar > 0:
            raise ValidationError("hbar must be positive")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self):
        return self.X.shape[0]

    def __call__(self, *x):
        Z = self.X + 1j * self.Y
        x = np.stack(np.broadcast_arrays(*x), axis=-1)
        return np.exp(-np.einsum("...i,ij,...j->...", x, Z, x) / (2 * self.hbar))

    def sample(self, axes=None):
        if self.n > 2:
            raise InvalidDimensionError("grid sampling supports n <= 2")
        if axes is None:
            axes = (default_axis(self.n, self.hbar),) * self.n
        axes = tuple(axes)
        mesh = np.meshgrid(*[a.coords for a in axes], indexing="ij")
        return GridState(axes, self(*mesh), self.hbar)

    def norm_squared(self):
        return float(np.sqrt((np.pi * self.hbar) ** self.n / np.linalg.det(self.X)))


def gaussian_wigner_closed_form(g):
    """Closed form ``W psi_{X,Y}(z) = prefactor * exp(-Gz^2 / hbar)``.

    Returns:
        tuple[ndarray, float]: ``G = [[X + Y X^-1 Y, Y X^-1], [X^-1 Y, X^-1]]``
        and ``prefactor = (pi hbar)^{-n/2} det(X)^{-1/2}``.
    """
    X, Y = g.X, g.Y
    Xi = np.linalg.inv(X)
    G = np.block([[X + Y @ Xi @ Y, Y @ Xi], [Xi @ Y, Xi]])
    G = 0.5 * (G + G.T)
    pref = (np.pi * g.hbar) ** (-g.n / 2) / np.sqrt(np.linalg.det(X))
    return G, float(pref)


def gaussian_symplectic_factor(g):
    """``S`` in ``Sp(n)`` with ``G = S^T S``: ``[[X^1/2, 0], [X^-1/2 Y, X^-1/2]]``."""
    w, V = np.linalg.eigh(g.X)
    Xh = (V * np.sqrt(w)) @ V.T
    Xmh = (V / np.sqrt(w)) @ V.T
    n = g.n
    return np.block([[Xh, np.zeros((n, n))], [Xmh @ g.Y, Xmh]])


def gaussian_wigner_eval(g, *z):
    """Evaluate the closed-form Gaussian Wigner function at phase-space points.

    The ``2n`` coordinate arrays only need to broadcast against each other, so
    open grids (``np.ix_`` style) avoid materializing the full mesh per axis.
    """
    G, pref = gaussian_wigner_closed_form(g)
    if len(z) != G.shape[0]:
        raise InvalidDimensionError(f"expected {G.shape[0]} coordinate arrays, got {len(z)}")
    z = [np.asarray(c, dtype=float) for c in z]
    q = 0.0
    for i in range(len(z)):
        q = q + G[i, i] * z[i] ** 2
        for j in range(i + 1, len(z)):
            if G[i, j] != 0:
                q = q + (2 * G[i, j]) * (z[i] * z[j])
    return pref * np.exp(-q / g.hbar)
