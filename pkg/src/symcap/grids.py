"""Uniform grids, sampled states, band-limited interpolation and the
hbar-scaled Fourier transform.

Grid convention: an :class:`Axis` ``(min, max, points)`` samples
``min + k * (max - min) / points`` for ``k = 0 .. points - 1`` (right endpoint
excluded, as for a periodic FFT cell).
"""

import os
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .errors import AliasingWarning, GridError, InvalidDimensionError, ValidationError

ALIAS_TOL = 1e-8
DEFAULT_POINTS = {1: 1024, 2: 128}
DEFAULT_HALF_WIDTH = 12.0


def fft_workers():
    """Thread cap for FFTs, from ``SYMCAP_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("SYMCAP_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Axis:
    min: float
    max: float
    points: int

    def __post_init__(self):
        if not (self.max > self.min):
            raise GridError(f"axis must be increasing, got min={self.min}, max={self.max}")
        p = int(self.points)
        if p != self.points or p < 2 or p & (p - 1):
            raise GridError(f"axis size must be a power of two >= 2, got {self.points}")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "min", float(self.min))
        object.__setattr__(self, "max", float(self.max))

    @property
    def step(self):
        return (self.max - self.min) / self.points

    @property
    def coords(self):
        return self.min + self.step * np.arange(self.points)

    def dual(self, hbar):
        """Centered reciprocal axis: ``step * dual.step * points = 2 pi hbar``."""
        dp = 2 * np.pi * hbar / (self.points * self.step)
        half = self.points // 2
        out = Axis(-half * dp, half * dp, self.points)
        # a self-dual axis maps to itself exactly, not up to rounding
        if np.allclose([out.min, out.max], [self.min, self.max], rtol=1e-12, atol=0):
            return self
        return out

    def is_dual_of(self, other, hbar, rtol=1e-12):
        return (self.points == other.points
                and abs(self.step * other.step * self.points / (2 * np.pi * hbar) - 1) < rtol)

    def to_dict(self):
        return {"min": self.min, "max": self.max, "points": self.points}

    @classmethod
    def from_dict(cls, d):
        return cls(d["min"], d["max"], d["points"])


def centered_axis(points, half_width):
    return Axis(-half_width, half_width, points)


def default_axis(n=1, hbar=1.0, points=None):
    """``[-12 sqrt(hbar), 12 sqrt(hbar))`` with 1024 (n=1) or 128 (n=2) points."""
    return centered_axis(points or DEFAULT_POINTS[n], DEFAULT_HALF_WIDTH * np.sqrt(hbar))


def self_dual_axis(points, hbar=1.0):
    """Centered axis equal to its own dual, so x- and p-grids coincide."""
    dx = np.sqrt(2 * np.pi * hbar / points)
    return Axis(-points // 2 * dx, points // 2 * dx, points)


def _check_hbar(hbar):
    if not hbar > 0:
        raise ValidationError(f"hbar must be positive, got {hbar}")
    return float(hbar)


@dataclass(frozen=True)
class GridState:
    """Complex wavefunction sampled on a uniform grid in ``n <= 2`` dimensions."""

    axes: tuple
    values: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        axes = tuple(self.axes)
        if not 1 <= len(axes) <= 2:
            raise InvalidDimensionError(f"grid states support n in {{1, 2}}, got {len(axes)}")
        vals = np.asarray(self.values, dtype=complex)
        shape = tuple(a.points for a in axes)
        if vals.shape != shape:
            raise GridError(f"values shape {vals.shape} does not match grid {shape}")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("state values must be finite")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "hbar", _check_hbar(self.hbar))

    @property
    def n(self):
        return len(self.axes)

    @property
    def cell(self):
        return float(np.prod([a.step for a in self.axes]))

    def coords(self):
        return np.meshgrid(*[a.coords for a in self.axes], indexing="ij")

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.cell))

    @property
    def is_normalized(self):
        return abs(self.norm() - 1) < 1e-10

    def normalized(self):
        return GridState(self.axes, self.values / self.norm(), self.hbar)

    def with_values(self, values, axes=None):
        return GridState(self.axes if axes is None else axes, values, self.hbar)

    def inner(self, other):
        """``<self, other> = sum conj(self) * other * cell``."""
        _same_grid(self, other)
        return complex(np.sum(np.conj(self.values) * other.values) * self.cell)

    def boundary_ratio(self):
        return boundary_ratio(self.values)


def boundary_ratio(values):
    """Largest magnitude on the grid edges relative to the global maximum."""
    a = np.abs(values)
    peak = a.max()
    if peak == 0:
        return 0.0
    edge = 0.0
    for ax in range(a.ndim):
        edge = max(edge, np.take(a, 0, axis=ax).max(), np.take(a, -1, axis=ax).max())
    return float(edge / peak)


def check_aliasing(values, what="state", tol=ALIAS_TOL):
    r = boundary_ratio(values)
    if r > tol:
        warnings.warn(f"{what} not negligible at grid boundary (edge/max = {r:.2e})",
                      AliasingWarning, stacklevel=3)
    return r


def _same_grid(a, b):
    if a.n != b.n or any(x != y for x, y in zip(a.axes, b.axes)):
        raise GridError("states live on different grids")
    if a.hbar != b.hbar:
        raise GridError(f"hbar mismatch: {a.hbar} vs {b.hbar}")


def sample(fn, axes, hbar=1.0):
    """Sample ``fn(*coords)`` on the grid given by ``axes``."""
    axes = tuple(axes)
    mesh = np.meshgrid(*[a.coords for a in axes], indexing="ij")
    return GridState(axes, np.asarray(fn(*mesh), dtype=complex), hbar)


@dataclass(frozen=True)
class WignerGrid:
    """Wigner (or cross-Wigner) distribution on a phase-space grid.

    ``values`` has shape ``(Nx_1, .., Nx_n, Np_1, .., Np_n)``; it is real for
    :func:`~symcap.wigner.wigner_transform` and complex for cross transforms.
    """

    x_axes: tuple
    p_axes: tuple
    values: np.ndarray
    hbar: float = 1.0
    imag_residual: float = 0.0

    def __post_init__(self):
        x_axes, p_axes = tuple(self.x_axes), tuple(self.p_axes)
        if len(x_axes) != len(p_axes) or not 1 <= len(x_axes) <= 2:
            raise InvalidDimensionError("x_axes and p_axes must both have length 1 or 2")
        shape = tuple(a.points for a in x_axes + p_axes)
        vals = np.asarray(self.values)
        if vals.shape != shape:
            raise GridError(f"values shape {vals.shape} does not match grid {shape}")
        object.__setattr__(self, "x_axes", x_axes)
        object.__setattr__(self, "p_axes", p_axes)
        object.__setattr__(self, "values", vals)

    @property
    def n(self):
        return len(self.x_axes)

    @property
    def is_complex(self):
        return np.iscomplexobj(self.values)

    @property
    def cell(self):
        return float(np.prod([a.step for a in self.x_axes + self.p_axes]))

    def coords(self):
        return np.meshgrid(*[a.coords for a in self.x_axes + self.p_axes], indexing="ij")

    def total(self):
        return complex(np.sum(self.values) * self.cell) if self.is_complex else float(
            np.sum(self.values) * self.cell)


# -- band-limited interpolation ------------------------------------------------


def _freq_matrix(axis, pts):
    """Rows: points; columns: trigonometric basis in FFT order (Nyquist as cosine)."""
    N = axis.points
    u = (np.asarray(pts, dtype=float) - axis.min) / axis.step
    f = sfft.fftfreq(N, d=1.0 / N)
    E = np.exp(2j * np.pi * np.outer(u, f) / N)
    E[:, N // 2] = np.cos(np.pi * u)
    return E


def _inside(axis, pts):
    pts = np.asarray(pts, dtype=float)
    return (pts >= axis.min - 1e-12 * axis.step) & (pts < axis.max)


def interpolate(psi, points):
    """Evaluate the band-limited interpolant of a grid state at arbitrary points.

    Args:
        psi: GridState.
        points: array ``(m,)`` for n = 1 or ``(m, 2)`` for n = 2.

    Returns:
        complex array ``(m,)``; points outside the grid cell evaluate to 0.
    """
    pts = np.asarray(points, dtype=float)
    if psi.n == 1:
        pts = pts.reshape(-1)
        c = sfft.fft(psi.values, workers=fft_workers())
        E = _freq_matrix(psi.axes[0], pts)
        out = E @ c / psi.axes[0].points
        return np.where(_inside(psi.axes[0], pts), out, 0.0)
    pts = pts.reshape(-1, 2)
    a1, a2 = psi.axes
    C = sfft.fft2(psi.values, workers=fft_workers())
    out = np.empty(len(pts), dtype=complex)
    chunk = 4096
    for s in range(0, len(pts), chunk):
        p = pts[s:s + chunk]
        E1 = _freq_matrix(a1, p[:, 0])
        E2 = _freq_matrix(a2, p[:, 1])
        T = C @ E2.T
        out[s:s + chunk] = np.einsum("pq,qp->p", E1, T) / (a1.points * a2.points)
    mask = _inside(a1, pts[:, 0]) & _inside(a2, pts[:, 1])
    return np.where(mask, out, 0.0)


def upsample2(values):
    """Band-limited refinement to half the grid spacing along every axis.

    Output index ``2k`` reproduces input index ``k``.
    """
    out = np.asarray(values, dtype=complex)
    for ax in range(out.ndim):
        N = out.shape[ax]
        c = sfft.fft(out, axis=ax, workers=fft_workers())
        c = np.moveaxis(c, ax, 0)
        c2 = np.zeros((2 * N,) + c.shape[1:], dtype=complex)
        h = N // 2
        c2[:h] = c[:h]
        c2[-h + 1:] = c[h + 1:]
        c2[h] = 0.5 * c[h]
        c2[-h] = 0.5 * c[h]
        out = np.moveaxis(2.0 * sfft.ifft(c2, axis=0, workers=fft_workers()), 0, ax)
    return out


# -- Fourier transform -----------------------------------------------------------


def _transform_axis(vals, ax, src, dst, sign, hbar):
    """Apply ``dx / sqrt(2 pi hbar) sum_k exp(sign i v_j u_k / hbar) f_k`` along one axis."""
    vals = np.moveaxis(vals, ax, 0)
    pref = src.step / np.sqrt(2 * np.pi * hbar)
    if dst.is_dual_of(src, hbar):
        k = np.arange(src.points)
        pre = np.exp(sign * 1j * dst.min * k * src.step / hbar)
        post = np.exp(sign * 1j * dst.coords * src.min / hbar)
        shape = (-1,) + (1,) * (vals.ndim - 1)
        g = vals * pre.reshape(shape)
        if sign < 0:
            G = sfft.fft(g, axis=0, workers=fft_workers())
        else:
            G = sfft.ifft(g, axis=0, workers=fft_workers()) * src.points
        out = pref * post.reshape(shape) * G
    else:
        E = np.exp(sign * 1j * np.outer(dst.coords, src.coords) / hbar)
        out = pref * np.tensordot(E, vals, axes=(1, 0))
    return np.moveaxis(out, 0, ax)


def fourier_hbar(psi, sign="forward", axes=None):
    """hbar-scaled unitary Fourier transform of a grid state.

    ``forward``: ``F psi(p) = (2 pi hbar)^{-n/2} int exp(-i p.x / hbar) psi(x) dx``;
    ``inverse`` uses ``exp(+i p.x / hbar)``. Output axes default to the centered
    reciprocal grid, on which the transform is an FFT and the inverse undoes
    the forward exactly. Other output axes are evaluated by direct summation.
    """
    if sign not in ("forward", "inverse"):
        raise ValueError(f"sign must be 'forward' or 'inverse', got {sign!r}")
    s = -1 if sign == "forward" else 1
    check_aliasing(psi.values, "input to Fourier transform")
    out_axes = tuple(a.dual(psi.hbar) for a in psi.axes) if axes is None else tuple(axes)
    if len(out_axes) != psi.n:
        raise GridError("output axes do not match state dimension")
    vals = psi.values
    for ax, (src, dst) in enumerate(zip(psi.axes, out_axes)):
        vals = _transform_axis(vals, ax, src, dst, s, psi.hbar)
    return GridState(out_axes, vals, psi.hbar)


def tensor_state(psi1, psi2):
    """Product state ``psi1 (x1) psi2 (x2)`` of two one-dimensional states."""
    if psi1.n != 1 or psi2.n != 1:
        raise InvalidDimensionError("tensor_state takes two n = 1 states")
    if psi1.hbar != psi2.hbar:
        raise ValidationError(f"hbar mismatch: {psi1.hbar} vs {psi2.hbar}")
    return GridState(psi1.axes + psi2.axes, np.outer(psi1.values, psi2.values), psi1.hbar)
