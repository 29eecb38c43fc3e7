"""Discrete Wigner and cross-Wigner transforms of sampled states.

For an x-grid of spacing ``dx`` the output momentum grid is the centered
reciprocal axis (spacing ``2 pi hbar / (N dx)``). The autocorrelation
``psi(x + y/2) conj(phi(x - y/2))`` is sampled with ``y`` on the x-grid
spacing, which puts ``x +- y/2`` on a grid of half spacing; that grid is
filled by band-limited (FFT zero-padding) interpolation.
"""

import numpy as np
from scipy import fft as sfft

from .errors import GridError, InvalidDimensionError
from .grids import WignerGrid, _same_grid, check_aliasing, fft_workers, upsample2

TAU_WIG = 1e-9


def _padded_fine(values):
    """Half-spacing samples with a zero margin, premultiplied by ``i^j``.

    Out-of-range indices then read 0, and since ``i^(r+m) conj(i^(r-m)) = (-1)^m``
    the lag product carries the ``(-1)^m`` that centers the momentum axis.
    """
    fine = upsample2(values)
    pad = [(fine.shape[ax] // 2, fine.shape[ax] // 2) for ax in range(fine.ndim)]
    out = np.pad(fine, pad)
    for ax in range(out.ndim):
        shape = [1] * out.ndim
        shape[ax] = out.shape[ax]
        out = out * (1j ** (np.arange(out.shape[ax]) % 4)).reshape(shape)
    return out


def iter_wigner_slabs(psi, phi=None, chunk=None):
    """Yield ``(k_slice, block)`` pieces of the (cross-)Wigner transform.

    ``block`` is complex with shape ``(len(k_slice), *rest)`` where the leading
    index runs over the first x-axis. Lets callers stream n = 2 transforms
    without holding the whole ``N^4`` array.
    """
    if phi is None:
        phi = psi
    else:
        _same_grid(psi, phi)
    if psi.n not in (1, 2):
        raise InvalidDimensionError("Wigner transforms support n in {1, 2}")
    check_aliasing(psi.values, "state")
    if phi is not psi:
        check_aliasing(phi.values, "state")
    hbar = psi.hbar
    Fp = _padded_fine(psi.values)
    Fq = Fp if phi is psi else _padded_fine(phi.values)
    Ns = [a.points for a in psi.axes]
    # lags in FFT order, so no shift is needed before transforming
    ms = [sfft.ifftshift(np.arange(N) - N // 2) for N in Ns]
    scale = np.prod([a.step for a in psi.axes]) / (2 * np.pi * hbar) ** psi.n
    w = fft_workers()

    if psi.n == 1:
        N = Ns[0]
        off = N  # padding offset on the half-spacing grid
        m = ms[0]
        chunk = chunk or N
        for s in range(0, N, chunk):
            k = np.arange(s, min(N, s + chunk))
            f = Fp[off + 2 * k[:, None] + m[None, :]] * np.conj(Fq[off + 2 * k[:, None] - m[None, :]])
            yield slice(s, k[-1] + 1), scale * sfft.fft(f, axis=1, workers=w, overwrite_x=True)
        return

    N1, N2 = Ns
    m1, m2 = ms
    k2 = np.arange(N2)
    c_plus = N2 + 2 * k2[:, None] + m2[None, :]   # (N2, M2)
    c_minus = N2 + 2 * k2[:, None] - m2[None, :]
    chunk = chunk or 1
    for s in range(0, N1, chunk):
        blocks = []
        for k1 in range(s, min(N1, s + chunk)):
            A = Fp[N1 + 2 * k1 + m1][:, c_plus]    # (M1, N2, M2)
            B = Fq[N1 + 2 * k1 - m1][:, c_minus]
            np.multiply(A, np.conj(B, out=B), out=A)
            F = sfft.fft2(A, axes=(0, 2), workers=w, overwrite_x=True)
            blocks.append(np.transpose(F, (1, 0, 2)))
        yield slice(s, min(N1, s + chunk)), scale * np.stack(blocks)


def iter_wigner_real_slabs(psi, chunk=None):
    """Yield ``(k_slice, block, imag_bound)`` pieces of the real Wigner transform.

    The lag product ``psi(x + y/2) conj(psi(x - y/2))`` is exactly Hermitian in
    the lag except on the Nyquist lag(s), whose mirror image lies off the grid.
    Its Hermitian part is transformed with a half-length FFT; ``imag_bound`` is
    the largest imaginary part the full complex transform would carry on the
    slab (exact for n = 1, an L1 upper bound from the Nyquist entries for n = 2).
    """
    if psi.n not in (1, 2):
        raise InvalidDimensionError("Wigner transforms support n in {1, 2}")
    check_aliasing(psi.values, "state")
    Fp = _padded_fine(psi.values)
    Ns = [a.points for a in psi.axes]
    ms = [sfft.ifftshift(np.arange(N) - N // 2) for N in Ns]
    scale = np.prod([a.step for a in psi.axes]) / (2 * np.pi * psi.hbar) ** psi.n
    w = fft_workers()

    if psi.n == 1:
        N = Ns[0]
        m = ms[0][: N // 2 + 1]          # lags 0..N/2-1 and -N/2
        chunk = chunk or N
        for s in range(0, N, chunk):
            k = np.arange(s, min(N, s + chunk))
            f = Fp[N + 2 * k[:, None] + m[None, :]] * np.conj(Fp[N + 2 * k[:, None] - m[None, :]])
            imag = scale * float(np.abs(f[:, -1].imag).max())
            yield slice(s, k[-1] + 1), scale * sfft.hfft(f, n=N, axis=1, workers=w), imag
        return

    N1, N2 = Ns
    m1, m2 = ms
    h2 = N2 // 2
    k2 = np.arange(N2)
    c_plus = N2 + 2 * k2[:, None] + m2[None, : h2 + 1]
    c_minus = N2 + 2 * k2[:, None] - m2[None, : h2 + 1]
    # full Nyquist row m1 = -N1/2 for the residual; its mirror row is +N1/2
    row_plus = N2 + 2 * k2[:, None] + m2[None, :]
    row_minus = N2 + 2 * k2[:, None] - m2[None, :]
    neg2 = (-np.arange(N2)) % N2
    neg1 = (-np.arange(N1)) % N1
    chunk = chunk or 1
    for s in range(0, N1, chunk):
        blocks, imag = [], 0.0
        for k1 in range(s, min(N1, s + chunk)):
            A = Fp[N1 + 2 * k1 + m1][:, c_plus]    # (M1, N2, M2/2 + 1)
            B = Fp[N1 + 2 * k1 - m1][:, c_minus]
            np.multiply(A, np.conj(B, out=B), out=A)
            # anti-Hermitian residue: Nyquist column (in A) and Nyquist row
            col = A[:, :, h2]
            anti_col = np.abs(col - np.conj(col[neg1])).sum(axis=0)
            row = Fp[N1 + 2 * k1 - N1 // 2][row_plus] * np.conj(Fp[N1 + 2 * k1 + N1 // 2][row_minus])
            anti_row = np.abs(row - np.conj(row[:, neg2])).sum(axis=1)
            imag = max(imag, 0.5 * scale * float((anti_col + anti_row).max()))
            F = sfft.hfftn(A, s=(N1, N2), axes=(0, 2), workers=w, overwrite_x=True)
            blocks.append(np.transpose(F, (1, 0, 2)))
        yield slice(s, min(N1, s + chunk)), scale * np.stack(blocks), imag


def _p_axes(psi):
    return tuple(a.dual(psi.hbar) for a in psi.axes)


def _assemble(psi, phi):
    shape = tuple(a.points for a in psi.axes) * 2
    out = np.empty(shape, dtype=complex)
    for sl, block in iter_wigner_slabs(psi, phi):
        out[sl] = block
    return out


def wigner_transform(psi):
    """Wigner distribution of a grid state (real-valued).

    ``W psi(x, p) = (2 pi hbar)^{-n} int exp(-i p.y / hbar) psi(x + y/2) conj(psi(x - y/2)) dy``.

    The imaginary residue relative to ``max |W|`` is stored in
    ``imag_residual``. For n = 2 the output has ``N^4`` entries; use
    :func:`iter_wigner_real_slabs` to stream large grids.
    """
    out = np.empty(tuple(a.points for a in psi.axes) * 2)
    imag = 0.0
    for sl, block, im in iter_wigner_real_slabs(psi):
        out[sl] = block
        imag = max(imag, im)
    peak = float(np.abs(out).max())
    resid = imag / peak if peak > 0 else 0.0
    return WignerGrid(psi.axes, _p_axes(psi), out, psi.hbar, resid)


def cross_wigner(psi, phi):
    """Cross-Wigner transform ``W(psi, phi)`` (complex).

    Satisfies ``W(psi, phi) = conj(W(phi, psi))`` and ``W(psi, psi) = W psi``.
    """
    W = _assemble(psi, phi)
    return WignerGrid(psi.axes, _p_axes(psi), W, psi.hbar, 0.0)


def marginal_x(W):
    """``int W dp`` as a function of x (should equal ``|psi(x)|^2``)."""
    n = W.n
    cell_p = np.prod([a.step for a in W.p_axes])
    return W.values.sum(axis=tuple(range(n, 2 * n))) * cell_p


def marginal_p(W):
    """``int W dx`` as a function of p (should equal ``|F psi(p)|^2``)."""
    n = W.n
    cell_x = np.prod([a.step for a in W.x_axes])
    return W.values.sum(axis=tuple(range(n))) * cell_x


def check_same_phase_grid(W1, W2):
    if W1.x_axes != W2.x_axes or W1.p_axes != W2.p_axes:
        raise GridError("Wigner grids differ")
