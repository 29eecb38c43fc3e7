"""Hardy-type uncertainty tests: feasibility of Gaussian decay pairs, the
Wigner-bound criterion, Robertson-Schrodinger positivity and convex exponents.
"""

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .capacity import (
    PhaseEllipsoid,
    ball_samples,
    ellipsoid_capacity,
    fd_hessian,
    john_ellipsoid,
    _interior_point,
)
from .errors import (
    ConvexityError,
    InternalConsistencyError,
    InvalidDimensionError,
    ValidationError,
)
from .grids import fourier_hbar
from .linalg import as_spd, block_diag2, standard_form_matrix
from .spectral import symplectic_spectrum
from .wigner import iter_wigner_real_slabs

TAU_HARDY = 1e-9
TAU_PSD = 1e-10
RS_BAND = 1e-8
TAU_CAPACITY = 1e-6
HESSIAN_SAMPLES = 4096

INFEASIBLE = "infeasible"
GAUSSIAN_ONLY = "gaussian_only"
POLYNOMIAL_GAUSSIAN = "polynomial_gaussian"


# -- Hardy trichotomy ----------------------------------------------------------


@dataclass(frozen=True)
class HardyVerdict:
    """Classification of a decay pair ``(A, B)``.

    ``eigenvalues`` are those of ``AB`` (descending); ``margin = 1 - lambda_1``.
    """

    classification: str
    eigenvalues: np.ndarray
    margin: float


def _pair(A, B):
    A = as_spd(A, name="A")
    B = as_spd(B, name="B")
    if A.shape != B.shape:
        raise InvalidDimensionError(f"A and B must have equal order, got {A.shape} and {B.shape}")
    return A, B


def classify_hardy(A, B, tol=TAU_HARDY):
    """Which states can obey ``|psi| <= C e^{-Ax^2/2hbar}`` and ``|F psi| <= C e^{-Bp^2/2hbar}``.

    The eigenvalues of ``AB`` are computed from the similar symmetric matrix
    ``A^{1/2} B A^{1/2}``. Any eigenvalue above ``1 + tol`` leaves only
    ``psi = 0``; all within ``tol`` of 1 leaves a single Gaussian; otherwise
    polynomial-times-Gaussian states are admitted.
    """
    A, B = _pair(A, B)
    w, V = np.linalg.eigh(A)
    Ah = (V * np.sqrt(w)) @ V.T
    lam = np.linalg.eigvalsh(Ah @ B @ Ah)[::-1]
    if lam[0] > 1 + tol:
        cls = INFEASIBLE
    elif np.all(np.abs(lam - 1) <= tol):
        cls = GAUSSIAN_ONLY
    else:
        cls = POLYNOMIAL_GAUSSIAN
    return HardyVerdict(cls, lam, float(1 - lam[0]))


class WignerBound(NamedTuple):
    spectrum_max: float
    feasible: bool
    capacity: float


def complete_square(M, a):
    """Center ``z0`` with ``Mz^2 + 2a.z = M(z - z0)^2 - Mz0^2``."""
    return -np.linalg.solve(M, np.asarray(a, dtype=float))


def check_wigner_bound_matrix(M, hbar=1.0, a=None):
    """Can any nonzero state obey ``W psi(z) <= C exp(-(Mz^2 + 2a.z)/hbar)``?

    A linear term only moves the center (completed square), so feasibility
    depends on ``M`` alone: it holds iff ``lambda_1^sigma(M) <= 1``, i.e. iff the
    ellipsoid ``{Mz^2 <= hbar}`` has capacity at least ``pi hbar``.

    Returns:
        WignerBound(spectrum_max, feasible, capacity)
    """
    M = as_spd(M, name="M")
    if not hbar > 0:
        raise ValidationError("hbar must be positive")
    center = np.zeros(M.shape[0]) if a is None else complete_square(M, a)
    rep = ellipsoid_capacity(PhaseEllipsoid(M, center, hbar), hbar)
    feasible = rep.spectrum_max <= 1 + TAU_HARDY
    return WignerBound(rep.spectrum_max, bool(feasible), rep.capacity)


# -- empirical equivalence -----------------------------------------------------


BOUNDED = "bounded"
POLYNOMIAL = "polynomial"
UNBOUNDED = "unbounded"
INCONCLUSIVE = "inconclusive"
_RANK = {BOUNDED: 0, POLYNOMIAL: 1, INCONCLUSIVE: 2, UNBOUNDED: 3}


@dataclass(frozen=True)
class SupRatio:
    """Grid supremum of a state against a Gaussian weight.

    ``status``: ``bounded`` when the outer 10% of the test region does not
    exceed the interior maximum; ``polynomial`` when it grows but a fit of
    ``log(envelope) = a + k log r + c r^2`` shows no Gaussian-rate term;
    ``unbounded`` when it does; ``inconclusive`` in between.
    """

    sup: float
    argmax: tuple
    status: str
    degree: float
    gaussian_rate: float


@dataclass(frozen=True)
class EquivalenceReport:
    ratio_x: SupRatio
    ratio_p: SupRatio
    ratio_wigner: SupRatio
    cond1_bounded: bool
    cond2_bounded: bool
    consistent: bool
    hardy: HardyVerdict
    warnings: tuple = ()


class _Envelope:
    """Running per-radius-bin maxima of ``ratio`` over ``r in [0, R]``."""

    def __init__(self, R, bins=48):
        self.R = R
        self.edges = np.linspace(0, R, bins + 1)
        self.env = np.zeros(bins)
        self.sup = -np.inf
        self.argmax = None

    def add(self, r, values, exponent, coords):
        """Record ``values * exp(exponent)`` at points of radius ``r``."""
        mask = r <= self.R
        if not mask.any():
            return
        r, coords = r[mask], coords[mask]
        ratio = values[mask] * np.exp(exponent[mask])
        k = int(np.argmax(ratio))
        if ratio[k] > self.sup:
            self.sup = float(ratio[k])
            self.argmax = tuple(float(c) for c in coords[k])
        idx = np.minimum(np.searchsorted(self.edges, r, side="right") - 1, len(self.env) - 1)
        np.maximum.at(self.env, idx, np.abs(ratio))

    def verdict(self, growth_tol=1e-6):
        centers = 0.5 * (self.edges[1:] + self.edges[:-1])
        outer = centers > 0.9 * self.R
        inner_max = self.env[~outer].max()
        outer_max = self.env[outer].max()
        half = (centers >= 0.5 * self.R) & (self.env > 1e-300)
        if half.sum() >= 3:
            r = centers[half]
            X = np.column_stack([np.ones_like(r), np.log(r), r**2])
            coef, *_ = np.linalg.lstsq(X, np.log(self.env[half]), rcond=None)
            k, c = float(coef[1]), float(coef[2])
        else:
            k, c = 0.0, 0.0
        rate = c * self.R**2
        if outer_max <= inner_max * (1 + growth_tol):
            status = BOUNDED
        elif rate >= 4:
            status = UNBOUNDED
        elif rate <= 1:
            status = POLYNOMIAL
        else:
            status = INCONCLUSIVE
        return SupRatio(self.sup, self.argmax, status, k, rate)


def _quad(Z, A):
    return np.einsum("...i,ij,...j->...", Z, A, Z)


def equivalence_test(psi, A, B, floor=1e-7):
    """Empirical check of the equivalence between the two one-sided Gaussian
    bounds on ``psi`` and ``F psi`` and the joint bound on ``W psi``.

    Three ratios are formed on the grid, each restricted to the region where
    its Gaussian weight is at least ``floor`` (beyond that, sampling noise is
    amplified without bound):

    * ``|psi(x)| exp(Ax^2 / 2hbar)``
    * ``|F psi(p)| exp(Bp^2 / 2hbar)``
    * ``W psi(z) exp((Ax^2 + Bp^2) / hbar)`` (one-sided: ``W`` may be negative)

    The result is an empirical certificate only: a finite grid can support or
    falsify boundedness, not prove it.
    """
    A, B = _pair(A, B)
    n = psi.n
    if A.shape[0] != n:
        raise InvalidDimensionError(f"A has order {A.shape[0]}, state has n={n}")
    hbar = psi.hbar
    hardy = classify_hardy(A, B)
    ln = np.log(1 / floor)
    msgs = []

    def one_sided(state, S):
        pts = np.stack([c.ravel() for c in state.coords()], axis=-1)
        q = _quad(pts, S) / hbar
        R = np.sqrt(2 * ln)
        # stay inside the grid along the weakest direction of S
        half = min(min(abs(a.min), abs(a.max - a.step)) for a in state.axes)
        R_grid = half * np.sqrt(np.linalg.eigvalsh(S)[0] / hbar)
        if R_grid < R:
            msgs.append(f"grid limits the test region to r <= {R_grid:.3g}")
            R = R_grid
        env = _Envelope(R)
        env.add(np.sqrt(q), np.abs(state.values.ravel()), q / 2, pts)
        return env.verdict()

    rx = one_sided(psi, A)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        Fpsi = fourier_hbar(psi)
    rp = one_sided(Fpsi, B)

    M = block_diag2(A, B)
    R = np.sqrt(ln)
    xs = [a.coords for a in psi.axes]
    ps = [a.dual(hbar).coords for a in psi.axes]
    half_x = min(min(abs(c[0]), abs(c[-1])) for c in xs)
    half_p = min(min(abs(c[0]), abs(c[-1])) for c in ps)
    R_grid = min(half_x * np.sqrt(np.linalg.eigvalsh(A)[0] / hbar),
                 half_p * np.sqrt(np.linalg.eigvalsh(B)[0] / hbar))
    if R_grid < R:
        msgs.append(f"grid limits the Wigner test region to r <= {R_grid:.3g}")
        R = R_grid
    env = _Envelope(R)
    for sl, block, _ in iter_wigner_real_slabs(psi):
        x1 = xs[0][sl]
        grids = np.meshgrid(x1, *(xs[1:] + ps), indexing="ij")
        Z = np.stack([g.ravel() for g in grids], axis=-1)
        q = _quad(Z, M) / hbar
        env.add(np.sqrt(q), block.ravel(), q, Z)
    rw = env.verdict()

    c1 = rx.status == BOUNDED and rp.status == BOUNDED
    c2 = rw.status == BOUNDED
    return EquivalenceReport(rx, rp, rw, c1, c2, c1 == c2, hardy, tuple(msgs))


# -- Robertson-Schrodinger -----------------------------------------------------


@dataclass(frozen=True)
class ModeUncertainty:
    var_x: float
    var_p: float
    cov_xp: float
    satisfied: bool


@dataclass(frozen=True)
class RSReport:
    """Two equivalent forms of the covariance uncertainty principle.

    ``psd_min_eig`` is the least eigenvalue of ``Sigma + (i hbar/2) J``;
    ``spectrum_min`` the least symplectic eigenvalue of ``Sigma``.
    """

    psd_min_eig: float
    spectrum_min: float
    passes: bool
    per_mode: tuple
    hbar: float = 1.0
    warnings: tuple = ()


def robertson_schrodinger(Sigma, hbar=1.0, tol=TAU_PSD):
    """Check that ``Sigma`` is an admissible quantum covariance matrix.

    Tests ``Sigma + (i hbar/2) J >= 0`` and ``lambda_n^sigma(Sigma) >= hbar/2``
    independently and cross-checks them. Inside a narrow band around the
    threshold a disagreement is only reported as a warning.

    Raises:
        InternalConsistencyError: the two tests disagree away from the boundary.
    """
    S = as_spd(Sigma, name="Sigma")
    if S.shape[0] % 2:
        raise InvalidDimensionError(f"Sigma must have even order, got {S.shape[0]}")
    if not hbar > 0:
        raise ValidationError("hbar must be positive")
    n = S.shape[0] // 2
    scale = max(1.0, float(np.linalg.norm(S, 2)))
    atol = tol * scale
    H = S + 0.5j * hbar * standard_form_matrix(n)
    psd_min = float(np.linalg.eigvalsh(H)[0])
    spec_min = float(symplectic_spectrum(S)[-1])
    ok_psd = psd_min >= -atol
    ok_spec = spec_min >= hbar / 2 - atol
    msgs = []
    if ok_psd != ok_spec:
        detail = (f"PSD test gives min eigenvalue {psd_min:.3e}, symplectic test gives "
                  f"lambda_n = {spec_min:.12g} vs hbar/2 = {hbar / 2:.12g}")
        if abs(psd_min) < RS_BAND * scale or abs(spec_min - hbar / 2) < RS_BAND * scale:
            msgs.append("boundary case: " + detail)
        else:
            raise InternalConsistencyError(detail)
    modes = []
    for j in range(n):
        vx, vp, c = S[j, j], S[n + j, n + j], S[j, n + j]
        modes.append(ModeUncertainty(float(vx), float(vp), float(c),
                                     bool(vx * vp >= c * c + hbar**2 / 4 - atol * scale)))
    return RSReport(psd_min, spec_min, bool(ok_psd and ok_spec), tuple(modes),
                    float(hbar), tuple(msgs))


# -- convex exponents ----------------------------------------------------------


@dataclass(frozen=True)
class ConvexExponentReport:
    """Diagnostics of a convex exponent ``Q`` with body ``{Q <= hbar}``.

    ``lambda_Q`` is the least Hessian eigenvalue seen on the sample and
    ``Lambda_Q`` the largest. ``Q(z) >= lambda_Q |z|^2 / 2`` puts the body inside
    the ball of radius ``sqrt(2 hbar / lambda_Q)`` (``enclosing_radius``);
    ``Q(z) <= Lambda_Q |z|^2 / 2`` puts the ball of radius
    ``sqrt(2 hbar / Lambda_Q)`` inside it (``inscribed_radius``). Both
    inclusions are checked on sampled spheres. A nonzero state can satisfy
    the bound only if ``lambda_Q <= 2``.
    """

    lambda_Q: float
    lambda_upper_ok: bool
    enclosing_radius: float
    inscribed_radius: float
    inclusion_ok: bool
    john_capacity: float
    passes_capacity_bound: bool
    center: np.ndarray
    john: object = None
    hbar: float = 1.0
    warnings: tuple = field(default_factory=tuple)


def convex_exponent_analyze(C, seed=0, samples=HESSIAN_SAMPLES, tol=TAU_CAPACITY):
    """Analyze ``W psi(z) <= C exp(-Q(z)/hbar)`` for a convex exponent ``Q``.

    The body's level plays the role of ``hbar``. ``Q`` is first recentered at
    its minimizer (a Heisenberg translation of the state) so that
    ``Q(0) = 0`` and ``grad Q(0) = 0``.

    Raises:
        ConvexityError: a sampled Hessian has a nonpositive eigenvalue.
    """
    hbar = C.level
    z0 = _interior_point(C)
    q0 = float(C(z0[None, :])[0])
    msgs = []
    if np.linalg.norm(z0) > 1e-8 or abs(q0) > 1e-12:
        msgs.append(f"recentered at z0 = {np.round(z0, 12).tolist()} (Q(z0) = {q0:.3g})")
        C = C.recentered(z0)
    pts = np.vstack([np.zeros(C.dim), ball_samples(C.dim, samples, C.sampling_radius, seed=seed)])
    H = fd_hessian(C, pts)
    w = np.linalg.eigvalsh(H)
    lam, lam_max = float(w[:, 0].min()), float(w[:, -1].max())
    if lam <= 0:
        raise ConvexityError(f"Hessian estimate {lam:.4g} is not positive on the sample")
    r_out = float(np.sqrt(2 * hbar / lam))
    r_in = float(np.sqrt(2 * hbar / lam_max))
    sphere = ball_samples(C.dim, 1024, 1.0, seed=seed + 3)
    sphere /= np.linalg.norm(sphere, axis=1, keepdims=True)
    inclusion_ok = bool(np.min(C(r_out * sphere)) >= hbar * (1 - tol)
                        and np.max(C(r_in * sphere)) <= hbar * (1 + tol))
    john = None
    cap = float("nan")
    if C.dim <= 4:
        john = john_ellipsoid(C, seed=seed)
        cap = ellipsoid_capacity(john, hbar).capacity
    else:
        msgs.append("John ellipsoid skipped (2n > 4)")
    return ConvexExponentReport(
        lambda_Q=lam,
        lambda_upper_ok=bool(lam <= 2 * (1 + tol)),
        enclosing_radius=r_out,
        inscribed_radius=r_in,
        inclusion_ok=inclusion_ok,
        john_capacity=cap,
        passes_capacity_bound=bool(cap >= np.pi * hbar * (1 - tol)),
        center=z0,
        john=john,
        hbar=float(hbar),
        warnings=tuple(msgs),
    )
