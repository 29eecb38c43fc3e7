"""Symplectic capacities of phase-space ellipsoids and convex bodies.

On ellipsoids every symplectic capacity coincides, and for
``{z : M(z - z0)^2 <= r}`` it equals ``pi * r / lambda_1`` where ``lambda_1`` is
the largest symplectic eigenvalue of ``M``. Convex sublevel sets are handled
through their John (maximum-volume inscribed) ellipsoid, whose capacity is a
lower bound for the body by monotonicity.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import ApproximationError, ConvexityError, InvalidDimensionError, ValidationError
from .linalg import as_spd, block_diag2
from .spectral import symplectic_spectrum

TAU_QUANTUM = 1e-9
EPS_JOHN = 1e-4
RAY_TOL = 1e-10
DEFAULT_DIRECTIONS = {2: 256, 4: 2048}


@dataclass(frozen=True)
class PhaseEllipsoid:
    """The set ``{z : M(z - center)^2 <= level}``."""

    M: np.ndarray
    center: np.ndarray
    level: float

    def __post_init__(self):
        M = as_spd(self.M, name="M")
        if M.shape[0] % 2:
            raise InvalidDimensionError(f"M must have even order, got {M.shape[0]}")
        center = np.zeros(M.shape[0]) if self.center is None else np.asarray(self.center, dtype=float)
        if center.shape != (M.shape[0],):
            raise InvalidDimensionError(f"center must have length {M.shape[0]}")
        if not self.level > 0:
            raise ValidationError(f"level must be positive, got {self.level}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "level", float(self.level))

    @property
    def n(self):
        return self.M.shape[0] // 2

    @property
    def shape_matrix(self):
        """``E`` with the ellipsoid equal to ``center + E @ unit_ball``."""
        w, V = np.linalg.eigh(self.M / self.level)
        return (V / np.sqrt(w)) @ V.T

    def volume(self):
        from math import gamma, pi
        d = self.M.shape[0]
        return pi ** (d / 2) / gamma(d / 2 + 1) * np.sqrt(self.level**d / np.linalg.det(self.M))

    def contains(self, z, rtol=0.0):
        z = np.atleast_2d(z) - self.center
        return np.einsum("ij,jk,ik->i", z, self.M, z) <= self.level * (1 + rtol)


@dataclass(frozen=True)
class CapacityReport:
    capacity: float
    spectrum_max: float
    satisfies_quantum_bound: bool
    hbar: float = 1.0


def ellipsoid_capacity(E, hbar=1.0):
    """Capacity ``pi * level / lambda_1`` of a phase ellipsoid.

    The center is ignored (capacities are invariant under affine symplectic maps).
    ``satisfies_quantum_bound`` compares against ``h/2 = pi * hbar``.
    """
    lam1 = float(symplectic_spectrum(E.M)[0])
    cap = np.pi * E.level / lam1
    return CapacityReport(capacity=cap, spectrum_max=lam1,
                          satisfies_quantum_bound=bool(cap >= np.pi * hbar * (1 - TAU_QUANTUM)),
                          hbar=float(hbar))


def wigner_ellipsoid(A, B, hbar=1.0):
    """The ellipsoid ``Ax^2 + Bp^2 <= hbar`` attached to Gaussian decay bounds."""
    A = as_spd(A, name="A")
    B = as_spd(B, name="B")
    if A.shape != B.shape:
        raise InvalidDimensionError(f"A and B must have equal order, got {A.shape} and {B.shape}")
    if not hbar > 0:
        raise ValidationError("hbar must be positive")
    return PhaseEllipsoid(M=block_diag2(A, B), center=np.zeros(2 * A.shape[0]), level=hbar)


# -- convex bodies -------------------------------------------------------------


@dataclass(frozen=True)
class ConvexBody:
    """Sublevel set ``{z : Q(z) <= level}`` of a smooth convex function.

    ``evaluator`` maps an ``(m, 2n)`` array of points to ``m`` values;
    ``gradient`` (optional) maps it to ``(m, 2n)``. ``sampling_radius`` bounds
    the region where convexity is estimated.
    """

    n: int
    evaluator: object
    level: float = 1.0
    sampling_radius: float = 2.0
    gradient: object = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidDimensionError(f"n must be a positive integer, got {self.n}")
        if not self.level > 0 or not self.sampling_radius > 0:
            raise ValidationError("level and sampling_radius must be positive")

    @property
    def dim(self):
        return 2 * self.n

    def __call__(self, Z):
        Z = np.asarray(Z, dtype=float)
        flat = Z.reshape(-1, self.dim)
        return np.asarray(self.evaluator(flat), dtype=float).reshape(Z.shape[:-1])

    def grad(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        if self.gradient is not None:
            return np.asarray(self.gradient(Z), dtype=float)
        return fd_gradient(self, Z)

    def recentered(self, z0):
        """``z -> Q(z + z0) - Q(z0)``, same level."""
        z0 = np.asarray(z0, dtype=float)
        q0 = float(self(z0[None, :])[0])
        f, g = self.evaluator, self.gradient
        grad = None if g is None else (lambda Z: g(Z + z0))
        return ConvexBody(n=self.n, evaluator=lambda Z: f(Z + z0) - q0, level=self.level,
                          sampling_radius=self.sampling_radius, gradient=grad,
                          name=self.name, params={**self.params, "shift": z0.tolist()})


def quadratic_body(M, level=1.0, sampling_radius=None):
    """``Q(z) = Mz^2``."""
    M = as_spd(M, name="M")
    if M.shape[0] % 2:
        raise InvalidDimensionError("M must have even order")
    if sampling_radius is None:
        sampling_radius = float(np.sqrt(level / np.linalg.eigvalsh(M)[0]))
    return ConvexBody(n=M.shape[0] // 2,
                      evaluator=lambda Z: np.einsum("ij,jk,ik->i", Z, M, Z),
                      gradient=lambda Z: 2.0 * Z @ M,
                      level=level, sampling_radius=sampling_radius,
                      name="quadratic", params={"M": M.tolist()})


def quartic_radial_body(n, alpha=1.0, level=1.0, sampling_radius=None):
    """``Q(z) = |z|^2 + alpha |z|^4``; the body is a ball."""
    if alpha < 0:
        raise ValidationError("alpha must be non-negative")

    def q(Z):
        r2 = np.einsum("ij,ij->i", Z, Z)
        return r2 + alpha * r2**2

    def g(Z):
        r2 = np.einsum("ij,ij->i", Z, Z)
        return (2.0 + 4.0 * alpha * r2)[:, None] * Z

    if sampling_radius is None:
        sampling_radius = float(np.sqrt(level))
    return ConvexBody(n=n, evaluator=q, gradient=g, level=level,
                      sampling_radius=sampling_radius, name="quartic-radial",
                      params={"alpha": alpha})


def quartic_perturbed_body(M, eps=0.5, level=1.0, sampling_radius=None):
    """``Q(z) = Mz^2 + eps * sum_{i<j} z_i^2 z_j^2``.

    Only convex near the origin; convexity is checked on the sampled domain.
    """
    M = as_spd(M, name="M")

    def q(Z):
        s2 = Z**2
        tot = np.einsum("ij->i", s2)
        cross = 0.5 * (tot**2 - np.einsum("ij->i", s2**2))
        return np.einsum("ij,jk,ik->i", Z, M, Z) + eps * cross

    def g(Z):
        s2 = Z**2
        tot = np.einsum("ij->i", s2)[:, None]
        return 2.0 * Z @ M + eps * 2.0 * Z * (tot - s2)

    if sampling_radius is None:
        sampling_radius = float(np.sqrt(level / np.linalg.eigvalsh(M)[0]))
    return ConvexBody(n=M.shape[0] // 2, evaluator=q, gradient=g, level=level,
                      sampling_radius=sampling_radius, name="quartic-perturbed",
                      params={"M": M.tolist(), "eps": eps})


def fd_gradient(Q, Z):
    h = np.finfo(float).eps ** (1 / 3) * (1 + np.abs(Z))
    G = np.empty_like(Z)
    for i in range(Z.shape[1]):
        e = np.zeros(Z.shape[1])
        e[i] = 1.0
        hi = h[:, i:i + 1]
        G[:, i] = (Q(Z + hi * e) - Q(Z - hi * e)) / (2 * hi[:, 0])
    return G


def fd_hessian(Q, Z):
    """Central-difference Hessians at each row of ``Z``; step ``eps^(1/3) (1 + |z|)``.

    Differences the analytic gradient when ``Q`` carries one, else ``Q`` itself.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    m, d = Z.shape
    h = (np.finfo(float).eps ** (1 / 3) * (1 + np.linalg.norm(Z, axis=1)))[:, None]
    E = np.eye(d)
    if getattr(Q, "gradient", None) is not None:
        # central differences of the exact gradient: O(h^2 + eps/h) error
        H = np.empty((m, d, d))
        for i in range(d):
            H[:, :, i] = (Q.grad(Z + h * E[i]) - Q.grad(Z - h * E[i])) / (2 * h)
        return 0.5 * (H + np.transpose(H, (0, 2, 1)))
    f0 = Q(Z)
    H = np.empty((m, d, d))
    for i in range(d):
        fp = Q(Z + h * E[i])
        fm = Q(Z - h * E[i])
        H[:, i, i] = (fp - 2 * f0 + fm) / h[:, 0] ** 2
        for j in range(i + 1, d):
            fpp = Q(Z + h * (E[i] + E[j]))
            fpm = Q(Z + h * (E[i] - E[j]))
            fmp = Q(Z - h * (E[i] - E[j]))
            fmm = Q(Z - h * (E[i] + E[j]))
            H[:, i, j] = H[:, j, i] = (fpp - fpm - fmp + fmm) / (4 * h[:, 0] ** 2)
    return H


def sphere_directions(dim, count, seed=0):
    """Deterministic quasi-uniform unit vectors.

    Equally spaced angles in 2D; scrambled Sobol points pushed through the
    normal quantile function otherwise.
    """
    if dim == 2:
        t = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(t), np.sin(t)])
    from scipy.stats import norm
    u = qmc.Sobol(d=dim, scramble=True, seed=seed).random(count)
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def ball_samples(dim, count, radius, seed=0):
    """Quasi-random points filling the ball of given radius."""
    u = qmc.Sobol(d=dim + 1, scramble=True, seed=seed).random(count)
    from scipy.stats import norm
    g = norm.ppf(np.clip(u[:, :dim], 1e-12, 1 - 1e-12))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return radius * u[:, dim:] ** (1.0 / dim) * g


def ray_boundary(C, center, directions, tol=RAY_TOL):
    """Distances ``t`` with ``Q(center + t u) = level`` along each direction.

    Vectorized bisection; the bracket is grown by doubling.
    """
    U = np.asarray(directions, dtype=float)
    c = np.asarray(center, dtype=float)
    if C(c[None, :])[0] >= C.level:
        raise ValidationError("ray-shooting center is not inside the body")
    lo = np.zeros(len(U))
    hi = np.full(len(U), max(C.sampling_radius, 1e-3))
    for _ in range(200):
        out = C(c + hi[:, None] * U) > C.level
        if out.all():
            break
        hi = np.where(out, hi, 2 * hi)
    else:
        raise ApproximationError("body appears unbounded along some direction")
    while np.max(hi - lo) > tol * max(1.0, np.max(hi)):
        mid = 0.5 * (lo + hi)
        inside = C(c + mid[:, None] * U) <= C.level
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


def _interior_point(C):
    from scipy.optimize import minimize

    d = C.dim
    res = minimize(lambda z: float(C(z[None, :])[0]), np.zeros(d),
                   jac=lambda z: C.grad(z[None, :])[0], method="BFGS",
                   options={"gtol": 1e-12})
    return res.x


def _check_convex(C, points, tol=1e-6):
    H = fd_hessian(C, points)
    w = np.linalg.eigvalsh(H)[:, 0]
    scale = max(1.0, float(np.max(np.abs(np.linalg.eigvalsh(H)))))
    k = int(np.argmin(w))
    if w[k] < -tol * scale:
        raise ConvexityError(
            f"negative Hessian eigenvalue {w[k]:.4g} at z={points[k].tolist()}"
        )
    return w


def _mvie(a, beta):
    """Max-volume ellipsoid ``{c + B u}`` inside ``{z : a_i . z <= beta_i}``."""
    import cvxpy as cp

    d = a.shape[1]
    B = cp.Variable((d, d), PSD=True)
    c = cp.Variable(d)
    prob = cp.Problem(cp.Maximize(cp.log_det(B)), [cp.norm(a @ B, axis=1) + a @ c <= beta])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            prob.solve(solver="CLARABEL")
    except Exception as exc:  # solver failures surface uniformly
        raise ApproximationError(f"inscribed-ellipsoid solver failed: {exc}") from exc
    if prob.status not in ("optimal", "optimal_inaccurate") or B.value is None:
        raise ApproximationError(f"inscribed-ellipsoid solver status {prob.status}")
    Bv = 0.5 * (B.value + B.value.T)
    return Bv, np.asarray(c.value)


@dataclass(frozen=True)
class JohnEllipsoid(PhaseEllipsoid):
    """A :class:`PhaseEllipsoid` plus diagnostics of the John approximation."""

    max_q_ratio: float = float("nan")
    shrink_factor: float = 1.0
    containment_factor: float = float("nan")
    containment_ok: bool = False
    boundary_points: np.ndarray = None
    min_hessian_eig: float = float("nan")


def john_ellipsoid(C, directions=None, seed=0, eps_john=EPS_JOHN):
    """Approximate the maximum-volume ellipsoid inscribed in a convex body.

    The boundary ``{Q = level}`` is located by bisection along quasi-uniform
    rays from the minimizer of ``Q``. Each boundary point contributes its
    supporting halfspace; the max-log-det ellipsoid inside that polytope is
    found by conic optimization. The result is then checked against the body
    (``max Q <= level (1 + eps_john)`` on its boundary, shrinking if needed)
    and for the dilation containment ``C ⊂ c + 2n (W - c)``.

    Args:
        C: ConvexBody with ``2n <= 4``.
        directions: ray count; defaults to 256 (2D) or 2048 (4D).

    Returns:
        JohnEllipsoid
    """
    d = C.dim
    if d > 4:
        raise InvalidDimensionError(f"John ellipsoid supported for 2n <= 4, got 2n = {d}")
    if directions is None:
        directions = DEFAULT_DIRECTIONS[d]
    c0 = _interior_point(C)
    U = sphere_directions(d, int(directions), seed=seed)
    t = ray_boundary(C, c0, U)
    bpts = c0 + t[:, None] * U

    interior = c0 + ball_samples(d, 512, float(np.min(t)), seed=seed + 1)
    hmin = _check_convex(C, np.vstack([bpts, interior]))
    if np.min(hmin) <= 0:
        raise ConvexityError("Hessian estimate is not positive on the sampled domain")

    normals = C.grad(bpts)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    beta = np.einsum("ij,ij->i", normals, bpts)
    B, c = _mvie(normals, beta)

    # verify inclusion W ⊂ C on a dense sample of dW
    probe = sphere_directions(d, max(4 * int(directions), 1024), seed=seed + 2)
    qmax = float(np.max(C(c + probe @ B.T))) / C.level
    shrink = 1.0
    if qmax > 1 + eps_john:
        lo, hi = 0.0, 1.0
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            if np.max(C(c + mid * probe @ B.T)) <= C.level:
                lo = mid
            else:
                hi = mid
        shrink = lo
        B = shrink * B
        qmax = float(np.max(C(c + probe @ B.T))) / C.level
        if shrink < 0.5:
            raise ApproximationError("John ellipsoid approximation failed to converge",
                                     gap=1 - shrink)
    Binv = np.linalg.inv(B)
    y = (bpts - c) @ Binv.T
    factor = float(np.sqrt(np.max(np.einsum("ij,ij->i", y, y))))
    Mw = C.level * Binv.T @ Binv
    return JohnEllipsoid(M=0.5 * (Mw + Mw.T), center=c, level=C.level,
                         max_q_ratio=qmax, shrink_factor=shrink,
                         containment_factor=factor,
                         containment_ok=bool(factor <= d * (1 + 1e-9)),
                         boundary_points=bpts, min_hessian_eig=float(np.min(hmin)))
