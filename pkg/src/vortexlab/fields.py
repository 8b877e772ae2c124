"""Scalar fields and spectral calculus on a flat 2-torus.

Conventions used throughout the package:

* The torus is ``[0, length_x) x [0, length_y)`` with the flat metric.
* Grids are uniform, ``values[i, j]`` sampling the point
  ``(i * length_x / nx, j * length_y / ny)`` (row-major).
* ``laplacian`` is the analyst's flat Laplacian ``d^2/dx^2 + d^2/dy^2``
  (negative semidefinite); the geometer's Hodge Laplacian is its negative.
  Mode ``(k1, k2)`` carries the symbol ``-((2 pi k1 / length_x)^2 +
  (2 pi k2 / length_y)^2)``.
* ``integrate`` is the periodic trapezoid rule, i.e. ``volume * mean``,
  which is exact for trigonometric polynomials up to the grid band.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    BadRadii,
    EmptyMask,
    GridMismatch,
    NoConvergence,
    NonPositivePotential,
)

__all__ = [
    "TorusGeometry",
    "GridSpec",
    "ScalarField",
    "RegionMask",
    "grid_points",
    "torus_displacement",
    "torus_distance",
    "constant_field",
    "field_from_function",
    "field_from_values",
    "laplacian",
    "gradient",
    "gradient_magnitude",
    "dirichlet_energy",
    "solve_linearized",
    "integrate",
    "lp_norm",
    "sup_norm",
    "sample_at",
    "cutoff_profile",
    "bump_cutoff",
    "cutoff_ratio_sup",
    "resample",
]


@dataclass(frozen=True)
class TorusGeometry:
    """Side lengths of the flat torus."""

    length_x: float
    length_y: float

    def __post_init__(self):
        if not (self.length_x > 0 and self.length_y > 0):
            raise ValueError("torus side lengths must be positive")

    @property
    def volume(self) -> float:
        return self.length_x * self.length_y

    @property
    def injectivity_radius(self) -> float:
        return 0.5 * min(self.length_x, self.length_y)


@dataclass(frozen=True)
class GridSpec:
    """Uniform sampling resolution; both counts must be even and >= 8."""

    nx: int
    ny: int

    def __post_init__(self):
        for n in (self.nx, self.ny):
            if n < 8 or n % 2 != 0:
                raise ValueError("grid counts must be even and at least 8")

    def spacing(self, geometry: TorusGeometry) -> tuple[float, float]:
        return geometry.length_x / self.nx, geometry.length_y / self.ny


def _freeze(values: np.ndarray) -> np.ndarray:
    out = np.asarray(values, dtype=np.float64)
    out = out.copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class ScalarField:
    """Real scalar field sampled on a torus grid.

    The sample array is copied and frozen at construction; all operations
    return new fields.
    """

    geometry: TorusGeometry
    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"values shape {vals.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.ny})"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", _freeze(vals))

    def _like(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.geometry, self.grid, values)

    def __add__(self, other):
        if isinstance(other, ScalarField):
            _check_compatible(self, other)
            return self._like(self.values + other.values)
        return self._like(self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            _check_compatible(self, other)
            return self._like(self.values - other.values)
        return self._like(self.values - float(other))

    def __rsub__(self, other):
        return self._like(float(other) - self.values)

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            _check_compatible(self, other)
            return self._like(self.values * other.values)
        return self._like(self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self._like(-self.values)

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


@dataclass(frozen=True)
class RegionMask:
    """Quadrature weights in [0, 1] marking a region of the torus."""

    geometry: TorusGeometry
    grid: GridSpec
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (self.grid.nx, self.grid.ny):
            raise ValueError("mask shape does not match grid")
        if w.min() < 0.0 or w.max() > 1.0:
            raise ValueError("mask weights must lie in [0, 1]")
        object.__setattr__(self, "weights", _freeze(w))

    @classmethod
    def full(cls, geometry: TorusGeometry, grid: GridSpec) -> "RegionMask":
        return cls(geometry, grid, np.ones((grid.nx, grid.ny)))

    @classmethod
    def excluding_discs(
        cls,
        geometry: TorusGeometry,
        grid: GridSpec,
        centers: Iterable[tuple[float, float]],
        radius: float,
    ) -> "RegionMask":
        """Indicator of the complement of closed discs around ``centers``."""
        w = np.ones((grid.nx, grid.ny))
        for c in centers:
            w[torus_distance(geometry, grid, c) <= radius] = 0.0
        return cls(geometry, grid, w)

    def area(self) -> float:
        return float(self.weights.mean()) * self.geometry.volume


def _check_compatible(a, b) -> None:
    if a.geometry != b.geometry or a.grid != b.grid:
        raise GridMismatch(
            f"incompatible geometry/grid: {a.geometry}/{a.grid} vs {b.geometry}/{b.grid}"
        )


def grid_points(geometry: TorusGeometry, grid: GridSpec):
    """Meshgrid arrays (X, Y) of the sample coordinates, indexing='ij'."""
    x = np.arange(grid.nx) * (geometry.length_x / grid.nx)
    y = np.arange(grid.ny) * (geometry.length_y / grid.ny)
    return np.meshgrid(x, y, indexing="ij")


def torus_displacement(geometry: TorusGeometry, grid: GridSpec, center):
    """Minimal-image displacement (dx, dy) of every sample from ``center``."""
    X, Y = grid_points(geometry, grid)
    lx, ly = geometry.length_x, geometry.length_y
    dx = np.mod(X - center[0] + 0.5 * lx, lx) - 0.5 * lx
    dy = np.mod(Y - center[1] + 0.5 * ly, ly) - 0.5 * ly
    return dx, dy


def torus_distance(geometry: TorusGeometry, grid: GridSpec, center):
    dx, dy = torus_displacement(geometry, grid, center)
    return np.hypot(dx, dy)


def constant_field(geometry: TorusGeometry, grid: GridSpec, value: float) -> ScalarField:
    return ScalarField(geometry, grid, np.full((grid.nx, grid.ny), float(value)))


def field_from_function(
    geometry: TorusGeometry, grid: GridSpec, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
) -> ScalarField:
    X, Y = grid_points(geometry, grid)
    return ScalarField(geometry, grid, np.asarray(fn(X, Y), dtype=np.float64))


def field_from_values(template: ScalarField, values: np.ndarray) -> ScalarField:
    return ScalarField(template.geometry, template.grid, values)


# ---------------------------------------------------------------------------
# Spectral machinery


_symbol_cache: dict = {}


def _wavenumbers(geometry: TorusGeometry, grid: GridSpec):
    """Cached angular wavenumber arrays (kx, ky) and -|k|^2 symbol."""
    key = (grid.nx, grid.ny, geometry.length_x, geometry.length_y)
    hit = _symbol_cache.get(key)
    if hit is None:
        kx = 2.0 * np.pi * np.fft.fftfreq(grid.nx, d=1.0 / grid.nx) / geometry.length_x
        ky = 2.0 * np.pi * np.fft.fftfreq(grid.ny, d=1.0 / grid.ny) / geometry.length_y
        minus_k2 = -(kx[:, None] ** 2 + ky[None, :] ** 2)
        # Odd derivatives cannot represent the Nyquist mode consistently;
        # zero it in the first-derivative multipliers.
        dx_mult = 1j * kx.copy()
        dy_mult = 1j * ky.copy()
        dx_mult[grid.nx // 2] = 0.0
        dy_mult[grid.ny // 2] = 0.0
        hit = (kx, ky, minus_k2, dx_mult, dy_mult)
        _symbol_cache[key] = hit
    return hit


def laplacian(f: ScalarField) -> ScalarField:
    """Flat Laplacian by Fourier multiplier; the output has zero mean."""
    _, _, minus_k2, _, _ = _wavenumbers(f.geometry, f.grid)
    out = np.fft.ifft2(np.fft.fft2(f.values) * minus_k2).real
    return f._like(out)


def gradient(f: ScalarField) -> tuple[ScalarField, ScalarField]:
    """Spectral partial derivatives (df/dx, df/dy)."""
    _, _, _, dx_mult, dy_mult = _wavenumbers(f.geometry, f.grid)
    spec = np.fft.fft2(f.values)
    fx = np.fft.ifft2(spec * dx_mult[:, None]).real
    fy = np.fft.ifft2(spec * dy_mult[None, :]).real
    return f._like(fx), f._like(fy)


def gradient_magnitude(f: ScalarField) -> ScalarField:
    fx, fy = gradient(f)
    return f._like(np.hypot(fx.values, fy.values))


def dirichlet_energy(f: ScalarField) -> float:
    """integral of |grad f|^2, evaluated exactly by Parseval."""
    _, _, minus_k2, _, _ = _wavenumbers(f.geometry, f.grid)
    spec = np.fft.fft2(f.values)
    n = f.grid.nx * f.grid.ny
    power = float(np.sum((spec.real**2 + spec.imag**2) * (-minus_k2)))
    return power / n**2 * f.geometry.volume


def integrate(f: ScalarField) -> float:
    """Periodic trapezoid quadrature: exact mean times the volume."""
    return float(f.values.mean()) * f.geometry.volume


def _mask_weights(f: ScalarField, mask: RegionMask | None) -> np.ndarray:
    if mask is None:
        return np.ones_like(f.values)
    _check_compatible(f, mask)
    if float(mask.weights.sum()) == 0.0:
        raise EmptyMask("mask has zero area")
    return mask.weights


def lp_norm(f: ScalarField, p: float, mask: RegionMask | None = None) -> float:
    """(integral of mask * |f|^p)^(1/p) with the grid quadrature."""
    if p < 1:
        raise ValueError("p must be >= 1")
    w = _mask_weights(f, mask)
    val = float(np.mean(w * np.abs(f.values) ** p)) * f.geometry.volume
    return val ** (1.0 / p)


def sup_norm(f: ScalarField, mask: RegionMask | None = None) -> float:
    """Max of |f| over samples where the mask weight exceeds 1/2."""
    if mask is None:
        return float(np.abs(f.values).max())
    _check_compatible(f, mask)
    sel = mask.weights > 0.5
    if not sel.any():
        raise EmptyMask("mask has no samples with weight > 1/2")
    return float(np.abs(f.values[sel]).max())


def _phase_matrix(coords: np.ndarray, n: int, length: float) -> np.ndarray:
    """Evaluation phases for the trigonometric interpolant along one axis.

    The Nyquist slot uses a cosine so the interpolant is real and agrees
    with the inverse DFT at grid points.
    """
    freqs = np.fft.fftfreq(n, d=1.0 / n)
    theta = np.multiply.outer(coords / length, freqs) * 2.0 * np.pi
    phases = np.exp(1j * theta)
    phases[:, n // 2] = np.cos(theta[:, n // 2])
    return phases


def sample_at(f: ScalarField, points) -> np.ndarray | float:
    """Evaluate the trigonometric interpolant of ``f`` at off-grid points.

    ``points`` is one (x, y) pair or an (M, 2) array. Exact for fields
    that are band-limited to the grid, and reproduces grid samples.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (x, y) or an (M, 2) array")
    spec = np.fft.fft2(f.values)
    px = _phase_matrix(pts[:, 0], f.grid.nx, f.geometry.length_x)
    py = _phase_matrix(pts[:, 1], f.grid.ny, f.geometry.length_y)
    vals = np.einsum("mj,jk,mk->m", px, spec, py).real / (f.grid.nx * f.grid.ny)
    if np.ndim(points) == 1:
        return float(vals[0])
    return vals


# ---------------------------------------------------------------------------
# Preconditioned conjugate gradients for (-eps*Laplacian + V) x = b


def solve_linearized(
    epsilon: float,
    potential: ScalarField,
    rhs: ScalarField,
    tol: float = 1e-12,
    max_iter: int | None = None,
) -> ScalarField:
    """Solve ``(-epsilon * laplacian + potential) x = rhs`` by CG.

    The potential must be strictly positive so the operator is symmetric
    positive definite. Preconditioner: the Fourier-diagonal inverse of
    ``-epsilon * laplacian + mean(potential)``. Convergence is declared
    on the true residual, ``||A x - rhs||_2 <= tol * ||rhs||_2``, widened
    to the roundoff floor ``~ u (lam_max ||x|| + ||rhs||)`` when that lies
    above ``tol * ||rhs||`` — finite-precision CG cannot reduce the true
    residual past that level, so a tighter target would stall forever.
    """
    _check_compatible(potential, rhs)
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    vmin = potential.min()
    if vmin <= 0.0:
        raise NonPositivePotential(f"potential minimum {vmin} is not positive")

    grid = rhs.grid
    cap = max_iter if max_iter is not None else 10 * (grid.nx + grid.ny)
    _, _, minus_k2, _, _ = _wavenumbers(rhs.geometry, grid)
    V = potential.values
    b = rhs.values
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return rhs._like(np.zeros_like(b))

    inv_symbol = 1.0 / (epsilon * (-minus_k2) + float(V.mean()))
    lam_max = epsilon * float((-minus_k2).max()) + float(V.max())

    def target(x_norm: float) -> float:
        floor = 32.0 * np.finfo(float).eps * (lam_max * x_norm + b_norm)
        return max(tol * b_norm, floor)

    def apply_op(x: np.ndarray) -> np.ndarray:
        return -epsilon * np.fft.ifft2(np.fft.fft2(x) * minus_k2).real + V * x

    def apply_prec(r: np.ndarray) -> np.ndarray:
        return np.fft.ifft2(np.fft.fft2(r) * inv_symbol).real

    x = np.zeros_like(b)
    r = b.copy()
    z = apply_prec(r)
    p = z.copy()
    rz = float(np.vdot(r, z).real)
    iterations = 0
    while iterations < cap:
        # Recursive-residual PCG with a true-residual check at candidate
        # convergence; restart direction if the recursion has drifted.
        Ap = apply_op(p)
        denom = float(np.vdot(p, Ap).real)
        if denom <= 0.0:
            raise NonPositivePotential("operator lost positive definiteness")
        alpha = rz / denom
        x = x + alpha * p
        r = r - alpha * Ap
        iterations += 1
        if float(np.linalg.norm(r)) <= target(float(np.linalg.norm(x))):
            true_r = b - apply_op(x)
            if float(np.linalg.norm(true_r)) <= target(float(np.linalg.norm(x))):
                return rhs._like(x)
            r = true_r
            z = apply_prec(r)
            p = z.copy()
            rz = float(np.vdot(r, z).real)
            continue
        z = apply_prec(r)
        rz_new = float(np.vdot(r, z).real)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NoConvergence(f"CG failed to reach tol={tol} within {cap} iterations")


# ---------------------------------------------------------------------------
# Smooth radial cutoffs


class _CutoffProfile:
    """Radial profile of the standard smooth bump.

    In the transition variable ``t = (r_outer - dist) / (r_outer - r_inner)``
    the profile is ``sigma(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})``, which
    vanishes to infinite order at the outer edge, equals 1 inside, and is
    asymptotically proportional to ``e^{-1/t}`` near the vanishing edge.
    Derivatives are evaluated in closed form so the profile can be probed
    far below floating-point noise floors of grid differentiation.
    """

    def __init__(self, r_inner: float, r_outer: float):
        self.r_inner = float(r_inner)
        self.r_outer = float(r_outer)
        self.width = self.r_outer - self.r_inner

    def _t(self, dist):
        return (self.r_outer - np.asarray(dist, dtype=np.float64)) / self.width

    @staticmethod
    def _sigma(t):
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros_like(t)
        out[t >= 1.0] = 1.0
        mid = (t > 0.0) & (t < 1.0)
        tm = t[mid]
        with np.errstate(over="ignore"):
            out[mid] = 1.0 / (1.0 + np.exp(1.0 / tm - 1.0 / (1.0 - tm)))
        return out

    def value(self, dist):
        return self._sigma(self._t(dist))

    def derivative(self, dist):
        """d(phi)/d(dist), exact."""
        t = self._t(dist)
        out = np.zeros_like(t)
        mid = (t > 0.0) & (t < 1.0)
        tm = t[mid]
        s = self._sigma(tm)
        hp = -1.0 / tm**2 - 1.0 / (1.0 - tm) ** 2
        # d/dt sigma = -h' * sigma * (1 - sigma); chain rule dt/ddist = -1/width
        out[mid] = hp * s * (1.0 - s) / self.width
        return out

    def second_derivative(self, dist):
        t = self._t(dist)
        out = np.zeros_like(t)
        mid = (t > 0.0) & (t < 1.0)
        tm = t[mid]
        s = self._sigma(tm)
        hp = -1.0 / tm**2 - 1.0 / (1.0 - tm) ** 2
        hpp = 2.0 / tm**3 - 2.0 / (1.0 - tm) ** 3
        st = -hp * s * (1.0 - s)
        stt = -hpp * s * (1.0 - s) - hp * st * (1.0 - 2.0 * s)
        out[mid] = stt / self.width**2
        return out


def cutoff_profile(r_inner: float, r_outer: float) -> _CutoffProfile:
    if not (0.0 < r_inner < r_outer):
        raise BadRadii(f"need 0 < r_inner < r_outer, got ({r_inner}, {r_outer})")
    return _CutoffProfile(r_inner, r_outer)


def bump_cutoff(
    geometry: TorusGeometry,
    grid: GridSpec,
    center: tuple[float, float],
    r_inner: float,
    r_outer: float,
) -> ScalarField:
    """Smooth bump: 1 on the r_inner disc, 0 outside the r_outer disc.

    Radii must satisfy ``0 < r_inner < r_outer < injectivity radius`` so
    the annulus embeds in the torus.
    """
    if not (0.0 < r_inner < r_outer < geometry.injectivity_radius):
        raise BadRadii(
            f"need 0 < r_inner < r_outer < {geometry.injectivity_radius}, "
            f"got ({r_inner}, {r_outer})"
        )
    prof = cutoff_profile(r_inner, r_outer)
    dist = torus_distance(geometry, grid, center)
    return ScalarField(geometry, grid, prof.value(dist))


def cutoff_ratio_sup(phi: ScalarField, alpha: float, floor: float = 1e-6) -> float:
    """Measured sup over grid samples of ``|grad phi|^2 / phi^alpha``.

    The gradient is spectral. Samples with ``phi <= floor`` are excluded:
    below the floor the true gradient underflows and the quotient would be
    differentiation noise divided by a vanishing power, not a measurement.
    Dropping them can only underestimate the supremum.
    """
    grad2 = gradient_magnitude(phi).values ** 2
    vals = phi.values
    sel = vals > floor
    if not sel.any():
        raise EmptyMask("no samples above the cutoff floor")
    return float(np.max(grad2[sel] / vals[sel] ** alpha))


# ---------------------------------------------------------------------------
# Spectral resampling between grids


def _resample_axis(vals: np.ndarray, axis: int, n_new: int) -> np.ndarray:
    n = vals.shape[axis]
    if n_new == n:
        return vals
    spec = np.fft.fft(vals, axis=axis)
    sl = [slice(None)] * vals.ndim

    def take(idx):
        s = list(sl)
        s[axis] = idx
        return tuple(s)

    out = np.zeros(
        tuple(n_new if a == axis else m for a, m in enumerate(vals.shape)),
        dtype=complex,
    )
    half = min(n, n_new) // 2
    out[take(slice(0, half))] = spec[take(slice(0, half))]
    out[take(slice(-half + 1 if half > 1 else n_new, None))] = spec[
        take(slice(-half + 1 if half > 1 else n, None))
    ]
    if n_new > n:
        # Split the old Nyquist mode between +/- half frequencies.
        out[take(half)] += 0.5 * spec[take(half)]
        out[take(-half)] += 0.5 * spec[take(half)]
    else:
        # Fold both source bands onto the new Nyquist mode.
        out[take(half)] = spec[take(half)] + spec[take(-half)]
    return np.fft.ifft(out, axis=axis) * (n_new / n)


def resample(f: ScalarField, new_grid: GridSpec) -> ScalarField:
    """Trigonometric interpolation of ``f`` onto another grid."""
    vals = f.values.astype(complex)
    vals = _resample_axis(vals, 0, new_grid.nx)
    vals = _resample_axis(vals, 1, new_grid.ny)
    return ScalarField(f.geometry, new_grid, vals.real)
