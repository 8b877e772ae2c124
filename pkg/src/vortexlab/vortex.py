"""Divisor-prescribed vortices on flat tori and their adiabatic limits.

Three gauge-theoretic models are reduced to the scalar equation solved by
:mod:`vortexlab.kw`. Writing ``u_D`` for the divisor potential and ``d``
for the relevant degree, a unitary connection with curvature function
``iLF`` (the contraction of the curvature with the area form) satisfies

    iLF = -1/2 laplacian(f) + 2 pi d / volume

whenever the gauge degrees of freedom are absorbed into a real field ``f``
relative to the divisor background. The three reductions:

* classical:  ``eps^2 iLF = 1 - |phi|^2`` with ``|phi|^2 = e^{u_D} e^{v}``
  becomes ``-eps^2 lap(v) + 2 e^{u_D} e^{v} + (4 pi d eps^2 / vol - 2) = 0``,
  i.e. a one-sided problem with epsilon = eps^2; solvable iff
  ``2 pi d eps^2 < volume``.
* mixed pair: ``eps^2 iLF + |phi1|^2 - |phi2|^2 + tau = 0`` with
  ``|phi1|^2 = P e^{f}``, ``|phi2|^2 = Q e^{-f}`` becomes
  ``-(eps^2/2) lap(f) + P e^{f} - Q e^{-f} + (2 pi d eps^2 / vol + tau) = 0``.
* generalized: ``eps^2 iLF + sum_j k_j |phi^j|^2 + tau = 0`` with
  ``|phi^j|^2 = P_j e^{k_j f}`` becomes the multi-exponent problem with
  plus terms ``(k_j P_j, k_j)`` for positive weights and minus terms
  ``(|k_j| P_j, |k_j|)`` for negative ones. Solutions exist only when the
  weights have mixed signs, or are all positive with ``tau < 0``.

Integrating each curvature equation over the torus gives the identities
checked by :func:`integral_identities`; as epsilon decreases the curvature
concentrates near the divisor points with calculable masses, measured by
:func:`curvature_mass` through smooth bump windows.
"""

from __future__ import annotations

import dataclasses
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BradlowViolation,
    DegenerateFit,
    OverlappingBump,
    Unsolvable,
    VortexLabError,
)
from .fields import (
    GridSpec,
    RegionMask,
    ScalarField,
    TorusGeometry,
    bump_cutoff,
    constant_field,
    gradient_magnitude,
    integrate,
    laplacian,
    lp_norm,
    resample,
    sample_at,
    sup_norm,
)
from .greens import Divisor, divisor_potential, vanishing_density, _green_from_xy
from .kw import (
    ContinuationSchedule,
    KWProblem,
    KWSolution,
    SolverConfig,
    kw_limit,
    kw_solve,
    schedule_check_grid,
)

__all__ = [
    "ClassicalVortexSpec",
    "MixedVortexSpec",
    "GeneralizedTerm",
    "GeneralizedSpec",
    "Reconstruction",
    "DiagnosticsReport",
    "PointInfo",
    "SweepReport",
    "SweepOptions",
    "reduce_classical",
    "reduce_mixed",
    "reduce_generalized",
    "reduce_any",
    "reconstruct",
    "solve_and_report",
    "curvature_mass",
    "vanishing_order_fit",
    "integral_identities",
    "adiabatic_sweep",
    "default_bump_radii",
    "mixed_limit_phi_sq",
    "diagnostics_report",
    "worker_count",
]


def worker_count() -> int:
    """Thread cap for per-point diagnostics, from VORTEXLAB_THREADS."""
    raw = os.environ.get("VORTEXLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


# ---------------------------------------------------------------------------
# Specs


def _require_effective(divisor: Divisor, name: str) -> None:
    if any(m <= 0 for m in divisor.multiplicities):
        raise ValueError(f"{name} must have positive multiplicities")


@dataclass(frozen=True)
class ClassicalVortexSpec:
    """Abelian vortex data: effective divisor, scale epsilon > 0.

    Construction enforces the volume (Bradlow) admissibility
    ``2 pi d eps^2 < volume``, necessary for a solution with a
    non-vanishing section; it is exactly the balance condition of the
    reduced scalar problem.
    """

    geometry: TorusGeometry
    grid: GridSpec
    divisor: Divisor
    epsilon: float

    def __post_init__(self):
        _require_effective(self.divisor, "classical divisor")
        self.divisor.check_separated(self.geometry)
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        d = self.divisor.degree
        lhs = 2.0 * math.pi * d * self.epsilon**2
        if lhs >= self.geometry.volume:
            raise BradlowViolation(
                f"Bradlow: 2 pi d eps^2 = {lhs:.6g} >= volume = "
                f"{self.geometry.volume:.6g}"
            )

    @property
    def degree(self) -> int:
        return self.divisor.degree


@dataclass(frozen=True)
class MixedVortexSpec:
    """Two-component data with opposite charges.

    ``divisor_plus`` and ``divisor_minus`` prescribe the zeros of the two
    components (both effective; they may share points). ``scale_plus`` and
    ``scale_minus`` fix the size of the vanishing densities P and Q:
    their means by default, their L2 norms with ``normalization="l2"``.
    ``degree`` is the line-bundle degree entering the background
    curvature; it defaults to (deg_plus - deg_minus)/2 and a mismatch with
    that bookkeeping only warns, since twisted models can shift it.
    """

    geometry: TorusGeometry
    grid: GridSpec
    divisor_plus: Divisor
    divisor_minus: Divisor
    tau: float = 0.0
    scale_plus: float = 1.0
    scale_minus: float = 1.0
    epsilon: float = 0.0
    degree: Fraction | None = None
    normalization: str = "mean"

    def __post_init__(self):
        _require_effective(self.divisor_plus, "divisor_plus")
        _require_effective(self.divisor_minus, "divisor_minus")
        self.divisor_plus.check_separated(self.geometry)
        self.divisor_minus.check_separated(self.geometry)
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if not (self.scale_plus > 0 and self.scale_minus > 0):
            raise ValueError("scales must be positive")
        if self.normalization not in ("mean", "l2"):
            raise ValueError("normalization must be 'mean' or 'l2'")
        default = Fraction(self.divisor_plus.degree - self.divisor_minus.degree, 2)
        if self.degree is None:
            object.__setattr__(self, "degree", default)
        elif Fraction(self.degree) != default:
            warnings.warn(
                f"degree {self.degree} differs from (deg+ - deg-)/2 = {default}",
                stacklevel=2,
            )
            object.__setattr__(self, "degree", Fraction(self.degree))
        else:
            object.__setattr__(self, "degree", Fraction(self.degree))


@dataclass(frozen=True)
class GeneralizedTerm:
    divisor: Divisor
    weight: int
    scale: float = 1.0

    def __post_init__(self):
        if int(self.weight) == 0:
            raise ValueError("weight must be nonzero")
        object.__setattr__(self, "weight", int(self.weight))
        _require_effective(self.divisor, "term divisor")
        if not self.scale > 0:
            raise ValueError("scale must be positive")


@dataclass(frozen=True)
class GeneralizedSpec:
    """Multi-component data with integer weights.

    Solvability dichotomy: the weights must have mixed signs, or all be
    positive with ``tau < 0``; otherwise construction raises
    :class:`Unsolvable`. ``degree`` defaults to the least-squares
    bookkeeping ``sum(k_j d_j) / sum(k_j^2)`` matching the mixed-pair
    convention for weights (1, -1).
    """

    geometry: TorusGeometry
    grid: GridSpec
    terms: tuple[GeneralizedTerm, ...]
    tau: float = 0.0
    epsilon: float = 0.0
    degree: Fraction | None = None

    def __post_init__(self):
        if not self.terms:
            raise ValueError("need at least one term")
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            t.divisor.check_separated(self.geometry)
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        weights = [t.weight for t in self.terms]
        mixed = any(k > 0 for k in weights) and any(k < 0 for k in weights)
        if not mixed and not (all(k > 0 for k in weights) and self.tau < 0):
            raise Unsolvable(
                "weights must have mixed signs, or all be positive with tau < 0"
            )
        if self.degree is None:
            num = sum(t.weight * t.divisor.degree for t in self.terms)
            den = sum(t.weight**2 for t in self.terms)
            object.__setattr__(self, "degree", Fraction(num, den))
        else:
            object.__setattr__(self, "degree", Fraction(self.degree))


# ---------------------------------------------------------------------------
# Reductions to KW problems (coefficient fields cached per geometry/grid)


@lru_cache(maxsize=16)
def _density_data(geometry, grid, divisor, scale, normalize):
    """Potential u_D, density rho = c * exp(u_D), and log c.

    ``normalize`` fixes the meaning of ``scale``: with "mean" the density
    has mean ``scale``, with "l2" it has L2 norm ``scale``, and with
    ``False`` the raw multiple ``scale * exp(u_D)`` is used.
    """
    pot = divisor_potential(divisor, geometry, grid)
    e = np.exp(pot.u.values)
    if normalize == "mean":
        c = scale / float(e.mean())
    elif normalize == "l2":
        c = scale / math.sqrt(float(np.mean(e * e)) * geometry.volume)
    else:
        c = scale
    density = vanishing_density(pot, c)
    return pot, density, math.log(c)


def reduce_classical(spec: ClassicalVortexSpec) -> KWProblem:
    """One-sided problem for the gauge-fixed log-density relative to u_D.

    Raises :class:`BradlowViolation` when ``2 pi d eps^2 >= volume``: the
    balance condition of the reduced problem fails exactly there.
    """
    vol = spec.geometry.volume
    d = spec.degree
    if 2.0 * math.pi * d * spec.epsilon**2 >= vol:
        raise BradlowViolation(
            f"Bradlow: 2 pi d eps^2 = {2 * math.pi * d * spec.epsilon ** 2:.6g} "
            f">= volume = {vol:.6g}"
        )
    _, density, _ = _density_data(
        spec.geometry, spec.grid, spec.divisor, 2.0, False
    )
    w = constant_field(
        spec.geometry,
        spec.grid,
        4.0 * math.pi * spec.epsilon**2 * d / vol - 2.0,
    )
    return KWProblem(
        epsilon=spec.epsilon**2,
        plus_terms=((density, 1.0),),
        minus_terms=(),
        w=w,
    )


def reduce_mixed(spec: MixedVortexSpec) -> KWProblem:
    """Two-sided problem with coefficients P, Q of prescribed mean."""
    vol = spec.geometry.volume
    _, P, _ = _density_data(
        spec.geometry, spec.grid, spec.divisor_plus, spec.scale_plus, spec.normalization
    )
    _, Q, _ = _density_data(
        spec.geometry, spec.grid, spec.divisor_minus, spec.scale_minus, spec.normalization
    )
    w = constant_field(
        spec.geometry,
        spec.grid,
        2.0 * math.pi * float(spec.degree) * spec.epsilon**2 / vol + spec.tau,
    )
    return KWProblem(
        epsilon=0.5 * spec.epsilon**2,
        plus_terms=((P, 1.0),),
        minus_terms=((Q, 1.0),),
        w=w,
    )


def reduce_generalized(spec: GeneralizedSpec) -> KWProblem:
    """Multi-exponent problem; weight k_j appears in both the coefficient
    (k_j P_j) and the exponent, so integrating the equation reproduces the
    weighted-mass identity exactly."""
    vol = spec.geometry.volume
    plus = []
    minus = []
    for t in spec.terms:
        _, P, _ = _density_data(spec.geometry, spec.grid, t.divisor, t.scale, "mean")
        k = t.weight
        if k > 0:
            plus.append((P * float(k), float(k)))
        else:
            minus.append((P * float(-k), float(-k)))
    if not minus and not spec.tau < 0:
        raise Unsolvable("all-positive weights need tau < 0")
    w = constant_field(
        spec.geometry,
        spec.grid,
        2.0 * math.pi * float(spec.degree) * spec.epsilon**2 / vol + spec.tau,
    )
    return KWProblem(
        epsilon=0.5 * spec.epsilon**2,
        plus_terms=tuple(plus),
        minus_terms=tuple(minus),
        w=w,
    )


def reduce_any(spec) -> KWProblem:
    if isinstance(spec, ClassicalVortexSpec):
        return reduce_classical(spec)
    if isinstance(spec, MixedVortexSpec):
        return reduce_mixed(spec)
    if isinstance(spec, GeneralizedSpec):
        return reduce_generalized(spec)
    raise TypeError(f"not a vortex spec: {type(spec)!r}")


# ---------------------------------------------------------------------------
# Reconstruction of gauge quantities


@dataclass
class Reconstruction:
    """Gauge data recovered from a solved scalar field.

    ``phi_sq`` lists the pointwise squared component magnitudes;
    ``curvature`` is the curvature function iLF (for the classical model
    the algebraic form ``(1 - |phi|^2)/eps^2``, whose geometric
    counterpart is kept in ``curvature_crosscheck``). At epsilon = 0 the
    curvature is a measure, not a function, and is omitted.
    """

    phi_sq: list[ScalarField]
    curvature: ScalarField | None
    curvature_crosscheck: ScalarField | None = None


def _exp_log_product(logc: float, u: np.ndarray, shift: np.ndarray) -> np.ndarray:
    # exp(logc + u + shift) with divisor-point sentinels flushing to 0.
    return np.exp(logc + u + shift)


def reconstruct(spec, f: ScalarField) -> Reconstruction:
    """Recover |phi|^2 fields and the curvature function from ``f``.

    ``f`` should solve the reduced problem of ``spec`` (at epsilon = 0,
    the limit profile from :func:`vortexlab.kw.kw_limit`).
    """
    geometry, grid = spec.geometry, spec.grid
    vol = geometry.volume
    if isinstance(spec, ClassicalVortexSpec):
        pot, _, _ = _density_data(geometry, grid, spec.divisor, 2.0, False)
        phi_sq = ScalarField(
            geometry, grid, _exp_log_product(0.0, pot.u.values, f.values)
        )
        curv_alg = (1.0 - phi_sq) * (1.0 / spec.epsilon**2)
        curv_geom = (
            constant_field(geometry, grid, 2.0 * math.pi * spec.degree / vol)
            - 0.5 * laplacian(f)
        )
        return Reconstruction([phi_sq], curv_alg, curv_geom)

    if isinstance(spec, MixedVortexSpec):
        potp, _, logcp = _density_data(
            geometry, grid, spec.divisor_plus, spec.scale_plus, spec.normalization
        )
        potm, _, logcm = _density_data(
            geometry, grid, spec.divisor_minus, spec.scale_minus, spec.normalization
        )
        if spec.epsilon == 0:
            # Limit profiles: both components collapse onto sqrt(P Q),
            # evaluated stably in log space (sentinels flush to zero).
            half = 0.5 * (potp.u.values + potm.u.values)
            vals = _exp_log_product(0.5 * (logcp + logcm), half, np.zeros_like(half))
            phi1 = ScalarField(geometry, grid, vals)
            return Reconstruction([phi1, phi1._like(vals.copy())], None)
        phi1 = ScalarField(
            geometry, grid, _exp_log_product(logcp, potp.u.values, f.values)
        )
        phi2 = ScalarField(
            geometry, grid, _exp_log_product(logcm, potm.u.values, -f.values)
        )
        curv = (
            constant_field(geometry, grid, 2.0 * math.pi * float(spec.degree) / vol)
            - 0.5 * laplacian(f)
        )
        return Reconstruction([phi1, phi2], curv)

    if isinstance(spec, GeneralizedSpec):
        comps = []
        for t in spec.terms:
            pot, _, logc = _density_data(geometry, grid, t.divisor, t.scale, "mean")
            comps.append(
                ScalarField(
                    geometry,
                    grid,
                    _exp_log_product(logc, pot.u.values, t.weight * f.values),
                )
            )
        if spec.epsilon == 0:
            return Reconstruction(comps, None)
        curv = (
            constant_field(geometry, grid, 2.0 * math.pi * float(spec.degree) / vol)
            - 0.5 * laplacian(f)
        )
        return Reconstruction(comps, curv)

    raise TypeError(f"not a vortex spec: {type(spec)!r}")


# ---------------------------------------------------------------------------
# Diagnostics


def default_bump_radii(epsilon: float, spacing: float) -> tuple[float, float]:
    """Mass-window radii tied to the core scale and the grid."""
    return 3.0 * epsilon + 4.0 * spacing, 6.0 * epsilon + 8.0 * spacing


def _torus_point_distance(geometry: TorusGeometry, p, q) -> float:
    dx = abs(p[0] - q[0]) % geometry.length_x
    dy = abs(p[1] - q[1]) % geometry.length_y
    dx = min(dx, geometry.length_x - dx)
    dy = min(dy, geometry.length_y - dy)
    return math.hypot(dx, dy)


def curvature_mass(
    curvature: ScalarField,
    center: tuple[float, float],
    r_inner: float,
    r_outer: float,
    other_points: Sequence[tuple[float, float]] = (),
) -> float:
    """Bump-windowed curvature integral divided by 2 pi.

    The window must separate ``center`` from every point in
    ``other_points``; otherwise the measured mass would mix cores.
    """
    for q in other_points:
        dist = _torus_point_distance(curvature.geometry, center, q)
        if dist <= r_outer:
            raise OverlappingBump(
                f"point {q} lies within r_outer={r_outer:.4g} of {center}"
            )
    bump = bump_cutoff(curvature.geometry, curvature.grid, center, r_inner, r_outer)
    return integrate(bump * curvature) / (2.0 * math.pi)


def vanishing_order_fit(
    phi_sq,
    center: tuple[float, float],
    r_min: float,
    r_max: float,
    n_samples: int = 12,
    n_angles: int = 32,
) -> float:
    """Least-squares vanishing order of |phi| at ``center``.

    Samples ``phi_sq`` (a ScalarField, interpolated trigonometrically, or
    a callable mapping an (M, 2) point array to values) on ``n_samples``
    log-spaced circles, angularly averages, and fits the slope of
    ``log sqrt(phi_sq)`` against ``log r``. For grid fields ``r_min`` must
    stay at or above two grid cells, where interpolation is trustworthy;
    rings whose average underflows to zero are dropped from the fit.
    """
    if not (0.0 < r_min < r_max):
        raise ValueError("need 0 < r_min < r_max")
    if n_samples < 2:
        raise DegenerateFit("need at least two radii")
    if isinstance(phi_sq, ScalarField):
        hx, hy = phi_sq.grid.spacing(phi_sq.geometry)
        if r_min < 2.0 * max(hx, hy):
            raise ValueError("r_min below two grid cells for a sampled field")
        if r_max >= phi_sq.geometry.injectivity_radius:
            raise ValueError("r_max must stay below the injectivity radius")
        evaluate = lambda pts: sample_at(phi_sq, pts)
    elif callable(phi_sq):
        evaluate = phi_sq
    else:
        raise TypeError("phi_sq must be a ScalarField or a callable")

    radii = np.exp(np.linspace(math.log(r_min), math.log(r_max), n_samples))
    angles = np.arange(n_angles) * (2.0 * np.pi / n_angles)
    pts = np.empty((n_samples * n_angles, 2))
    for i, r in enumerate(radii):
        sl = slice(i * n_angles, (i + 1) * n_angles)
        pts[sl, 0] = center[0] + r * np.cos(angles)
        pts[sl, 1] = center[1] + r * np.sin(angles)
    vals = np.asarray(evaluate(pts), dtype=float).reshape(n_samples, n_angles)
    ring_means = vals.mean(axis=1)
    keep = np.isfinite(ring_means) & (ring_means > 0.0)
    if keep.sum() < 2:
        raise DegenerateFit("fewer than two usable rings; field underflows")
    y = 0.5 * np.log(ring_means[keep])
    x = np.log(radii[keep])
    slope = np.polyfit(x, y, 1)[0]
    return float(slope)


def integral_identities(spec, f: ScalarField) -> dict[str, float]:
    """Residuals of the integrated curvature equations.

    classical:    integral(1 - |phi|^2) - 2 pi d eps^2
    mixed:        (|phi1|_2^2 - |phi2|_2^2) + tau vol + 2 pi d eps^2
    generalized:  sum_j k_j |phi^j|_2^2 + tau vol + 2 pi d eps^2
    plus the total-curvature residual integral(iLF)/2pi - d when the
    curvature function is defined.
    """
    recon = reconstruct(spec, f)
    vol = spec.geometry.volume
    eps2 = spec.epsilon**2
    out: dict[str, float] = {}
    if isinstance(spec, ClassicalVortexSpec):
        deficit = integrate(1.0 - recon.phi_sq[0]) - 2.0 * math.pi * spec.degree * eps2
        out["bradlow"] = deficit
        out["identity"] = deficit
    elif isinstance(spec, MixedVortexSpec):
        out["identity"] = (
            integrate(recon.phi_sq[0])
            - integrate(recon.phi_sq[1])
            + spec.tau * vol
            + 2.0 * math.pi * float(spec.degree) * eps2
        )
    elif isinstance(spec, GeneralizedSpec):
        total = sum(
            t.weight * integrate(phi) for t, phi in zip(spec.terms, recon.phi_sq)
        )
        out["identity"] = total + spec.tau * vol + 2.0 * math.pi * float(spec.degree) * eps2
    else:
        raise TypeError(f"not a vortex spec: {type(spec)!r}")
    if recon.curvature is not None:
        deg = spec.degree if isinstance(spec, ClassicalVortexSpec) else float(spec.degree)
        out["chern"] = integrate(recon.curvature) / (2.0 * math.pi) - deg
    return out


def mixed_limit_phi_sq(spec: MixedVortexSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Closed-form evaluator of the epsilon = 0 profile sqrt(P Q).

    Works at arbitrary points through the Green's function sum, so order
    fits can probe radii below the grid scale without interpolation error.
    """
    _, _, logcp = _density_data(
        spec.geometry, spec.grid, spec.divisor_plus, spec.scale_plus, spec.normalization
    )
    _, _, logcm = _density_data(
        spec.geometry, spec.grid, spec.divisor_minus, spec.scale_minus, spec.normalization
    )
    geometry = spec.geometry
    lx, ly = geometry.length_x, geometry.length_y
    items = list(spec.divisor_plus) + list(spec.divisor_minus)

    def evaluate(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        acc = np.full(pts.shape[0], 0.5 * (logcp + logcm))
        for (px, py), m in items:
            dx = np.mod(pts[:, 0] - px + 0.5 * lx, lx) - 0.5 * lx
            dy = np.mod(pts[:, 1] - py + 0.5 * ly, ly) - 0.5 * ly
            acc += (2.0 * math.pi * m) * _green_from_xy(dx, dy, geometry, 32)
        return np.exp(acc)

    return evaluate


# ---------------------------------------------------------------------------
# Adiabatic sweeps


@dataclass(frozen=True)
class SweepOptions:
    """Diagnostic knobs for adiabatic sweeps."""

    mask_radius: float = 0.15
    bump_core_factors: tuple[float, float] = (3.0, 6.0)
    bump_grid_factors: tuple[float, float] = (4.0, 8.0)
    order_fit_radii: tuple[float, float] = (0.01, 0.05)
    order_fit_samples: tuple[int, int] = (12, 32)


@dataclass
class PointInfo:
    index: int
    point: tuple[float, float]
    m_plus: int
    m_minus: int
    expected_mass: float | None
    expected_order: float | None


@dataclass
class DiagnosticsReport:
    """Per-epsilon measurements against the adiabatic-limit predictions.

    ``curvature_masses`` holds one entry per divisor point (None when no
    valid bump window fits at this epsilon/grid); ``identity_residuals``
    the integrated-equation residuals; ``order_fits`` the fitted vanishing
    orders, filled only where requested (sweeps fit at the final stage).
    The ``sup_f``/``sup_grad_f``/``l2_exp_*`` columns are the uniform
    interior bound probes on the divisor-excluding region.
    """

    epsilon: float
    grid: GridSpec
    curvature_masses: list[float | None]
    sup_deviation: float
    identity_residuals: dict[str, float]
    order_fits: list[float | None]
    sup_f: float
    sup_grad_f: float
    l2_exp_plus: float
    l2_exp_minus: float
    iterations: int
    energy_history: list
    seconds: float = 0.0


@dataclass
class SweepReport:
    kind: str
    points: list[PointInfo]
    stages: list[DiagnosticsReport]
    order_fits: list[float | None] = dc_field(default_factory=list)
    skipped: list[dict] = dc_field(default_factory=list)
    error: dict | None = None
    final_solution: KWSolution | None = None
    final_reconstruction: Reconstruction | None = None
    final_spec: object | None = None

    def raise_if_failed(self) -> None:
        if self.error is not None:
            raise VortexLabError(
                f"sweep failed at epsilon={self.error.get('epsilon')}: "
                f"{self.error['type']}: {self.error['message']}"
            )


def _spec_points(spec) -> list[PointInfo]:
    """Merged divisor points with per-sign multiplicities."""
    merged: list[list] = []  # [point, m_plus, m_minus]

    def add(pt, m, sign):
        for entry in merged:
            if _torus_point_distance(spec.geometry, entry[0], pt) < 1e-9:
                entry[1 if sign > 0 else 2] += m
                return
        if sign > 0:
            merged.append([pt, m, 0])
        else:
            merged.append([pt, 0, m])

    if isinstance(spec, ClassicalVortexSpec):
        for pt, m in spec.divisor:
            add(pt, m, +1)
    elif isinstance(spec, MixedVortexSpec):
        for pt, m in spec.divisor_plus:
            add(pt, m, +1)
        for pt, m in spec.divisor_minus:
            add(pt, m, -1)
    else:
        for t in spec.terms:
            for pt, m in t.divisor:
                add(pt, m, +1 if t.weight > 0 else -1)

    infos = []
    for i, (pt, mp, mm) in enumerate(merged):
        if isinstance(spec, ClassicalVortexSpec):
            expected_mass: float | None = float(mp)
            expected_order: float | None = float(mp)
        elif isinstance(spec, MixedVortexSpec):
            expected_mass = 0.5 * (mp - mm)
            expected_order = 0.5 * (mp + mm)
        else:
            expected_mass = None
            expected_order = None
        infos.append(PointInfo(i, pt, mp, mm, expected_mass, expected_order))
    return infos


def _stage_masses(recon, points, epsilon, options, classical):
    """Per-point curvature masses; None where no valid window fits.

    Classical cores decay exponentially on scale epsilon, so the window
    shrinks with it: (a eps + ga h, b eps + gb h). Mixed/generalized
    cores spread on the slower scale eps^(2/3) (the coefficient fields
    vanish at the point, weakening the reaction term), so there the
    largest admissible stationary window is used instead: r_outer just
    inside the distance to the nearest other point or the injectivity
    radius, r_inner at half of it.
    """
    if recon.curvature is None:
        return [None] * len(points)
    geometry = recon.curvature.geometry
    hx, hy = recon.curvature.grid.spacing(geometry)
    h = max(hx, hy)
    a, b = options.bump_core_factors
    ga, gb = options.bump_grid_factors

    def one(info: PointInfo):
        others = [p.point for p in points if p.index != info.index]
        if classical:
            r_inner = a * epsilon + ga * h
            r_outer = b * epsilon + gb * h
        else:
            reach = geometry.injectivity_radius
            for q in others:
                reach = min(reach, _torus_point_distance(geometry, info.point, q))
            r_outer = 0.95 * reach
            r_inner = 0.5 * r_outer
        try:
            return curvature_mass(recon.curvature, info.point, r_inner, r_outer, others)
        except (VortexLabError, ValueError):
            return None

    n_workers = min(worker_count(), max(1, len(points)))
    if n_workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            return list(pool.map(one, points))
    return [one(p) for p in points]


def _limit_field(spec) -> ScalarField | None:
    """Limit profile of the reduced problem on the spec's grid."""
    if isinstance(spec, ClassicalVortexSpec):
        return None
    zero_spec = dataclasses.replace(spec, epsilon=0.0)
    problem = reduce_any(zero_spec)
    return kw_limit(problem).f


def diagnostics_report(spec, solution: KWSolution, options: SweepOptions = SweepOptions()):
    """Single-epsilon diagnostics row; see :func:`adiabatic_sweep`."""
    points = _spec_points(spec)
    recon = reconstruct(spec, solution.f)
    mask = RegionMask.excluding_discs(
        spec.geometry, spec.grid, [p.point for p in points], options.mask_radius
    ) if points else RegionMask.full(spec.geometry, spec.grid)

    if isinstance(spec, ClassicalVortexSpec):
        deviation_field = 1.0 - recon.phi_sq[0]
    else:
        limit = _limit_field(spec)
        deviation_field = solution.f - limit
    sup_dev = sup_norm(deviation_field, mask)

    identities = integral_identities(spec, solution.f)
    masses = _stage_masses(
        recon, points, spec.epsilon, options, isinstance(spec, ClassicalVortexSpec)
    )
    f = solution.f
    expf = ScalarField(f.geometry, f.grid, np.exp(f.values))
    expmf = ScalarField(f.geometry, f.grid, np.exp(-f.values))
    stage = DiagnosticsReport(
        epsilon=spec.epsilon,
        grid=spec.grid,
        curvature_masses=masses,
        sup_deviation=sup_dev,
        identity_residuals=identities,
        order_fits=[None] * len(points),
        sup_f=sup_norm(f, mask),
        sup_grad_f=sup_norm(gradient_magnitude(f), mask),
        l2_exp_plus=lp_norm(expf, 2, mask),
        l2_exp_minus=lp_norm(expmf, 2, mask),
        iterations=solution.iterations,
        energy_history=list(solution.energy_history),
    )
    return stage, points, recon


def _final_order_fits(spec, recon, points, options) -> list[float | None]:
    r_min, r_max = options.order_fit_radii
    n_radii, n_angles = options.order_fit_samples
    fits: list[float | None] = []
    if isinstance(spec, MixedVortexSpec):
        evaluator = mixed_limit_phi_sq(dataclasses.replace(spec, epsilon=0.0))
        for info in points:
            try:
                fits.append(
                    vanishing_order_fit(
                        evaluator, info.point, r_min, r_max, n_radii, n_angles
                    )
                )
            except (VortexLabError, ValueError):
                fits.append(None)
    else:
        fits = [None] * len(points)
    return fits


def solve_and_report(
    spec,
    config: SolverConfig = SolverConfig(),
    options: SweepOptions = SweepOptions(),
    init: ScalarField | None = None,
) -> SweepReport:
    """Solve one spec and wrap the diagnostics as a one-stage report."""
    t0 = time.perf_counter()
    problem = reduce_any(spec)
    solution = kw_solve(problem, config, init=init)
    stage, points, recon = diagnostics_report(spec, solution, options)
    stage.seconds = time.perf_counter() - t0
    report = SweepReport(
        kind=_kind_name(spec),
        points=points,
        stages=[stage],
        final_solution=solution,
        final_reconstruction=recon,
        final_spec=spec,
    )
    report.order_fits = _final_order_fits(spec, recon, points, options)
    stage.order_fits = list(report.order_fits)
    return report


def adiabatic_sweep(
    spec_family: Callable[[float, GridSpec], object],
    schedule: ContinuationSchedule,
    config: SolverConfig = SolverConfig(),
    options: SweepOptions = SweepOptions(),
    progress: Callable[[DiagnosticsReport], None] | None = None,
) -> SweepReport:
    """Decreasing-epsilon study with warm starts and limit comparisons.

    ``spec_family(epsilon, grid)`` builds the stage spec on the grid the
    schedule's refinement rule picks. Per stage the report records the
    curvature masses at the divisor points, the sup-distance to the
    epsilon = 0 profile away from them (for the classical model, the
    deficit ``sup|1 - |phi|^2|``), the integral-identity residuals, and
    uniform-bound probes; vanishing orders are fitted once at the final
    stage.

    Stages whose spec is infeasible (e.g. the volume bound fails at a
    large epsilon) are recorded in ``report.skipped`` and the sweep moves
    on; a solver failure stops the sweep and is recorded in
    ``report.error`` with the completed stages kept.
    """
    report = SweepReport(kind="", points=[], stages=[])
    prev_f: ScalarField | None = None
    for eps in schedule.epsilons:
        t0 = time.perf_counter()
        try:
            grid = schedule.refine_rule(eps)
            spec = spec_family(eps, grid)
            if spec.grid != grid:
                raise ValueError("spec_family ignored the requested grid")
            schedule_check_grid(spec.geometry, grid, eps)
            report.kind = _kind_name(spec)
            problem = reduce_any(spec)
            init = resample(prev_f, grid) if prev_f is not None else None
            solution = kw_solve(problem, config, init=init)
            stage, points, recon = diagnostics_report(spec, solution, options)
            stage.seconds = time.perf_counter() - t0
            report.points = points
            report.stages.append(stage)
            prev_f = solution.f
            report.final_solution = solution
            report.final_reconstruction = recon
            report.final_spec = spec
            if progress is not None:
                progress(stage)
        except Unsolvable as exc:
            report.skipped.append(
                {"type": type(exc).__name__, "message": str(exc), "epsilon": eps}
            )
        except (VortexLabError, ValueError) as exc:
            report.error = {
                "type": type(exc).__name__,
                "message": str(exc),
                "epsilon": eps,
            }
            return report
    if report.final_spec is not None:
        report.order_fits = _final_order_fits(
            report.final_spec, report.final_reconstruction, report.points, options
        )
        report.stages[-1].order_fits = list(report.order_fits)
    return report


def _kind_name(spec) -> str:
    if isinstance(spec, ClassicalVortexSpec):
        return "classical"
    if isinstance(spec, MixedVortexSpec):
        return "mixed"
    return "generalized"
