"""Closed-form stationary profiles and numerical residual checks.

Three constructions certify pinning or passage for the reduced stationary
problem  A[u] - mu * chi_{[-rho, rho]^n} + F0 = 0  on the torus:

  * a glued pair of circular arcs for the 1-d curvature operator,
  * a truncated double cosine series for the fractional operator on T^2,
  * a glued paraboloid for the Laplacian in n dimensions.

Each profile is sampled on a uniform grid together with validity flags
derived from explicit parameter inequalities.  `verify_viscosity_inequality`
re-checks the stationary residual with discrete operators, excluding a
band of two grid cells around the gluing set where the profiles are only
piecewise smooth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import IllDefinedProfileError, ValidationError
from .evolvers import apply_fractional
from .precipitates import grid_coords, ramp_profile

_FLAG_TOL = 1e-12


# --- circular arcs (curvature operator, n = 1) ------------------------------

@dataclass(frozen=True)
class ArcProfile:
    """Glued circle arcs: radius 1/(mu - F0) inside the obstacle, 1/F0 outside."""

    rho: float
    mu: float
    F0: float
    beta: float
    x: np.ndarray
    v: np.ndarray
    well_defined: bool
    supersolution: bool
    subsolution: bool
    amplitude_ok: bool
    oscillation_ok: bool

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.v)))

    @property
    def oscillation(self) -> float:
        return float(self.v.max() - self.v.min())


def arc_profile(rho, mu, F0, N, beta=0.5) -> ArcProfile:
    """Sample the two-arc profile on [-1, 1) and evaluate its validity flags.

    Raises IllDefinedProfileError outside the window
    mu - 1/rho <= F0 <= 1/(1 - rho) where a radicand turns negative; flag
    combinations inside the window are regular return values.
    """
    if not (0.0 < rho < 1.0):
        raise ValidationError(f"rho must lie in (0, 1): got {rho}")
    if not (mu > F0 >= 0.0):
        raise ValidationError(f"need mu > F0 >= 0: got mu = {mu}, F0 = {F0}")
    if F0 < mu - 1.0 / rho - _FLAG_TOL or (F0 > 0 and F0 > 1.0 / (1.0 - rho) + _FLAG_TOL):
        raise IllDefinedProfileError(
            f"arc radicand negative: F0 = {F0} outside [{mu - 1 / rho}, {1 / (1 - rho)}]")
    x = grid_coords(int(N))
    ax = np.abs(x)
    inner = ax <= rho
    r_in = 1.0 / (mu - F0)
    v = np.empty_like(x)
    v[inner] = -np.sqrt(np.maximum(r_in ** 2 - x[inner] ** 2, 0.0)) \
        + np.sqrt(max(r_in ** 2 - rho ** 2, 0.0))
    if F0 > 0:
        r_out = 1.0 / F0
        v[~inner] = np.sqrt(np.maximum(r_out ** 2 - (1.0 - ax[~inner]) ** 2, 0.0)) \
            - np.sqrt(max(r_out ** 2 - (1.0 - rho) ** 2, 0.0))
    else:
        v[~inner] = 0.0
    osc_rhs = np.inf
    if rho < 0.5:
        osc_rhs = (4.0 * rho ** (1.0 - beta) - 4.0 * rho - mu * rho ** 2) / (1.0 - 2.0 * rho)
    return ArcProfile(
        rho=rho, mu=mu, F0=F0, beta=beta, x=x, v=v,
        well_defined=True,
        supersolution=bool(F0 <= rho * mu + _FLAG_TOL),
        subsolution=bool(F0 >= rho * mu - _FLAG_TOL),
        amplitude_ok=bool(mu - 2.0 / rho - _FLAG_TOL <= F0
                          <= 2.0 * rho / (1.0 - rho) ** 2 + _FLAG_TOL),
        oscillation_ok=bool(F0 < osc_rhs),
    )


# --- cosine series (fractional operator, n = 2) ------------------------------

@dataclass(frozen=True)
class FourierProfile:
    """Truncated series solving the fractional problem on the retained modes.

    coeffs[i, j] multiplies cos(pi (i+1) x1 + pi (j+1) x2); sine
    coefficients vanish by symmetry.  tail_bound is a rigorous upper bound
    on the sum of all dropped |coefficients|.
    """

    alpha: float
    rho: float
    F1: float
    F2: float
    n_max: int
    coeffs: np.ndarray
    grid_N: int
    u: np.ndarray
    tail_bound: float

    @property
    def mu(self) -> float:
        return self.F1 + self.F2

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.u)))

    @property
    def grid_mean(self) -> float:
        return float(self.u.mean())


def fourier_coefficients(alpha, rho, total, n_max) -> np.ndarray:
    """Cosine coefficients -4 total sin(pi n rho) sin(pi m rho) / (pi^(2+2a) (n^2+m^2)^a n m)."""
    n = np.arange(1, n_max + 1, dtype=float)
    sin_n = np.sin(np.pi * n * rho)
    lam_pow = (n[:, None] ** 2 + n[None, :] ** 2) ** alpha
    return (-4.0 * total / np.pi ** (2.0 + 2.0 * alpha)
            * np.outer(sin_n / n, sin_n / n) / lam_pow)


def coefficient_tail_bound(alpha, total, n_max) -> float:
    """Bound on the dropped part of the absolute coefficient sum.

    Uses (n^2 + m^2)^a >= (2 n m)^a and integral comparison of the
    resulting (n m)^(-1-a) double tail.
    """
    tail_1d = n_max ** (-alpha) / alpha
    full_1d = 1.0 + 1.0 / alpha
    return (4.0 * abs(total) / np.pi ** (2.0 + 2.0 * alpha)
            * 2.0 ** (-alpha) * 2.0 * tail_1d * full_1d)


def synthesize_cos_series(coeffs: np.ndarray, grid_N: int) -> np.ndarray:
    """Evaluate sum c[n-1, m-1] cos(pi n x1 + pi m x2) on the periodic grid.

    The grid starts at -1, so mode (n, m) carries a parity phase
    (-1)^(n+m) relative to the raw DFT bins.
    """
    K = coeffs.shape[0]
    if 2 * K >= grid_N:
        raise ValidationError(f"grid_N = {grid_N} too small for {K} retained modes")
    sign = np.outer((-1.0) ** np.arange(1, K + 1), (-1.0) ** np.arange(1, K + 1))
    half = 0.5 * coeffs * sign * grid_N ** 2
    spec = np.zeros((grid_N, grid_N), dtype=complex)
    spec[1:K + 1, 1:K + 1] = half
    neg = grid_N - np.arange(1, K + 1)
    spec[np.ix_(neg, neg)] = half
    return np.fft.ifft2(spec).real


def extract_cos_coefficients(u: np.ndarray, n_max: int) -> np.ndarray:
    """Inverse of synthesize_cos_series on the retained (n, m >= 1) block."""
    N = u.shape[0]
    spec = np.fft.fft2(u)[1:n_max + 1, 1:n_max + 1]
    sign = np.outer((-1.0) ** np.arange(1, n_max + 1), (-1.0) ** np.arange(1, n_max + 1))
    return 2.0 * spec.real * sign / N ** 2


def fourier_profile(alpha, rho, mu, n_max=256, grid_N=None,
                    tail_tol: Optional[float] = None) -> FourierProfile:
    """Series profile with the force split F2 = mu rho^2, F1 = mu - F2.

    That split makes F2 - (F1 + F2) chi_{[-rho, rho]^2} average to zero
    over the period, which is what the zero-mean series solves.
    """
    if not (0.5 <= alpha < 1.0):
        raise ValidationError(f"alpha must lie in [1/2, 1): got {alpha}")
    if not (0.0 < rho < 1.0):
        raise ValidationError(f"rho must lie in (0, 1): got {rho}")
    if mu <= 0:
        raise ValidationError(f"mu must be positive: got {mu}")
    n_max = int(n_max)
    F2 = mu * rho ** 2
    F1 = mu - F2
    tail = coefficient_tail_bound(alpha, mu, n_max)
    if tail_tol is not None and tail > tail_tol:
        raise ValidationError(
            f"n_max = {n_max} leaves a coefficient tail {tail:.3g} > tail_tol = {tail_tol:.3g}")
    if grid_N is None:
        grid_N = max(128, 2 * n_max + 2)
    coeffs = fourier_coefficients(alpha, rho, mu, n_max)
    u = synthesize_cos_series(coeffs, int(grid_N))
    return FourierProfile(alpha=alpha, rho=rho, F1=F1, F2=F2, n_max=n_max,
                          coeffs=coeffs, grid_N=int(grid_N), u=u, tail_bound=tail)


# --- glued paraboloid (Laplacian, n = 1, 2, 3) -------------------------------

@dataclass(frozen=True)
class ParaboloidProfile:
    """Piecewise-quadratic profile: paraboloid in the obstacle cube, matched
    radially outside.  For n = 1 it solves the reduced problem exactly away
    from the gluing points; the weak_solution flag records the matched-flux
    force F0 = mu rho^n."""

    n: int
    rho: float
    mu: float
    F0: float
    u: np.ndarray
    weak_solution: bool
    amplitude_ok: bool

    @property
    def center_value(self) -> float:
        return -(self.mu - self.F0) * self.rho ** 2 / (2.0 * self.n)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.u)))


def paraboloid_profile(n, rho, mu, F0, N) -> ParaboloidProfile:
    if n not in (1, 2, 3):
        raise ValidationError(f"n must be 1, 2 or 3: got {n}")
    if not (mu > F0 > 0.0):
        raise ValidationError(f"need mu > F0 > 0: got mu = {mu}, F0 = {F0}")
    if not (0.0 < rho < 1.0):
        raise ValidationError(f"rho must lie in (0, 1): got {rho}")
    x = grid_coords(int(N))
    mesh = np.meshgrid(*([x] * n), indexing="ij")
    r = np.sqrt(sum(g ** 2 for g in mesh))
    inner = np.ones_like(r, dtype=bool)
    for g in mesh:
        inner &= np.abs(g) <= rho
    u = np.where(inner,
                 (mu - F0) / (2.0 * n) * (r ** 2 - rho ** 2),
                 F0 / (2.0 * n) * ((1.0 - rho) ** 2 - (1.0 - r) ** 2))
    amplitude_ok = F0 < min(mu + 2.0 * n / rho, 2.0 * n * rho / (1.0 - rho) ** 2)
    weak = abs(F0 - mu * rho ** n) <= _FLAG_TOL * max(1.0, mu)
    return ParaboloidProfile(n=int(n), rho=rho, mu=mu, F0=F0, u=u,
                             weak_solution=bool(weak), amplitude_ok=bool(amplitude_ok))


# --- ramped obstacle column for stationary experiments -----------------------

class ObstacleColumn:
    """Potential mu * (ramped indicator of [-rho, rho]^n), independent of height.

    Plays the role of the reduced obstacle term when a closed-form profile
    is loaded into an evolver: the stationary constructions assume the
    obstacle acts at every height the profile visits.
    """

    def __init__(self, n, N, mu, rho, ramp_width):
        if ramp_width <= 0:
            raise ValidationError(f"ramp_width must be positive: got {ramp_width}")
        x = grid_coords(int(N))
        axis = ramp_profile(np.abs(x), rho, ramp_width)
        values = axis
        for _ in range(n - 1):
            values = np.multiply.outer(values, axis)
        self.values = mu * values
        self.lipschitz_bound = 0.0  # no height dependence

    def at_heights(self, u):
        return self.values

    def lowest_face_above(self, height):
        return height  # obstacle present at every height: never fast-forward


# --- residual verification ----------------------------------------------------

@dataclass(frozen=True)
class ResidualReport:
    """Sign violations of the stationary residual A[u] - mu chi + F0."""

    equation: str
    n_checked: int
    n_super_violations: int  # residual > +tol (breaks the supersolution side)
    n_sub_violations: int    # residual < -tol (breaks the subsolution side)
    max_residual: float
    min_residual: float
    tolerance: float
    note: str = ""

    @property
    def clean_supersolution(self) -> bool:
        return self.n_super_violations == 0

    @property
    def clean_subsolution(self) -> bool:
        return self.n_sub_violations == 0


def _report(equation, residual, mask, tol, note=""):
    vals = residual[mask]
    return ResidualReport(
        equation=equation, n_checked=int(mask.sum()),
        n_super_violations=int(np.count_nonzero(vals > tol)),
        n_sub_violations=int(np.count_nonzero(vals < -tol)),
        max_residual=float(vals.max()), min_residual=float(vals.min()),
        tolerance=tol, note=note)


def verify_viscosity_inequality(profile, equation, mu, rho, F0,
                                tolerance=1e-6) -> ResidualReport:
    """Evaluate the stationary residual of a sampled profile with discrete
    operators, skipping two grid cells around the gluing set.

    equation: "mean_curvature" (arc), "fractional" (series; residual taken
    against the obstacle projected on the retained modes, which is the
    sense in which the truncated series is exact), or "laplacian".
    """
    if equation == "mean_curvature":
        v, x = profile.v, profile.x
        h = x[1] - x[0]
        vp, vm = np.roll(v, -1), np.roll(v, 1)
        vx = (vp - vm) / (2.0 * h)
        vxx = (vp - 2.0 * v + vm) / (h * h)
        curvature = vxx / (1.0 + vx * vx) ** 1.5
        chi = (np.abs(x) <= rho).astype(float)
        residual = curvature - mu * chi + F0
        mask = np.abs(np.abs(x) - rho) > 2.0 * h
        return _report(equation, residual, mask, tolerance)

    if equation == "fractional":
        # g = F0 - mu chi restricted to the retained cosine modes; the series
        # is exact there, so lam^alpha u must reproduce these coefficients
        k = np.arange(1, profile.n_max + 1, dtype=float)
        lam_alpha = (np.pi ** 2 * (k[:, None] ** 2 + k[None, :] ** 2)) ** profile.alpha
        g_proj = synthesize_cos_series(profile.coeffs * lam_alpha, profile.grid_N)
        residual = -apply_fractional(profile.u, profile.alpha) + g_proj
        mask = np.ones_like(residual, dtype=bool)
        return _report(equation, residual, mask, tolerance,
                       note="residual against the mode-projected obstacle")

    if equation == "laplacian":
        u, n = profile.u, profile.n
        N = u.shape[0]
        h = 2.0 / N
        lap = -2.0 * n * u
        for axis in range(n):
            lap += np.roll(u, 1, axis=axis) + np.roll(u, -1, axis=axis)
        lap /= h * h
        x = grid_coords(N)
        mesh = np.meshgrid(*([x] * n), indexing="ij")
        chi = np.ones_like(u, dtype=bool)
        for g in mesh:
            chi &= np.abs(g) <= rho
        residual = lap - mu * chi.astype(float) + F0
        sup_norm = np.maximum.reduce([np.abs(g) for g in mesh])
        mask = (np.abs(sup_norm - rho) > 2.0 * h) & (sup_norm < 1.0 - 2.0 * h)
        return _report(equation, residual, mask, tolerance)

    raise ValidationError(f"unknown equation {equation!r}")
