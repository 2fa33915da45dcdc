"""Random precipitate configurations and their mollified pinning potentials.

The medium is a periodic strip: k transverse coordinates on the torus
[-1, 1)^k (period 2) plus one unbounded height coordinate y.  Each
precipitate is an axis-aligned bump of nominal half-side R: full strength
on a central plateau, decaying to zero through a C^1 cubic ramp, the whole
profile being a product of per-axis factors.  The bump is zero outside the
cube of half-side R around its center and delivers at least the nominal
lower strength on the retained inner plateau cube.

Geometry of one axis factor (distances d >= 0 from the center):

    1                     for d <= plateau
    s^2 (3 - 2 s)         for plateau < d < plateau + ramp,  s = (plateau+ramp-d)/ramp
    0                     for d >= plateau + ramp

with plateau = min(lam, 1 - epsilon) * R and ramp = epsilon * R, so the
support half-width plateau + ramp never exceeds R.  The cubic smoothstep
has maximal slope 1.5 / ramp, which makes the full potential Lipschitz
with constant 1.5 * max(strength) / (epsilon * R).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

PERIOD = 2.0


def torus_dist(a, b):
    """Distance on the circle of circumference 2 (coordinates in [-1, 1])."""
    d = np.abs(np.asarray(a, dtype=float) - b) % PERIOD
    return np.minimum(d, PERIOD - d)


def ramp_profile(dist, plateau, ramp):
    """Per-axis bump factor: 1 on the plateau, cubic smoothstep down to 0."""
    d = np.asarray(dist, dtype=float)
    s = np.clip((plateau + ramp - d) / ramp, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


def default_epsilon(lam: float) -> float:
    """Ramp-width fraction: half the available gap, or 0.25 when lam = 1."""
    return (1.0 - lam) / 2.0 if lam < 1.0 else 0.25


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationError(message)


@dataclass(frozen=True)
class PrecipitateConfig:
    """A sampled arrangement of precipitate centers on the strip.

    Invariants enforced at construction: all transverse coordinates lie in
    [-1, 1], successive heights are sorted and pairwise at least
    2 R^(1-beta) apart, and the first height is at least 2R so a flat
    interface started at zero sits below every obstacle.
    """

    R: float
    lam: float
    beta: float
    phi_lower: float
    phi_upper: float
    centers: np.ndarray  # (m, 3): x1, x2, y
    y_window: float
    seed: int

    def __post_init__(self):
        validate_parameters(R=self.R, lam=self.lam, beta=self.beta,
                            phi_lower=self.phi_lower, phi_upper=self.phi_upper)
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if centers.size == 0:
            centers = centers.reshape(0, 3)
        _require(centers.ndim == 2 and centers.shape[1] == 3,
                 "centers must be an (m, 3) array of (x1, x2, y)")
        object.__setattr__(self, "centers", centers)
        _require(bool(np.all(np.abs(centers[:, :2]) <= 1.0)),
                 "centers: transverse coordinates x1, x2 must lie in [-1, 1]")
        ys = centers[:, 2]
        if ys.size:
            _require(bool(np.all(ys >= 2.0 * self.R - 1e-12)),
                     "centers: heights must start at y >= 2R")
            gaps = np.diff(np.sort(ys))
            if gaps.size:
                _require(bool(np.all(gaps >= self.min_gap - 1e-12)),
                         "centers: heights closer than the minimum spacing 2 R^(1-beta)")

    @property
    def count(self) -> int:
        return self.centers.shape[0]

    @property
    def min_gap(self) -> float:
        return 2.0 * self.R ** (1.0 - self.beta)


def validate_parameters(*, R, lam, beta, phi_lower, phi_upper):
    _require(0.0 < R < 0.5, f"R must lie in (0, 1/2): got {R}")
    _require(0.0 < lam <= 1.0, f"lambda must lie in (0, 1]: got {lam}")
    _require(0.0 < beta < 1.0, f"beta must lie in (0, 1): got {beta}")
    _require(phi_lower > 0.0, f"phi_lower must be positive: got {phi_lower}")
    _require(phi_upper >= phi_lower,
             f"phi_upper must be >= phi_lower: got {phi_upper} < {phi_lower}")


def sample_config(seed, R, lam, beta, count, y_window) -> PrecipitateConfig:
    """Draw a precipitate configuration.

    Transverse coordinates are i.i.d. uniform on [-1, 1].  Heights are
    placed uniformly on [2R, y_window] by sequential rejection so that all
    pairwise gaps stay >= 2 R^(1-beta); the result is sorted.  The draw is
    deterministic for a fixed seed: the seed is split into independent
    streams for the transverse and height coordinates.
    """
    validate_parameters(R=R, lam=lam, beta=beta, phi_lower=1.0, phi_upper=1.0)
    _require(int(count) >= 1, f"count must be >= 1: got {count}")
    count = int(count)
    min_gap = 2.0 * R ** (1.0 - beta)
    lo, hi = 2.0 * R, float(y_window)
    _require(hi > lo, f"y_window must exceed 2R = {lo}: got {y_window}")
    _require((count - 1) * min_gap <= (hi - lo),
             f"y_window too small to place {count} centers with spacing {min_gap:.4g}")

    ss = np.random.SeedSequence(entropy=int(seed))
    rng_xy, rng_y = (np.random.default_rng(s) for s in ss.spawn(2))
    xy = rng_xy.uniform(-1.0, 1.0, size=(count, 2))

    ys: list[float] = []
    tries = 0
    while len(ys) < count:
        candidate = rng_y.uniform(lo, hi)
        tries += 1
        if all(abs(candidate - y) >= min_gap for y in ys):
            ys.append(candidate)
        elif tries > 1000 * count:
            raise ValidationError(
                f"y_window too small to place {count} centers with spacing {min_gap:.4g}"
                " (rejection sampling stalled)")
    order = np.argsort(ys)
    centers = np.column_stack([xy[order, 0], xy[order, 1], np.asarray(ys)[order]])
    return PrecipitateConfig(R=R, lam=lam, beta=beta, phi_lower=1.0, phi_upper=1.0,
                             centers=centers, y_window=float(y_window), seed=int(seed))


def with_strength_bounds(config: PrecipitateConfig, phi_lower, phi_upper) -> PrecipitateConfig:
    """Copy of a sampled config with different pinning-strength bounds."""
    return dataclasses.replace(config, phi_lower=float(phi_lower), phi_upper=float(phi_upper))


@dataclass(frozen=True)
class PinningField:
    """Evaluable mollified potential over the strip.

    `strengths[i]` is the peak value of bump i and lies in
    [phi_lower, phi_upper].  Evaluation is pure; instances are immutable
    and safe to share across threads.
    """

    config: PrecipitateConfig
    epsilon: float
    strengths: np.ndarray

    def __post_init__(self):
        lam = self.config.lam
        _require(self.epsilon > 0.0, f"epsilon must be positive: got {self.epsilon}")
        if lam < 1.0:
            _require(self.epsilon <= 1.0 - lam + 1e-12,
                     f"epsilon must be <= 1 - lambda = {1.0 - lam}: got {self.epsilon}")
        else:
            _require(self.epsilon < 1.0, f"epsilon must be < 1: got {self.epsilon}")
        strengths = np.asarray(self.strengths, dtype=float).reshape(-1)
        _require(strengths.shape[0] == self.config.count,
                 "strengths must have one entry per precipitate")
        if strengths.size:
            _require(bool(np.all((strengths >= self.config.phi_lower - 1e-12)
                                 & (strengths <= self.config.phi_upper + 1e-12))),
                     "strengths must lie in [phi_lower, phi_upper]")
        object.__setattr__(self, "strengths", strengths)

    @property
    def plateau(self) -> float:
        """Half-width of the full-strength inner plateau."""
        return min(self.config.lam, 1.0 - self.epsilon) * self.config.R

    @property
    def ramp(self) -> float:
        return self.epsilon * self.config.R

    @property
    def support(self) -> float:
        """Half-width of the support cube; never exceeds R."""
        return self.plateau + self.ramp

    @property
    def lipschitz_bound(self) -> float:
        if self.strengths.size == 0:
            return 0.0
        return 1.5 * float(np.max(self.strengths)) / self.ramp

    def on_grid(self, N: int) -> "GriddedPotential":
        c = self.config.centers
        return GriddedPotential.build(
            N=N, trans_centers=(c[:, 0], c[:, 1]), y_centers=c[:, 2],
            strengths=self.strengths, plateau=self.plateau, ramp=self.ramp,
            nominal_R=self.config.R, lipschitz_bound=self.lipschitz_bound)


def build_field(config: PrecipitateConfig, epsilon=None, strengths="max") -> PinningField:
    """Attach a mollification width and per-precipitate strengths to a config.

    strengths: "max" pins every bump at phi_upper (worst case for
    depinning), "uniform" draws i.i.d. from [phi_lower, phi_upper] using a
    dedicated stream of the config seed, or pass an explicit array.
    """
    if epsilon is None:
        epsilon = default_epsilon(config.lam)
    if isinstance(strengths, str):
        if strengths == "max":
            values = np.full(config.count, config.phi_upper)
        elif strengths == "uniform":
            ss = np.random.SeedSequence(entropy=int(config.seed))
            rng = np.random.default_rng(ss.spawn(3)[2])
            values = rng.uniform(config.phi_lower, config.phi_upper, size=config.count)
        else:
            raise ValidationError(f"strengths mode must be 'max' or 'uniform': got {strengths!r}")
    else:
        values = np.asarray(strengths, dtype=float)
    return PinningField(config=config, epsilon=float(epsilon), strengths=values)


def eval_phi(field: PinningField, point):
    """Evaluate the potential at (x1, x2, y); broadcasts over leading axes.

    Transverse coordinates are wrapped periodically.  The value is the sum
    of per-precipitate bumps; supports never overlap thanks to the height
    spacing, but summation keeps the evaluation exact regardless.
    """
    pt = np.asarray(point, dtype=float)
    x1, x2, y = pt[..., 0], pt[..., 1], pt[..., 2]
    out = np.zeros(np.broadcast(x1, x2, y).shape)
    plateau, ramp = field.plateau, field.ramp
    for (c1, c2, cy), s in zip(field.config.centers, field.strengths):
        p1 = ramp_profile(torus_dist(x1, c1), plateau, ramp)
        p2 = ramp_profile(torus_dist(x2, c2), plateau, ramp)
        p3 = ramp_profile(np.abs(y - cy), plateau, ramp)
        out += ((s * p2) * p1) * p3
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class GlideSlice:
    """Restriction of the potential to the plane {x2 = varpi}.

    Keeps exactly the precipitates whose support is cut by the plane; each
    retained inclusion carries the amplitude reduced per the ramp profile
    of the off-plane distance.  Evaluating the slice at (x1, y) agrees
    bit-for-bit with evaluating the parent field at (x1, varpi, y).
    """

    varpi: float
    x1: np.ndarray
    y: np.ndarray
    amplitude: np.ndarray
    plateau: float
    ramp: float
    nominal_R: float
    lipschitz_bound: float

    @property
    def count(self) -> int:
        return self.x1.shape[0]

    @property
    def inner_half_width(self) -> float:
        return self.plateau

    @property
    def outer_half_width(self) -> float:
        return self.plateau + self.ramp

    def eval(self, x1, y):
        x1 = np.asarray(x1, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x1, y).shape)
        for c1, cy, amp in zip(self.x1, self.y, self.amplitude):
            p1 = ramp_profile(torus_dist(x1, c1), self.plateau, self.ramp)
            p3 = ramp_profile(np.abs(y - cy), self.plateau, self.ramp)
            out += (amp * p1) * p3
        return out if out.ndim else float(out)

    def on_grid(self, N: int) -> "GriddedPotential":
        return GriddedPotential.build(
            N=N, trans_centers=(self.x1,), y_centers=self.y,
            strengths=self.amplitude, plateau=self.plateau, ramp=self.ramp,
            nominal_R=self.nominal_R, lipschitz_bound=self.lipschitz_bound)


def slice_glide_plane(field: PinningField, varpi: float) -> GlideSlice:
    """Cut the field by the glide plane {x2 = varpi}, varpi in [-1, 1]."""
    _require(-1.0 <= varpi <= 1.0, f"varpi must lie in [-1, 1]: got {varpi}")
    c = field.config.centers
    d2 = torus_dist(c[:, 1], varpi) if c.size else np.zeros(0)
    keep = d2 < field.support
    # amplitude = strength * x2-axis factor, stored so slice evaluation
    # reproduces the parent field's rounding exactly
    amp = field.strengths[keep] * ramp_profile(d2[keep], field.plateau, field.ramp)
    return GlideSlice(varpi=float(varpi), x1=c[keep, 0].copy(), y=c[keep, 2].copy(),
                      amplitude=amp, plateau=field.plateau, ramp=field.ramp,
                      nominal_R=field.config.R, lipschitz_bound=field.lipschitz_bound)


class GriddedPotential:
    """A bump potential bound to a uniform periodic grid.

    Precomputes the transverse axis factors of every precipitate on the
    grid; only the height factor depends on the interface, so evaluating
    phi(x, u(x)) per step costs a few vectorized operations per obstacle.
    Instances are read-only once built.
    """

    def __init__(self, *, dim, N, trans_profiles, y_centers, strengths,
                 plateau, ramp, nominal_R, lipschitz_bound):
        self.dim = dim
        self.N = N
        self.trans_profiles = trans_profiles   # tuple of (m, N) arrays
        self.y_centers = y_centers
        self.strengths = strengths
        self.plateau = plateau
        self.ramp = ramp
        self.support = plateau + ramp
        self.nominal_R = nominal_R
        self.lipschitz_bound = lipschitz_bound
        m = y_centers.shape[0]
        # full transverse weight per obstacle, precomputed when affordable
        self._weights = None
        if m * N ** dim <= 8_000_000:
            self._weights = []
            for i in range(m):
                w = trans_profiles[0][i]
                for axis in range(1, dim):
                    w = np.multiply.outer(w, trans_profiles[axis][i])
                self._weights.append(w * strengths[i])
        self._masks = [tuple(prof[i] > 0.0 for prof in trans_profiles) for i in range(m)]

    @classmethod
    def build(cls, *, N, trans_centers, y_centers, strengths, plateau, ramp,
              nominal_R, lipschitz_bound):
        grid = grid_coords(N)
        profiles = tuple(
            ramp_profile(torus_dist(grid[None, :], centers[:, None]), plateau, ramp)
            for centers in trans_centers)
        return cls(dim=len(trans_centers), N=N, trans_profiles=profiles,
                   y_centers=np.asarray(y_centers, dtype=float).copy(),
                   strengths=np.asarray(strengths, dtype=float).copy(),
                   plateau=plateau, ramp=ramp, nominal_R=nominal_R,
                   lipschitz_bound=lipschitz_bound)

    @property
    def count(self) -> int:
        return self.y_centers.shape[0]

    def at_heights(self, u: np.ndarray) -> np.ndarray:
        """phi evaluated pointwise at (x_grid, u(x_grid)); same shape as u."""
        out = np.zeros_like(u)
        if self.count == 0:
            return out
        umin, umax = u.min(), u.max()
        for i in range(self.count):
            cy = self.y_centers[i]
            if cy + self.support <= umin or cy - self.support >= umax:
                continue
            py = ramp_profile(np.abs(u - cy), self.plateau, self.ramp)
            if self._weights is not None:
                out += self._weights[i] * py
            else:
                w = self.trans_profiles[0][i]
                for axis in range(1, self.dim):
                    w = np.multiply.outer(w, self.trans_profiles[axis][i])
                out += (self.strengths[i] * w) * py
        return out

    def footprint_min(self, u: np.ndarray, i: int) -> float:
        """Minimum interface height over the support footprint of obstacle i."""
        masks = self._masks[i]
        if not any(m.any() for m in masks):
            return float(u.min())
        if self.dim == 1:
            return float(u[masks[0]].min())
        return float(u[np.ix_(*masks)].min())

    def crossed(self, u: np.ndarray) -> np.ndarray:
        """Boolean per obstacle: footprint fully above the obstacle top y + R."""
        return np.array([self.footprint_min(u, i) > self.y_centers[i] + self.nominal_R
                         for i in range(self.count)], dtype=bool)

    def lowest_face_above(self, height: float) -> float:
        """Lower support face of the nearest obstacle above `height`, or +inf."""
        faces = self.y_centers - self.support
        above = faces[faces > height]
        return float(above.min()) if above.size else np.inf


def empty_potential(N: int, dim: int) -> GriddedPotential:
    """Zero potential (no obstacles) on a grid; used for free-propagation runs."""
    return GriddedPotential.build(
        N=N, trans_centers=tuple(np.zeros(0) for _ in range(dim)),
        y_centers=np.zeros(0), strengths=np.zeros(0),
        plateau=0.1, ramp=0.1, nominal_R=0.1, lipschitz_bound=0.0)


def grid_coords(N: int) -> np.ndarray:
    """Uniform periodic grid on [-1, 1): x_j = -1 + 2 j / N."""
    return -1.0 + 2.0 * np.arange(N) / N


@dataclass(frozen=True)
class PlaneHitReport:
    """Monte Carlo estimate of the chance a random glide plane meets an obstacle."""

    n_trials: int
    hits: int
    fraction: float
    ci_low: float
    ci_high: float
    p_single: float
    p_any: float


def plane_hit_statistics(R, lam, n_precipitates, n_trials, seed) -> PlaneHitReport:
    """Fraction of random planes {x2 = varpi} cutting some inner plateau cube.

    Per trial the transverse centers and the plane are drawn uniformly on
    [-1, 1]; a hit means the torus distance from varpi to some center is at
    most lam * R.  The geometric single-obstacle hit probability is
    lam * R (hit-interval measure 2 lam R over circumference 2); reported
    with a 95% Wilson interval.
    """
    _require(int(n_trials) >= 1, f"n_trials must be >= 1: got {n_trials}")
    _require(int(n_precipitates) >= 0, f"n_precipitates must be >= 0: got {n_precipitates}")
    n_trials, n_prec = int(n_trials), int(n_precipitates)
    p_single = min(1.0, lam * R)
    p_any = 1.0 - (1.0 - p_single) ** n_prec
    if n_prec == 0:
        hits = 0
    else:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed)))
        hits = 0
        chunk = max(1, min(n_trials, 2_000_000 // max(n_prec, 1)))
        done = 0
        while done < n_trials:
            k = min(chunk, n_trials - done)
            centers = rng.uniform(-1.0, 1.0, size=(k, n_prec))
            varpi = rng.uniform(-1.0, 1.0, size=(k, 1))
            hit = (torus_dist(centers, varpi) <= lam * R).any(axis=1)
            hits += int(hit.sum())
            done += k
    frac = hits / n_trials
    lo, hi = _wilson_interval(hits, n_trials)
    return PlaneHitReport(n_trials=n_trials, hits=hits, fraction=frac,
                          ci_low=lo, ci_high=hi, p_single=p_single, p_any=p_any)


def _wilson_interval(hits: int, n: int, z: float = 1.96) -> tuple[float, float]:
    p = hits / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)
