"""Time steppers for driven interfaces on periodic grids.

Three evolution laws over the torus [-1, 1)^n, all started from u = 0:

  fractional      d_t u = -(-Lap)^alpha u - phi(x, u) + F      (n = 2)
  mean_curvature  d_t u = u_xx / (1 + u_x^2)
                        + sqrt(1 + u_x^2) (F - phi(x, u))      (n = 1)
  laplacian       d_t u = Lap u - phi(x, u) + F                (n = 1, 2, 3)

The fractional/Laplacian operators are diagonal in the trigonometric
basis with eigenvalue (pi^2 |k|^2)^alpha on cos/sin(pi k . x); they are
treated implicitly per mode while the potential is explicit, so a flat
interface advances at exactly F per unit time.  The curvature flow is
stepped explicitly with centered differences under the parabolic CFL
dt <= 0.4 h^2.  All schemes additionally require dt * Lip(phi) <= 0.5 so
the explicit potential term keeps the discrete comparison structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import NonFiniteError, ValidationError
from .precipitates import GriddedPotential

OPERATORS = ("fractional", "mean_curvature", "laplacian")


@dataclass(frozen=True)
class InterfaceState:
    """Heights u on a uniform periodic grid at one time instant."""

    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        object.__setattr__(self, "u", u)
        if u.ndim not in (1, 2, 3):
            raise ValidationError(f"state dimension must be 1, 2 or 3: got {u.ndim}")
        if not np.isfinite(u).all():
            raise NonFiniteError("interface state contains non-finite values")

    @property
    def n(self) -> int:
        return self.u.ndim

    @property
    def N(self) -> int:
        return self.u.shape[0]


def zero_state(n: int, N: int) -> InterfaceState:
    return InterfaceState(u=np.zeros((N,) * n), t=0.0)


@dataclass(frozen=True)
class EvolverSpec:
    """Which operator to step, with force, resolution and time horizon."""

    operator: str
    F: float
    dt: float
    N: int
    t_max: float
    alpha: float = 0.5
    scheme: str = "imex"  # for the laplacian only: "imex" or "explicit"

    def __post_init__(self):
        if self.operator not in OPERATORS:
            raise ValidationError(f"operator must be one of {OPERATORS}: got {self.operator!r}")
        if self.F < 0:
            raise ValidationError(f"F must be >= 0: got {self.F}")
        if self.dt <= 0:
            raise ValidationError(f"dt must be positive: got {self.dt}")
        if self.N < 4:
            raise ValidationError(f"N must be at least 4: got {self.N}")
        if self.t_max <= 0:
            raise ValidationError(f"t_max must be positive: got {self.t_max}")
        if self.operator == "fractional" and not (0.5 <= self.alpha < 1.0):
            raise ValidationError(f"alpha must lie in [1/2, 1): got {self.alpha}")
        if self.scheme not in ("imex", "explicit"):
            raise ValidationError(f"scheme must be 'imex' or 'explicit': got {self.scheme!r}")

    @property
    def h(self) -> float:
        return 2.0 / self.N


def stable_dt(operator: str, N: int, lipschitz: float, n: int = 1,
              alpha: float = 0.5, scheme: str = "imex") -> float:
    """Largest dt satisfying the stability rules of the chosen scheme."""
    h = 2.0 / N
    bounds = [np.inf]
    if lipschitz > 0:
        bounds.append(0.5 / lipschitz)
    if operator == "mean_curvature":
        bounds.append(0.4 * h * h)
    if operator == "laplacian" and scheme == "explicit":
        bounds.append(h * h / (4.0 * n))
    return float(min(bounds)) if np.isfinite(min(bounds)) else 1e-2


# --- spectral machinery ----------------------------------------------------

_MULTIPLIER_CACHE: dict = {}


def spectral_multipliers(N: int, n: int, alpha: float) -> np.ndarray:
    """Eigenvalues (pi^2 |k|^2)^alpha laid out for rfftn of an (N,)*n array."""
    key = (N, n, round(alpha, 12))
    if key not in _MULTIPLIER_CACHE:
        full = np.fft.fftfreq(N) * N
        half = np.fft.rfftfreq(N) * N
        axes = [full] * (n - 1) + [half]
        k2 = np.zeros(tuple([N] * (n - 1) + [N // 2 + 1]))
        for i, ax in enumerate(axes):
            shape = [1] * n
            shape[i] = ax.size
            k2 = k2 + (ax ** 2).reshape(shape)
        lam = np.pi ** 2 * k2
        _MULTIPLIER_CACHE[key] = lam ** alpha if alpha != 1.0 else lam
    return _MULTIPLIER_CACHE[key]


def apply_fractional(u: np.ndarray, alpha: float) -> np.ndarray:
    """Discrete (-Lap)^alpha of a grid function (alpha = 1 gives -Lap)."""
    mult = spectral_multipliers(u.shape[0], u.ndim, alpha)
    axes = tuple(range(u.ndim))
    return np.fft.irfftn(mult * np.fft.rfftn(u), s=u.shape, axes=axes)


_DENOM_CACHE: dict = {}


def _imex_denominator(N: int, n: int, alpha: float, dt: float) -> np.ndarray:
    key = (N, n, round(alpha, 12), dt)
    if key not in _DENOM_CACHE:
        _DENOM_CACHE[key] = 1.0 + dt * spectral_multipliers(N, n, alpha)
    return _DENOM_CACHE[key]


# --- single steps ----------------------------------------------------------

def _check_potential_dt(spec: EvolverSpec, potential: Optional[GriddedPotential]):
    if potential is not None and potential.lipschitz_bound > 0:
        if spec.dt * potential.lipschitz_bound > 0.5 + 1e-12:
            raise ValidationError(
                f"dt = {spec.dt:.3g} violates dt * Lip(phi) <= 0.5 "
                f"(Lip = {potential.lipschitz_bound:.3g})")


def _step_spectral(state: InterfaceState, potential, spec: EvolverSpec,
                   alpha: float) -> InterfaceState:
    u = state.u
    rhs = spec.F - potential.at_heights(u) if potential is not None else spec.F
    denom = _imex_denominator(spec.N, u.ndim, alpha, spec.dt)
    axes = tuple(range(u.ndim))
    if np.isscalar(rhs):
        rhat = np.zeros(denom.shape, dtype=complex)
        rhat[(0,) * u.ndim] = rhs * u.size
    else:
        rhat = np.fft.rfftn(rhs)
    new = np.fft.irfftn((np.fft.rfftn(u) + spec.dt * rhat) / denom, s=u.shape, axes=axes)
    if not np.isfinite(new).all():
        raise NonFiniteError(f"non-finite state at t = {state.t + spec.dt:.6g}")
    return InterfaceState(u=new, t=state.t + spec.dt)


def step_fractional(state: InterfaceState, potential, spec: EvolverSpec) -> InterfaceState:
    """One IMEX step of the fractional flow; the zero mode carries mean(F - phi)."""
    if spec.operator != "fractional":
        raise ValidationError("spec.operator must be 'fractional'")
    if state.n != 2:
        raise ValidationError(f"fractional flow needs a 2-d state: got n = {state.n}")
    _check_potential_dt(spec, potential)
    return _step_spectral(state, potential, spec, spec.alpha)


def step_laplacian(state: InterfaceState, potential, spec: EvolverSpec) -> InterfaceState:
    """One step of the local flow: semi-implicit spectral, or explicit stencil."""
    if spec.operator != "laplacian":
        raise ValidationError("spec.operator must be 'laplacian'")
    _check_potential_dt(spec, potential)
    if spec.scheme == "imex":
        return _step_spectral(state, potential, spec, 1.0)
    u = state.u
    h2 = spec.h * spec.h
    if spec.dt > h2 / (4.0 * u.ndim) + 1e-15:
        raise ValidationError(
            f"dt = {spec.dt:.3g} violates the explicit bound dt <= h^2/(4n)")
    lap = -2.0 * u.ndim * u
    for axis in range(u.ndim):
        lap += np.roll(u, 1, axis=axis) + np.roll(u, -1, axis=axis)
    lap /= h2
    rhs = spec.F - potential.at_heights(u) if potential is not None else spec.F
    new = u + spec.dt * (lap + rhs)
    if not np.isfinite(new).all():
        raise NonFiniteError(f"non-finite state at t = {state.t + spec.dt:.6g}")
    return InterfaceState(u=new, t=state.t + spec.dt)


def step_mean_curvature(state: InterfaceState, potential, spec: EvolverSpec) -> InterfaceState:
    """One explicit step of forced curvature flow of a 1-d graph."""
    if spec.operator != "mean_curvature":
        raise ValidationError("spec.operator must be 'mean_curvature'")
    if state.n != 1:
        raise ValidationError(f"curvature flow needs a 1-d state: got n = {state.n}")
    if spec.dt > 0.4 * spec.h * spec.h + 1e-15:
        raise ValidationError(f"dt = {spec.dt:.3g} violates dt <= 0.4 h^2 = {0.4 * spec.h ** 2:.3g}")
    _check_potential_dt(spec, potential)
    v = state.u
    new = _mc_increment(v, potential, spec.F, spec.h, spec.dt)
    if not np.isfinite(new).all():
        raise NonFiniteError(f"non-finite state at t = {state.t + spec.dt:.6g}")
    return InterfaceState(u=new, t=state.t + spec.dt)


def _mc_increment(v, potential, F, h, dt):
    vp = np.roll(v, -1)
    vm = np.roll(v, 1)
    vx = (vp - vm) / (2.0 * h)
    vxx = (vp - 2.0 * v + vm) / (h * h)
    one_p = 1.0 + vx * vx
    drive = F - potential.at_heights(v) if potential is not None else F
    return v + dt * (vxx / one_p + np.sqrt(one_p) * drive)


_STEPPERS: dict[str, Callable] = {
    "fractional": step_fractional,
    "mean_curvature": step_mean_curvature,
    "laplacian": step_laplacian,
}


def stepper_for(spec: EvolverSpec) -> Callable:
    return _STEPPERS[spec.operator]


# --- full evolutions -------------------------------------------------------

@dataclass(frozen=True)
class StoppingRule:
    """When to sample and when to give up early.

    early_exit is called after every sample with (state, log) and may
    return a short reason string to stop the evolution; the reason is
    recorded on the trajectory.  Fast-forward advances an exactly flat
    interface through obstacle-free stretches in one exact jump (the flat
    solution moves at speed F there); disable it when the stepping itself
    is under test.
    """

    t_max: float
    sample_every: float
    early_exit: Optional[Callable] = None
    allow_fast_forward: bool = True


@dataclass
class TrajectorySummary:
    """Sampled min/mean/max heights and mean-height velocity of one run."""

    times: np.ndarray
    mins: np.ndarray
    means: np.ndarray
    maxs: np.ndarray
    velocities: np.ndarray  # of the mean height; leading entry is 0
    final_state: InterfaceState = field(repr=False, default=None)
    exit_reason: Optional[str] = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValidationError("sample times must be strictly increasing")

    @property
    def max_displacement(self) -> float:
        return float(np.max(self.maxs))

    def trailing_velocity(self, window: float) -> float:
        """Mean-height velocity over the trailing `window` time units."""
        t = self.times
        if t.size < 2:
            return 0.0
        i = int(np.searchsorted(t, t[-1] - window, side="left"))
        i = min(i, t.size - 2)
        return float((self.means[-1] - self.means[i]) / (t[-1] - t[i]))


class _Log:
    """Append-only sample log handed to early-exit predicates."""

    def __init__(self):
        self.times: list[float] = []
        self.mins: list[float] = []
        self.means: list[float] = []
        self.maxs: list[float] = []
        self.velocities: list[float] = []

    def record(self, state: InterfaceState):
        u = state.u
        mean = float(u.mean())
        if self.times:
            dt = state.t - self.times[-1]
            self.velocities.append((mean - self.means[-1]) / dt if dt > 0 else 0.0)
        else:
            self.velocities.append(0.0)
        self.times.append(state.t)
        self.mins.append(float(u.min()))
        self.means.append(mean)
        self.maxs.append(float(u.max()))

    def freeze(self, state: InterfaceState, reason: Optional[str]) -> TrajectorySummary:
        return TrajectorySummary(
            times=np.asarray(self.times), mins=np.asarray(self.mins),
            means=np.asarray(self.means), maxs=np.asarray(self.maxs),
            velocities=np.asarray(self.velocities), final_state=state,
            exit_reason=reason)

    def trailing_velocity(self, window: float) -> float:
        t = self.times
        if len(t) < 2:
            return 0.0
        i = int(np.searchsorted(np.asarray(t), t[-1] - window, side="left"))
        i = min(i, len(t) - 2)
        return (self.means[-1] - self.means[i]) / (t[-1] - t[i])


def _fast_forward(state: InterfaceState, potential, spec: EvolverSpec,
                  limit_t: float) -> InterfaceState:
    """Exact free flight of a flat interface up to just below the next obstacle."""
    u = state.u
    lo, hi = float(u.min()), float(u.max())
    if hi - lo > 1e-13 * max(1.0, abs(hi)) or spec.F <= 0:
        return state
    if potential is not None and potential.at_heights(u).max() > 0.0:
        return state
    face = potential.lowest_face_above(hi) if potential is not None else np.inf
    margin = 4.0 * spec.dt * spec.F
    gap = min(face - hi - margin, spec.F * (limit_t - state.t))
    if gap <= margin:
        return state
    return InterfaceState(u=u + gap, t=state.t + gap / spec.F)


def evolve(state: InterfaceState, potential, spec: EvolverSpec,
           stopping: Optional[StoppingRule] = None) -> TrajectorySummary:
    """Run the flow from `state` until t_max or an early-exit fires.

    Samples min/mean/max every `sample_every` time units (plus the initial
    and final instants) and returns the trajectory summary holding the
    final state.
    """
    if stopping is None:
        stopping = StoppingRule(t_max=spec.t_max, sample_every=max(spec.dt, spec.t_max / 200))
    step = stepper_for(spec)
    t_end = min(spec.t_max, stopping.t_max)
    n_batch = max(1, int(round(stopping.sample_every / spec.dt)))
    log = _Log()
    log.record(state)
    reason = None
    while state.t < t_end - 1e-12:
        if stopping.allow_fast_forward:
            jumped = _fast_forward(state, potential, spec, t_end)
            if jumped.t > state.t:
                state = jumped
                log.record(state)
                if stopping.early_exit is not None:
                    reason = stopping.early_exit(state, log)
                    if reason:
                        break
                continue
        for _ in range(n_batch):
            if state.t >= t_end - 1e-12:
                break
            state = step(state, potential, spec)
        log.record(state)
        if stopping.early_exit is not None:
            reason = stopping.early_exit(state, log)
            if reason:
                break
    return log.freeze(state, reason)


def spec_with_force(spec: EvolverSpec, F: float, t_max: Optional[float] = None) -> EvolverSpec:
    return replace(spec, F=F, t_max=spec.t_max if t_max is None else t_max)
