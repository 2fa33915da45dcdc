"""Rigorous lower/upper bounds on critical depinning forces.

For precipitates of half-side R with inner plateau fraction lam and
strength range [phi_lower, phi_upper]:

  line defect (curvature flow, 1-d):
      min(phi_lower, 2 (1 - lam R)^-2) lam R  <=  F_c  <=  phi_upper R
  surface defect (fractional flow, 2-d):
      min(phi_lower, 1/(2C)) (lam R)^2        <=  F_c  <=  phi_upper R^2
  local flow in n dimensions:
      min(phi_lower, (lam R)^(1-n)) (lam R)^n <=  F_c  <=  phi_upper R^n

C is the sup-norm constant of the truncated-series construction at
alpha = 1/2, evaluated from the explicit estimate chain (see linf_bound).
Each report also carries a feasibility verdict: the bound constructions
need an admissible force window, which closes when R is too large, and
the reports flag that instead of failing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

DEFAULT_BETA = 0.5


@dataclass(frozen=True)
class LinfBound:
    """Explicit sup-norm bound C(alpha) * total * rho^(2 alpha) for the series."""

    alpha: float
    rho: float
    total: float  # F1 + F2
    axis_sum: float  # bound on sum_n |sin(pi n rho)| / n^(1+alpha)
    value: float
    constant: float  # value / (total * rho^(2 alpha))


def linf_bound(alpha, rho, F1, F2) -> LinfBound:
    """Evaluate the integral-comparison estimate of the series sup-norm.

    The one-axis sum is bounded by
    pi rho + pi rho (1-alpha)^-1 ((2 rho)^(alpha-1) - 1) + alpha^-1 (2 rho)^alpha
    and the sup-norm by 4 (F1+F2) / pi^(2+2 alpha) times its square.
    Diverges as alpha -> 0 or 1, so those endpoints are rejected.
    """
    if not (0.0 < alpha < 1.0):
        raise ValidationError(f"alpha must lie strictly in (0, 1): got {alpha}")
    if not (0.0 < rho <= 0.5):
        raise ValidationError(f"rho must lie in (0, 1/2]: got {rho}")
    total = F1 + F2
    if total <= 0:
        raise ValidationError(f"F1 + F2 must be positive: got {total}")
    s = (np.pi * rho
         + np.pi * rho / (1.0 - alpha) * ((2.0 * rho) ** (alpha - 1.0) - 1.0)
         + (2.0 * rho) ** alpha / alpha)
    value = 4.0 * total / np.pi ** (2.0 + 2.0 * alpha) * s * s
    return LinfBound(alpha=alpha, rho=rho, total=total, axis_sum=float(s),
                     value=float(value), constant=float(value / (total * rho ** (2 * alpha))))


def sharp_linf_constant(alpha, rho, n_terms=200_000) -> float:
    """Sharper C(alpha): direct summation of |coefficients| plus an integral tail."""
    if not (0.0 < alpha < 1.0):
        raise ValidationError(f"alpha must lie strictly in (0, 1): got {alpha}")
    n = np.arange(1, n_terms + 1, dtype=float)
    partial = np.sum(np.abs(np.sin(np.pi * n * rho)) / n ** (1.0 + alpha))
    s = partial + n_terms ** (-alpha) / alpha
    return float(4.0 / np.pi ** (2.0 + 2.0 * alpha) * s * s / rho ** (2 * alpha))


@dataclass(frozen=True)
class BoundReport:
    """Lower/upper bounds on the critical force for one defect kind."""

    kind: str  # "dislocation" | "twin" | "qew"
    params: dict
    lower: float
    upper: float
    feasible: bool
    constants: dict = field(default_factory=dict)
    notes: tuple = ()


def _check_common(R, lam, phi_lower, phi_upper, beta):
    if not (0.0 < R < 0.5):
        raise ValidationError(f"R must lie in (0, 1/2): got {R}")
    if not (0.0 < lam <= 1.0):
        raise ValidationError(f"lambda must lie in (0, 1]: got {lam}")
    if not (0.0 < beta < 1.0):
        raise ValidationError(f"beta must lie in (0, 1): got {beta}")
    if not (0.0 < phi_lower <= phi_upper):
        raise ValidationError(
            f"need 0 < phi_lower <= phi_upper: got {phi_lower}, {phi_upper}")


def dislocation_bounds(R, lam, phi_lower, phi_upper, beta=DEFAULT_BETA) -> BoundReport:
    """First-power bounds for a line defect on a glide plane."""
    _check_common(R, lam, phi_lower, phi_upper, beta)
    lower = min(phi_lower, 2.0 / (1.0 - lam * R) ** 2) * lam * R
    upper = phi_upper * R
    notes = []
    # passage construction: force window around phi_upper * R must be open
    osc_cap = (4.0 * R ** (1.0 - beta) - 4.0 * R - phi_upper * R ** 2) / (1.0 - 2.0 * R)
    if not (max(phi_upper - 1.0 / R, upper) <= min(osc_cap, 1.0 / (1.0 - R))):
        notes.append("upper construction window closed (R too large)")
    # pinning construction: the chosen barrier force must stay admissible
    rho = lam * R
    if not (phi_lower - 1.0 / rho <= lower
            <= min(phi_lower * rho, 2.0 * rho / (1.0 - rho) ** 2, 1.0 / (1.0 - rho)) + 1e-12):
        notes.append("lower construction window closed (R too large)")
    return BoundReport(kind="dislocation",
                       params=dict(R=R, lam=lam, phi_lower=phi_lower,
                                   phi_upper=phi_upper, beta=beta),
                       lower=float(lower), upper=float(upper),
                       feasible=not notes, notes=tuple(notes))


def twin_bounds(R, lam, phi_lower, phi_upper, beta=DEFAULT_BETA) -> BoundReport:
    """Second-power bounds for a surface defect under the half-Laplacian flow."""
    _check_common(R, lam, phi_lower, phi_upper, beta)
    # the constant divides out the force split, so any positive F1 + F2 works
    c_low = linf_bound(0.5, lam * R, 0.5, 0.5).constant
    lower = min(phi_lower, 1.0 / (2.0 * c_low)) * (lam * R) ** 2
    upper = phi_upper * R ** 2
    notes = []
    c_up = linf_bound(0.5, R, 0.5, 0.5).constant
    if not (phi_upper <= (R ** (-beta) - 1.0) / c_up):
        notes.append("upper construction window closed (R too large)")
    return BoundReport(kind="twin",
                       params=dict(R=R, lam=lam, phi_lower=phi_lower,
                                   phi_upper=phi_upper, beta=beta),
                       lower=float(lower), upper=float(upper),
                       feasible=not notes,
                       constants=dict(C_alpha=c_low), notes=tuple(notes))


def qew_bounds(n, R, lam, phi_lower, phi_upper, beta=DEFAULT_BETA) -> BoundReport:
    """n-th power bounds for the local flow on the n-torus."""
    if n not in (1, 2, 3):
        raise ValidationError(f"n must be 1, 2 or 3: got {n}")
    _check_common(R, lam, phi_lower, phi_upper, beta)
    rho = lam * R
    mu_low = min(phi_lower, rho ** (1.0 - n))
    lower = mu_low * rho ** n
    upper = phi_upper * R ** n
    notes = []
    F0 = mu_low * rho ** n
    if not (F0 < min(mu_low + 2.0 * n / rho, 2.0 * n * rho / (1.0 - rho) ** 2)):
        notes.append("lower construction amplitude window closed")
    osc_cap = (4.0 * n * R ** (-beta) - 4.0 * n - phi_upper * R) / (1.0 - 2.0 * R)
    if not (phi_upper * R ** (n - 1.0) < osc_cap):
        notes.append("upper construction window closed (R too large)")
    return BoundReport(kind="qew",
                       params=dict(n=n, R=R, lam=lam, phi_lower=phi_lower,
                                   phi_upper=phi_upper, beta=beta),
                       lower=float(lower), upper=float(upper),
                       feasible=not notes, notes=tuple(notes))


def corollary_ratio_bounds(R, lam, phi_lower, phi_upper, beta=DEFAULT_BETA) -> dict:
    """Band for (twin threshold) / (dislocation threshold), derived per report.

    The quotient of the two sandwiches scales linearly in R with a constant
    depending only on lam and the strength range.
    """
    d = dislocation_bounds(R, lam, phi_lower, phi_upper, beta)
    t = twin_bounds(R, lam, phi_lower, phi_upper, beta)
    return dict(R=R, low=t.lower / d.upper, high=t.upper / d.lower,
                feasible=d.feasible and t.feasible)
