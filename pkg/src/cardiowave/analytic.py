"""Closed-form traveling-front solutions and parameter maps.

The piecewise-linear bistable reaction admits an exact propagating-front
solution of the damped-wave (relaxation-flux) cable model.  This module
provides the front profile, its speed, the characteristic-speed bound,
the nondimensionalization constants, and the lumped-circuit conversion
from axial inductances/resistances to a relaxation time.  The parabolic
cubic bistable front is included as a second verification oracle.

All functions are pure and operate on scalars or numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NondimMap:
    """Characteristic scales of the piecewise-linear cable model.

    T is the reaction time scale, L the diffusion length, and mu the
    ratio of the flux relaxation time to the reaction time.
    """

    T: float
    L: float
    mu: float

    @classmethod
    def from_physical(cls, sigma: float, k: float, chi: float, C_m: float,
                      tau: float) -> "NondimMap":
        if min(sigma, k, chi, C_m) <= 0.0:
            raise ValueError("sigma, k, chi, C_m must be positive")
        if tau < 0.0:
            raise ValueError("tau must be nonnegative")
        return cls(T=C_m / k, L=math.sqrt(sigma / (k * chi)), mu=tau * k / C_m)


def _check_alpha_mu(alpha: float, mu: float) -> None:
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    if mu < 0.0:
        raise ValueError(f"mu must be nonnegative, got {mu}")


def mckean_speed(alpha: float, mu: float) -> float:
    """Exact front speed of the piecewise-linear bistable model.

    c = (1 - 2*alpha) / sqrt(mu + (alpha - alpha^2) * (mu - 1)^2).
    The formula is regular at mu = 0 (parabolic limit) and satisfies
    c < sqrt(1/mu) for all mu > 0.
    """
    _check_alpha_mu(alpha, mu)
    return (1.0 - 2.0 * alpha) / math.sqrt(
        mu + (alpha - alpha * alpha) * (mu - 1.0) ** 2)


def characteristic_speed(mu: float) -> float:
    """Maximum signal speed sqrt(1/mu); infinite in the parabolic limit."""
    if mu < 0.0:
        raise ValueError("mu must be nonnegative")
    return math.inf if mu == 0.0 else math.sqrt(1.0 / mu)


def mckean_speed_dimensional(sigma: float, k: float, chi: float, C_m: float,
                             alpha: float, tau: float) -> float:
    """Dimensional front speed v = sqrt(sigma*k/(chi*C_m^2)) * c(alpha, mu)."""
    nd = NondimMap.from_physical(sigma, k, chi, C_m, tau)
    return math.sqrt(sigma * k / (chi * C_m ** 2)) * mckean_speed(alpha, nd.mu)


def front_exponents(alpha: float, mu: float) -> tuple[float, float]:
    """Decay exponents (lambda_plus < 0, lambda_minus > 0) of the front.

    Roots of gamma*r^2 + beta*r + 1 with gamma = c^2*mu - 1 and
    beta = -c*(1+mu).  Since c < sqrt(1/mu) strictly, gamma < 0 and the
    roots straddle zero.
    """
    c = mckean_speed(alpha, mu)
    gamma = c * c * mu - 1.0
    beta = -c * (1.0 + mu)
    disc = beta * beta - 4.0 * gamma
    sq = math.sqrt(disc)
    lam_plus = (-beta + sq) / (2.0 * gamma)
    lam_minus = (-beta - sq) / (2.0 * gamma)
    return lam_plus, lam_minus


def front_profile(z, alpha: float, mu: float):
    """Front profile U and derivative U' in the co-moving coordinate.

    U(z) = alpha*exp(lambda_plus*z) ahead of the front (z > 0) and
    (alpha-1)*exp(lambda_minus*z) + 1 behind it (z <= 0); U(0) = alpha
    and U' is continuous there.  Returns (U, dU/dz) as arrays matching z.
    """
    lam_plus, lam_minus = front_exponents(alpha, mu)
    z = np.asarray(z, dtype=float)
    ahead = z > 0.0
    # exponent arguments masked per branch so the inactive branch cannot overflow
    zp = np.where(ahead, z, 0.0)
    zm = np.where(ahead, 0.0, z)
    u = np.where(ahead, alpha * np.exp(lam_plus * zp),
                 (alpha - 1.0) * np.exp(lam_minus * zm) + 1.0)
    du = np.where(ahead, alpha * lam_plus * np.exp(lam_plus * zp),
                  (alpha - 1.0) * lam_minus * np.exp(lam_minus * zm))
    return u, du


def front_initial_state(x, alpha: float, mu: float, front_position: float = 0.0,
                        speed: float | None = None):
    """Nodal (V, Q) of a right-moving front for seeding a solver.

    V(x, 0) = U(x - front_position) and Q = dV/dt = -c * U'(x - front_position).
    """
    c = mckean_speed(alpha, mu) if speed is None else speed
    u, du = front_profile(np.asarray(x, dtype=float) - front_position, alpha, mu)
    return u, -c * du


def cubic_front_speed(alpha: float) -> float:
    """Front speed (1 - 2*alpha)/sqrt(2) of the parabolic cubic bistable model."""
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    return (1.0 - 2.0 * alpha) / math.sqrt(2.0)


def cubic_front_profile(z, alpha: float):
    """Exact parabolic cubic-bistable front U = 1/(1 + exp(z/sqrt(2))).

    Valid only for the parabolic model (no relaxation); alpha enters the
    speed but not the shape.  Returns (U, dU/dz).
    """
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    z = np.asarray(z, dtype=float)
    s = np.exp(-np.abs(z) / math.sqrt(2.0))
    # u = 1/(1+e^{z/sqrt2}) written to avoid overflow for large |z|
    u = np.where(z >= 0.0, s / (1.0 + s), 1.0 / (1.0 + s))
    du = -u * (1.0 - u) / math.sqrt(2.0)
    return u, du


def cubic_front_initial_state(x, alpha: float, front_position: float = 0.0):
    """Nodal (V, Q) of the parabolic cubic front for solver seeding."""
    c = cubic_front_speed(alpha)
    u, du = cubic_front_profile(np.asarray(x, dtype=float) - front_position, alpha)
    return u, -c * du


def circuit_relaxation_time(L_i: float, L_e: float, R_i: float, R_e: float,
                            chi: float | None = None):
    """Relaxation time tau = (L_i + L_e)/(R_i + R_e) of the lumped cable.

    With chi given, also returns the equivalent conductivity
    D = 1/(chi*(R_i + R_e)).
    """
    if L_i < 0.0 or L_e < 0.0:
        raise ValueError("inductances must be nonnegative")
    R = R_i + R_e
    if R <= 0.0:
        raise ValueError("total resistance R_i + R_e must be positive")
    tau = (L_i + L_e) / R
    if chi is None:
        return tau
    if chi <= 0.0:
        raise ValueError("chi must be positive")
    return tau, 1.0 / (chi * R)


def monodomain_tau(tau_i: float, tau_e: float, lam: float) -> float:
    """Effective monodomain relaxation time for conductivity ratio lam.

    tau = tau_i + lam*(tau_e - tau_i)/(lam + 1); equals tau_i when the
    two compartment relaxation times coincide.
    """
    if lam <= 0.0:
        raise ValueError("conductivity ratio lam must be positive")
    return tau_i + lam * (tau_e - tau_i) / (lam + 1.0)
