"""Ionic reaction models: piecewise-linear, cubic, Aliev-Panfilov, Fenton-Karma.

Every model evaluates the transmembrane current density ``i_ion(V, W)``,
the state-variable rates ``g(V, W)``, and the chain-rule time derivative
``di_ion_dt(V, Q, W) = dI/dV * Q + dI/dW . g``.  The membrane convention
throughout the package is

    C_m * dV/dt = -i_ion + i_stim + diffusion,

so positive ``i_ion`` repolarizes.  Evaluations are pure, vectorized over
nodes, and hold no internal state; state arrays have shape
``(n_states, n_nodes)``.

Sharp gating uses an exact Heaviside step (H(0) = 1/2).  With a
regularization width ``eps > 0`` the step becomes a C^1 cubic ramp and
its derivative participates in the chain rule; with ``eps = 0`` the
Dirac contribution of the step is omitted and the gates are treated as
piecewise constant in V.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


def heaviside(x, eps: float = 0.0):
    """Unit step of x, exact for eps=0 (H(0)=1/2), C^1 ramp of half-width eps otherwise."""
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    x = np.asarray(x, dtype=float)
    if eps == 0.0:
        return np.where(x > 0.0, 1.0, np.where(x < 0.0, 0.0, 0.5))
    t = np.clip((x + eps) / (2.0 * eps), 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def heaviside_deriv(x, eps: float = 0.0):
    """Derivative of ``heaviside``; zero everywhere for the sharp step."""
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    x = np.asarray(x, dtype=float)
    if eps == 0.0:
        return np.zeros_like(x)
    t = np.clip((x + eps) / (2.0 * eps), 0.0, 1.0)
    return 3.0 * t * (1.0 - t) / eps


class IonicModel:
    """Base class wiring the chain rule from per-model partials."""

    n_states: int = 0
    rest_potential: float = 0.0

    def rest_states(self, n_nodes: int) -> np.ndarray:
        return np.zeros((self.n_states, n_nodes))

    def i_ion(self, V, W) -> np.ndarray:
        raise NotImplementedError

    def g(self, V, W) -> np.ndarray:
        return np.zeros((self.n_states, np.asarray(V).shape[0]))

    def i_ion_partials(self, V, W):
        """Return (dI/dV, dI/dW) with dI/dW shaped like W."""
        raise NotImplementedError

    def di_ion_dt(self, V, Q, W) -> np.ndarray:
        dI_dV, dI_dW = self.i_ion_partials(V, W)
        out = dI_dV * np.asarray(Q, dtype=float)
        if self.n_states:
            out = out + np.einsum("sn,sn->n", dI_dW, self.g(V, W))
        return out


@dataclass(frozen=True)
class McKeanParams:
    """Threshold alpha in (0, 1/2); optional dimensional potentials/gain."""

    alpha: float = 0.1
    k: float = 1.0
    V0: float = 0.0
    V1: float | None = None
    V2: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 1/2)")
        v1 = self.V0 + self.alpha * (self.V2 - self.V0) if self.V1 is None else self.V1
        object.__setattr__(self, "V1", v1)
        if not self.V0 < self.V1 < self.V2:
            raise ValueError("potentials must satisfy V0 < V1 < V2")


class McKean(IonicModel):
    """Stateless piecewise-linear bistable current V - H(V - alpha).

    The dimensional form k*(V - V2*H(V-V1) - V0*(1-H(V-V1))) maps onto the
    nondimensional one through V = (V2-V0)*Vhat + V0 and
    alpha = (V1-V0)/(V2-V0); with the default parameters the two coincide.
    """

    n_states = 0

    def __init__(self, params: McKeanParams | None = None, eps: float = 0.0):
        self.params = params or McKeanParams()
        self.eps = float(eps)
        self.rest_potential = self.params.V0

    def i_ion(self, V, W=None):
        p = self.params
        h = heaviside(np.asarray(V, dtype=float) - p.V1, self.eps * (p.V2 - p.V0))
        return p.k * (np.asarray(V, dtype=float) - p.V0 - (p.V2 - p.V0) * h)

    def i_ion_partials(self, V, W=None):
        p = self.params
        hd = heaviside_deriv(np.asarray(V, dtype=float) - p.V1,
                             self.eps * (p.V2 - p.V0))
        return p.k * (1.0 - (p.V2 - p.V0) * hd), np.zeros((0, np.asarray(V).shape[0]))


class Cubic(IonicModel):
    """Stateless cubic bistable current V*(V - 1)*(V - alpha)."""

    n_states = 0

    def __init__(self, alpha: float = 0.1):
        if not 0.0 < alpha < 0.5:
            raise ValueError("alpha must lie in (0, 1/2)")
        self.alpha = float(alpha)

    def i_ion(self, V, W=None):
        V = np.asarray(V, dtype=float)
        return V * (V - 1.0) * (V - self.alpha)

    def i_ion_partials(self, V, W=None):
        V = np.asarray(V, dtype=float)
        a = self.alpha
        return 3.0 * V * V - 2.0 * (1.0 + a) * V + a, np.zeros((0, V.shape[0]))


@dataclass(frozen=True)
class AlievPanfilovParams:
    k: float = 8.0
    b: float = 0.1
    mu1: float = 0.12
    mu2: float = 0.3
    eps: float = 0.01
    alpha: float = 0.1

    def __post_init__(self):
        if min(self.k, self.b, self.mu1, self.mu2, self.eps, self.alpha) <= 0.0:
            raise ValueError("all Aliev-Panfilov parameters must be positive")


class AlievPanfilov(IonicModel):
    """Two-variable recovery model; W = (r,).

    i_ion = k*V*(V - alpha)*(V - 1) + r*V and
    dr/dt = (eps + mu1*r/(mu2 + V)) * (-r - k*V*(V - b - 1)).
    """

    n_states = 1

    def __init__(self, params: AlievPanfilovParams | None = None):
        self.params = params or AlievPanfilovParams()

    def i_ion(self, V, W):
        p = self.params
        V = np.asarray(V, dtype=float)
        r = W[0]
        return p.k * V * (V - p.alpha) * (V - 1.0) + r * V

    def g(self, V, W):
        p = self.params
        V = np.asarray(V, dtype=float)
        r = W[0]
        rate = (p.eps + p.mu1 * r / (p.mu2 + V)) * (-r - p.k * V * (V - p.b - 1.0))
        return rate[None, :]

    def i_ion_partials(self, V, W):
        p = self.params
        V = np.asarray(V, dtype=float)
        r = W[0]
        dI_dV = p.k * (3.0 * V * V - 2.0 * (1.0 + p.alpha) * V + p.alpha) + r
        return dI_dV, V[None, :].copy()


@dataclass(frozen=True)
class FentonKarmaParams:
    tau_v_plus: float
    tau_v1_minus: float
    tau_v2_minus: float
    tau_w_plus: float
    tau_w_minus: float
    tau_d: float
    tau_0: float
    tau_r: float
    tau_si: float
    k: float
    V_c_si: float
    V_c: float
    V_v: float

    def __post_init__(self):
        times = (self.tau_v_plus, self.tau_v1_minus, self.tau_v2_minus,
                 self.tau_w_plus, self.tau_w_minus, self.tau_d, self.tau_0,
                 self.tau_r, self.tau_si)
        if min(times) <= 0.0:
            raise ValueError("all Fenton-Karma time constants must be positive")
        if not 0.0 < self.V_v < self.V_c < 1.0:
            raise ValueError("gate thresholds must satisfy 0 < V_v < V_c < 1")


# Published parameter sets 3-6 (time constants in ms, potentials rescaled to [0, 1]).
FK_PARAMETER_SETS = {
    3: FentonKarmaParams(3.33, 19.6, 1250.0, 870.0, 41.0, 0.25, 12.5, 33.33,
                         29.0, 10.0, 0.85, 0.13, 0.04),
    4: FentonKarmaParams(3.33, 15.6, 5.0, 350.0, 80.0, 0.407, 9.0, 34.0,
                         26.5, 15.0, 0.45, 0.15, 0.04),
    5: FentonKarmaParams(3.33, 12.0, 2.0, 1000.0, 100.0, 0.362, 5.0, 33.33,
                         29.0, 15.0, 0.7, 0.13, 0.04),
    6: FentonKarmaParams(3.33, 9.0, 8.0, 250.0, 60.0, 0.395, 9.0, 33.33,
                         29.0, 15.0, 0.5, 0.13, 0.04),
}


class FentonKarma(IonicModel):
    """Three-variable model; W = (v, w) with both gates closed (=1) at rest.

    The three currents keep their conventional signs (I_fi <= 0, I_so >= 0,
    I_si <= 0 on the physiological range) and the total returned by
    ``i_ion`` is their sum, so that -i_ion drives the upstroke.
    """

    n_states = 2

    def __init__(self, params: FentonKarmaParams, eps: float = 0.0):
        self.params = params
        self.eps = float(eps)

    def rest_states(self, n_nodes: int) -> np.ndarray:
        return np.ones((2, n_nodes))

    def _gates(self, V):
        p = self.params
        V = np.asarray(V, dtype=float)
        pg = heaviside(V - p.V_c, self.eps)
        qg = heaviside(V - p.V_v, self.eps)
        return V, pg, qg

    def currents(self, V, W):
        """Return (I_fi, I_so, I_si) separately."""
        p = self.params
        V, pg, _ = self._gates(V)
        v, w = W[0], W[1]
        i_fi = -(v * pg / p.tau_d) * (V - p.V_c) * (1.0 - V)
        i_so = V * (1.0 - pg) / p.tau_0 + pg / p.tau_r
        i_si = -(w / (2.0 * p.tau_si)) * (1.0 + np.tanh(p.k * (V - p.V_c_si)))
        return i_fi, i_so, i_si

    def i_ion(self, V, W):
        i_fi, i_so, i_si = self.currents(V, W)
        return i_fi + i_so + i_si

    def g(self, V, W):
        p = self.params
        V, pg, qg = self._gates(V)
        v, w = W[0], W[1]
        tau_v_minus = (1.0 - qg) * p.tau_v1_minus + qg * p.tau_v2_minus
        dv = (1.0 - pg) * (1.0 - v) / tau_v_minus - pg * v / p.tau_v_plus
        dw = (1.0 - pg) * (1.0 - w) / p.tau_w_minus - pg * w / p.tau_w_plus
        return np.stack([dv, dw])

    def i_ion_partials(self, V, W):
        p = self.params
        V, pg, _ = self._gates(V)
        v, w = W[0], W[1]
        th = np.tanh(p.k * (V - p.V_c_si))
        dI_dV = (-(v * pg / p.tau_d) * (1.0 + p.V_c - 2.0 * V)
                 + (1.0 - pg) / p.tau_0
                 - (w * p.k / (2.0 * p.tau_si)) * (1.0 - th * th))
        if self.eps > 0.0:
            pd = heaviside_deriv(V - p.V_c, self.eps)
            dI_dV = dI_dV + pd * (-(v / p.tau_d) * (V - p.V_c) * (1.0 - V)
                                  - V / p.tau_0 + 1.0 / p.tau_r)
        dI_dv = -(pg / p.tau_d) * (V - p.V_c) * (1.0 - V)
        dI_dw = -(1.0 + th) / (2.0 * p.tau_si)
        return dI_dV, np.stack([dI_dv, dI_dw * np.ones_like(V)])


@dataclass(frozen=True)
class TissueDefaults:
    """Conductivities (per model units), surface-to-volume ratio, capacitance."""

    sigma_f: float
    sigma_s: float
    chi: float = 1.0
    C_m: float = 1.0


_TISSUE = {
    "McKean": TissueDefaults(1.0, 1.0),
    "Cubic": TissueDefaults(1.0, 1.0),
    "AP": TissueDefaults(1.0, 0.125),
    "FK": TissueDefaults(0.1, 0.0125),
}


def default_tissue(name: str) -> TissueDefaults:
    """Published tissue parameters accompanying a model name."""
    key = "FK" if name.upper().startswith("FK") else name
    try:
        return _TISSUE[key]
    except KeyError:
        raise KeyError(f"no tissue defaults for model {name!r}") from None


def create_model(name: str, eps: float = 0.0, **overrides) -> IonicModel:
    """Instantiate a model by registry name, overriding parameters by key.

    Names: "McKean", "Cubic", "AP", and "FK3".."FK6".
    """
    key = name.strip()
    up = key.upper()
    if up == "MCKEAN":
        return McKean(McKeanParams(**overrides) if overrides else None, eps=eps)
    if up == "CUBIC":
        return Cubic(**overrides) if overrides else Cubic()
    if up == "AP":
        return AlievPanfilov(AlievPanfilovParams(**overrides) if overrides else None)
    if up.startswith("FK"):
        try:
            setno = int(up[2:])
            base = FK_PARAMETER_SETS[setno]
        except (ValueError, KeyError):
            raise KeyError(f"unknown Fenton-Karma parameter set {name!r}") from None
        if overrides:
            base = replace(base, **overrides)
        return FentonKarma(base, eps=eps)
    raise KeyError(f"unknown ionic model {name!r}")
