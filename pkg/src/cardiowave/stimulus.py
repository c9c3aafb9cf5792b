"""Stimulation protocols: geometric regions plus timed current pulses."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Interval:
    """1D region a <= x <= b."""

    a: float
    b: float

    def mask(self, nodes: np.ndarray) -> np.ndarray:
        x = nodes[:, 0]
        return (x >= self.a) & (x <= self.b)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box; bounds of None are unbounded."""

    xmin: float | None = None
    xmax: float | None = None
    ymin: float | None = None
    ymax: float | None = None

    def mask(self, nodes: np.ndarray) -> np.ndarray:
        m = np.ones(len(nodes), dtype=bool)
        x = nodes[:, 0]
        if self.xmin is not None:
            m &= x >= self.xmin
        if self.xmax is not None:
            m &= x <= self.xmax
        if nodes.shape[1] > 1:
            y = nodes[:, 1]
            if self.ymin is not None:
                m &= y >= self.ymin
            if self.ymax is not None:
                m &= y <= self.ymax
        return m


@dataclass(frozen=True)
class L1Ball:
    """Taxicab ball ||x - center||_1 <= radius."""

    center: tuple
    radius: float

    def mask(self, nodes: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)[: nodes.shape[1]]
        return np.abs(nodes - c).sum(axis=1) <= self.radius


@dataclass(frozen=True)
class Stimulus:
    """Current pulse applied on a region, optionally repeated.

    Pulses are active on [start + k*period, start + k*period + duration)
    for k = 0..count-1.
    """

    region: object
    amplitude: float
    start: float
    duration: float
    period: float | None = None
    count: int = 1

    def __post_init__(self):
        if self.duration <= 0.0:
            raise ValueError("stimulus duration must be positive")
        if self.count < 1:
            raise ValueError("stimulus count must be at least 1")
        if self.count > 1 and (self.period is None or self.period <= 0.0):
            raise ValueError("repeated stimuli need a positive period")

    def is_active(self, t: float) -> bool:
        period = self.period if self.period is not None else 0.0
        for k in range(self.count):
            t0 = self.start + k * period
            if t0 <= t < t0 + self.duration:
                return True
            if t < t0:
                break
        return False


class StimulusField:
    """Precomputed node masks for a list of stimuli on a fixed mesh."""

    def __init__(self, stimuli, nodes: np.ndarray):
        self._entries = [(s, s.region.mask(nodes)) for s in stimuli]
        self._n = len(nodes)

    def current(self, t: float) -> np.ndarray | None:
        """Total applied current density at time t, or None when silent."""
        out = None
        for stim, mask in self._entries:
            if stim.is_active(t):
                if out is None:
                    out = np.zeros(self._n)
                out[mask] += stim.amplitude
        return out
