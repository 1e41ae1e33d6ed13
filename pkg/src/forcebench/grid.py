"""Logarithmic frequency grids and the scalar searches used on them."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FrequencyGrid:
    """Log-spaced analysis grid in rad/s."""

    omega_min: float = 1e-3
    omega_max: float = 1e4
    points: int = 2000

    def __post_init__(self):
        if not (0.0 < self.omega_min < self.omega_max) or not math.isfinite(self.omega_max):
            raise ValueError(f"need 0 < omega_min < omega_max, got {self.omega_min}, {self.omega_max}")
        if int(self.points) != self.points or self.points < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.points}")

    def omegas(self) -> np.ndarray:
        w = np.logspace(math.log10(self.omega_min), math.log10(self.omega_max), int(self.points))
        # pin the endpoints exactly; logspace can be off by an ulp
        w[0], w[-1] = self.omega_min, self.omega_max
        return w

    @classmethod
    def default(cls) -> FrequencyGrid:
        """Default grid, honouring FORCEBENCH_GRID_POINTS when set."""
        points = os.environ.get("FORCEBENCH_GRID_POINTS")
        return cls(points=int(points)) if points else cls()


DEFAULT_GRID = FrequencyGrid()


def golden_max(f: Callable[[float], float], lo: float, hi: float, rtol: float = 1e-9,
               max_iter: int = 200) -> tuple[float, float]:
    """Maximise ``f`` over ``[lo, hi]`` by golden-section search.

    Returns ``(x, f(x))``. The endpoints are never evaluated, callers pass them
    as separate candidates.
    """
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= rtol * max(1.0, abs(a), abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def log_golden_max(f: Callable[[float], float], omega_lo: float, omega_hi: float,
                   rtol: float = 1e-9) -> tuple[float, float]:
    """Golden-section maximum of ``f(omega)`` searched in log-frequency."""
    x, fx = golden_max(lambda u: f(math.exp(u)), math.log(omega_lo), math.log(omega_hi),
                       rtol=rtol)
    return math.exp(x), fx


def bisect(pred: Callable[[float], bool], inside: float, outside: float,
           rtol: float = 1e-12, log: bool = False, max_iter: int = 300) -> float:
    """Locate the boundary between ``pred`` true (at ``inside``) and false.

    Bisects until the bracket is within ``rtol`` relative; ``log`` bisects on
    log-frequency. Returns the last point known to satisfy ``pred``.
    """
    a, b = inside, outside
    for _ in range(max_iter):
        if abs(b - a) <= rtol * max(abs(a), abs(b)):
            break
        m = math.sqrt(a * b) if log and a > 0 and b > 0 else 0.5 * (a + b)
        if pred(m):
            a = m
        else:
            b = m
    return a
