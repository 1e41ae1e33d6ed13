"""Rational transfer-function fits to frequency-response data.

Levy's linearised least squares followed by Sanathanan-Koerner reweighting,
solved in a frequency variable scaled by the geometric-mean frequency.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import IllConditioned, InsufficientData, UnstableFitWarning
from .frd import FrequencyResponseData
from .lti import TransferFunction, tf_is_stable

COND_LIMIT = 1e12


@dataclass(frozen=True)
class FitConfig:
    num_order: int
    den_order: int
    iterations: int = 5
    weight: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.num_order < 0 or self.den_order < 0:
            raise ValueError("orders must be non-negative")
        if self.num_order > self.den_order + 1:
            raise ValueError("num_order may exceed den_order by at most one")
        if not 1 <= self.iterations <= 100:
            raise ValueError("iterations must lie in [1, 100]")
        if self.weight is not None and any(not w > 0 for w in self.weight):
            raise ValueError("weights must be positive")


@dataclass(frozen=True)
class FitResult:
    tf: TransferFunction
    relative_rms_error: float
    stable: bool


def fit_error(tf: TransferFunction, frd: FrequencyResponseData) -> float:
    """RMS of the complex residual relative to the RMS of the data."""
    resid = tf.freqresp(frd.frequencies) - frd.responses
    scale = math.sqrt(float(np.mean(np.abs(frd.responses) ** 2)))
    return math.sqrt(float(np.mean(np.abs(resid) ** 2))) / scale


def _solve(s: np.ndarray, h: np.ndarray, nb: int, na: int, w: np.ndarray):
    # unknowns: b_nb..b_0 then a_{na-1}..a_0, with a_na = 1
    #   B(s) - h (a_{na-1} s^{na-1} + ... + a_0) = h s^na
    vb = np.vander(s, nb + 1)
    va = np.vander(s, na + 1)[:, 1:] if na else np.zeros((s.size, 0))
    A = np.hstack([vb, -h[:, None] * va]) * w[:, None]
    rhs = h * s ** na * w
    A_ri = np.vstack([A.real, A.imag])
    rhs_ri = np.concatenate([rhs.real, rhs.imag])
    colnorm = np.linalg.norm(A_ri, axis=0)
    colnorm[colnorm == 0] = 1.0
    As = A_ri / colnorm
    cond = np.linalg.cond(As) ** 2
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditioned(f"normal equations condition number {cond:.3g} exceeds "
                             f"{COND_LIMIT:.0e}; try lower orders")
    x, *_ = np.linalg.lstsq(As, rhs_ri, rcond=None)
    x = x / colnorm
    return x[:nb + 1], np.concatenate([[1.0], x[nb + 1:]])


def fit_rational(frd: FrequencyResponseData, cfg: FitConfig) -> FitResult:
    """Fit num/den of the configured orders to ``frd``.

    Unstable fits are returned unchanged with ``stable=False`` and an
    UnstableFitWarning.
    """
    needed = cfg.num_order + cfg.den_order + 1
    if len(frd) < needed:
        raise InsufficientData(f"{len(frd)} points cannot determine {needed} coefficients")
    if cfg.weight is not None and len(cfg.weight) != len(frd):
        raise ValueError("weight length must match the number of data points")
    scale = math.exp(float(np.mean(np.log(frd.frequencies))))
    s = 1j * frd.frequencies / scale
    h = frd.responses
    base = np.ones(len(frd)) if cfg.weight is None else np.asarray(cfg.weight, dtype=float)
    # the first pass uses (1 + s)^n as the previous denominator, which keeps
    # rows balanced across decades
    w = base / np.abs(1.0 + s) ** cfg.den_order
    for _ in range(cfg.iterations):
        b, a = _solve(s, h, cfg.num_order, cfg.den_order, w)
        d = np.abs(np.polyval(a, s))
        if np.any(d == 0):
            break
        w = base / d
    # undo the frequency scaling: coefficient of s^k picks up scale**-k
    b = b / scale ** np.arange(cfg.num_order, -1, -1)
    a = a / scale ** np.arange(cfg.den_order, -1, -1)
    tf = TransferFunction(b, a, frd.units)
    stable = tf_is_stable(tf)
    if not stable:
        warnings.warn(UnstableFitWarning("fitted model has poles with Re >= 0"), stacklevel=2)
    return FitResult(tf, fit_error(tf, frd), stable)
