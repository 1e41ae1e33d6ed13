"""Continuous-time SISO transfer functions, realizations, responses and norms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real

import numpy as np
import scipy.linalg

from .errors import (DivisionByZeroSystem, ImproperSystem, NotSettled, NotStrictlyProper,
                     PoleOnAxis, UnstableSystem, ZeroDCGain, ZeroDenominator)
from .grid import DEFAULT_GRID, FrequencyGrid, bisect, log_golden_max

STABILITY_TOL = 1e-9
CANCEL_TOL = 1e-8


def _trim(coeffs) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs, dtype=float)).ravel()
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return np.zeros(1)
    return c[nz[0]:].copy()


@dataclass(frozen=True, eq=False)
class TransferFunction:
    """Rational model num(s)/den(s), coefficients in descending powers of s.

    Leading zeros are stripped and the denominator is made monic on
    construction. Common factors are kept.
    """

    num: np.ndarray
    den: np.ndarray
    units: str = ""

    def __post_init__(self):
        num, den = _trim(self.num), _trim(self.den)
        if not np.all(np.isfinite(num)) or not np.all(np.isfinite(den)):
            raise ValueError("coefficients must be finite")
        if den[0] == 0.0:
            raise ZeroDenominator("denominator has no nonzero coefficient")
        lead = den[0]
        num, den = num / lead, den / lead
        num.setflags(write=False)
        den.setflags(write=False)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def gain(cls, k: float, units: str = "") -> TransferFunction:
        return cls([k], [1.0], units)

    @property
    def num_order(self) -> int:
        return len(self.num) - 1 if self.num[0] != 0.0 else 0

    @property
    def den_order(self) -> int:
        return len(self.den) - 1

    @property
    def is_zero(self) -> bool:
        return bool(self.num[0] == 0.0)

    @property
    def is_proper(self) -> bool:
        return self.is_zero or self.num_order <= self.den_order

    @property
    def is_strictly_proper(self) -> bool:
        return self.is_zero or self.num_order < self.den_order

    @property
    def band(self) -> tuple[float, float]:
        return 0.0, math.inf

    def freqresp(self, omega) -> np.ndarray:
        """Vectorised H(jw). Raises PoleOnAxis where the denominator vanishes."""
        w = np.asarray(omega, dtype=float)
        s = 1j * w
        d = np.polyval(self.den, s)
        bad = np.abs(d) < 1e-300
        if np.any(bad):
            raise PoleOnAxis(float(np.atleast_1d(w)[np.atleast_1d(bad)][0]))
        return np.polyval(self.num, s) / d

    def dc_gain(self) -> float:
        return float(tf_eval(self, 0.0).real)

    def __call__(self, omega):
        return self.freqresp(omega)

    def __repr__(self):
        return f"TransferFunction(num={self.num.tolist()}, den={self.den.tolist()}, units={self.units!r})"

    def __eq__(self, other):
        if not isinstance(other, TransferFunction):
            return NotImplemented
        return (np.array_equal(self.num, other.num) and np.array_equal(self.den, other.den))

    __hash__ = None

    # algebra; scalars are promoted to static gains
    def __add__(self, other):
        return tf_add(self, _as_tf(other))

    __radd__ = __add__

    def __sub__(self, other):
        return tf_sub(self, _as_tf(other))

    def __rsub__(self, other):
        return tf_sub(_as_tf(other), self)

    def __mul__(self, other):
        return tf_mul(self, _as_tf(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return tf_div(self, _as_tf(other))

    def __rtruediv__(self, other):
        return tf_div(_as_tf(other), self)

    def __neg__(self):
        return TransferFunction(-self.num, self.den, self.units)


def _as_tf(x) -> TransferFunction:
    if isinstance(x, TransferFunction):
        return x
    if isinstance(x, Real):
        return TransferFunction.gain(float(x))
    raise TypeError(f"cannot combine TransferFunction with {type(x).__name__}")


def tf_new(num, den, units: str = "") -> TransferFunction:
    return TransferFunction(num, den, units)


def tf_eval(tf: TransferFunction, omega: float) -> complex:
    if not math.isfinite(omega) or omega < 0:
        raise ValueError(f"omega must be finite and non-negative, got {omega!r}")
    return complex(tf.freqresp(omega))


def tf_poles(tf: TransferFunction) -> np.ndarray:
    # np.roots works on the companion matrix eigenvalues
    return np.roots(tf.den)


def tf_zeros(tf: TransferFunction) -> np.ndarray:
    return np.roots(tf.num) if not tf.is_zero else np.zeros(0, dtype=complex)


def _cancel(zeros: np.ndarray, poles: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    zeros = list(zeros)
    kept = []
    for p in poles:
        if zeros:
            dist = [abs(p - z) for z in zeros]
            i = int(np.argmin(dist))
            if dist[i] <= tol:
                zeros.pop(i)
                continue
        kept.append(p)
    return np.asarray(zeros, dtype=complex), np.asarray(kept, dtype=complex)


def minreal(tf: TransferFunction, tol: float = CANCEL_TOL) -> TransferFunction:
    """Remove pole/zero pairs closer than ``tol``. Returns ``tf`` itself if none."""
    if tf.is_zero or tf.den_order == 0 or tf.num_order == 0:
        return tf
    zeros, poles = tf_zeros(tf), tf_poles(tf)
    z, p = _cancel(zeros, poles, tol)
    if len(p) == len(poles):
        return tf
    num = tf.num[0] * np.real(np.poly(z)) if len(z) else tf.num[:1]
    den = np.real(np.poly(p)) if len(p) else np.ones(1)
    return TransferFunction(num, den, tf.units)


def tf_is_stable(tf: TransferFunction, tol: float = STABILITY_TOL,
                 cancel_tol: float = CANCEL_TOL) -> bool:
    if tf.den_order == 0:
        return True
    poles = tf_poles(tf)
    if not tf.is_zero:
        _, poles = _cancel(tf_zeros(tf), poles, cancel_tol)
    return bool(np.all(poles.real < -tol))


def _units(a: TransferFunction, b: TransferFunction) -> str:
    return a.units if a.units == b.units or not b.units else (b.units if not a.units else "")


def tf_add(a: TransferFunction, b: TransferFunction) -> TransferFunction:
    if np.array_equal(a.den, b.den):
        return TransferFunction(np.polyadd(a.num, b.num), a.den, _units(a, b))
    num = np.polyadd(np.polymul(a.num, b.den), np.polymul(b.num, a.den))
    return TransferFunction(num, np.polymul(a.den, b.den), _units(a, b))


def tf_sub(a: TransferFunction, b: TransferFunction) -> TransferFunction:
    return tf_add(a, -b)


def tf_mul(a: TransferFunction, b: TransferFunction) -> TransferFunction:
    units = a.units if not b.units else (b.units if not a.units else "")
    return TransferFunction(np.polymul(a.num, b.num), np.polymul(a.den, b.den), units)


def tf_div(a: TransferFunction, b: TransferFunction) -> TransferFunction:
    if b.is_zero:
        raise DivisionByZeroSystem("divisor is identically zero")
    units = a.units if not b.units else ""
    return TransferFunction(np.polymul(a.num, b.den), np.polymul(a.den, b.num), units)


@dataclass(frozen=True, eq=False)
class StateSpace:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        A = np.atleast_2d(A) if A.size else np.zeros((0, 0))
        n = A.shape[0]
        B = np.asarray(self.B, dtype=float).reshape(n, 1)
        C = np.asarray(self.C, dtype=float).reshape(1, n)
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got {A.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", float(self.D))

    @property
    def order(self) -> int:
        return self.A.shape[0]

    def freqresp(self, omega) -> np.ndarray:
        w = np.atleast_1d(np.asarray(omega, dtype=float))
        out = np.full(w.shape, self.D, dtype=complex)
        if self.order:
            eye = np.eye(self.order)
            for i, wi in enumerate(w):
                x = np.linalg.solve(1j * wi * eye - self.A, self.B)
                out[i] += (self.C @ x)[0, 0]
        return out if np.ndim(omega) else out[0]


def tf_to_ss(tf: TransferFunction) -> StateSpace:
    """Controllable canonical realization of a proper transfer function."""
    if not tf.is_proper:
        raise ImproperSystem(f"numerator order {tf.num_order} exceeds denominator order {tf.den_order}")
    n = tf.den_order
    num = np.concatenate([np.zeros(n + 1 - len(tf.num)), tf.num])
    d = num[0]
    rem = num[1:] - d * tf.den[1:]
    if n == 0:
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), d)
    A = np.zeros((n, n))
    A[0, :] = -tf.den[1:]
    A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    return StateSpace(A, B, rem.reshape(1, n), d)


def _require_stable(tf: TransferFunction) -> TransferFunction:
    if not tf_is_stable(tf):
        raise UnstableSystem(f"system has poles with Re >= 0: {tf_poles(tf).tolist()}")
    return minreal(tf)


def h2_norm(tf: TransferFunction) -> float:
    """H2 norm from the controllability Gramian, sqrt(C P C^T)."""
    if tf.is_zero:
        return 0.0
    tf = _require_stable(tf)
    if not tf.is_strictly_proper:
        raise NotStrictlyProper("H2 norm is infinite for a system with direct feedthrough")
    ss = tf_to_ss(tf)
    P = scipy.linalg.solve_continuous_lyapunov(ss.A, -ss.B @ ss.B.T)
    val = float((ss.C @ P @ ss.C.T)[0, 0])
    return math.sqrt(max(val, 0.0))


@dataclass(frozen=True)
class Peak:
    value: float
    omega: float

    def __iter__(self):
        return iter((self.value, self.omega))


def _peak_search(mag, w: np.ndarray, lo: float, hi: float, extra: dict[float, float]) -> Peak:
    """Coarse max of ``mag`` on ``w`` then golden refinement inside ``[lo, hi]``.

    ``extra`` holds candidate values already known at fixed frequencies.
    """
    best = Peak(-math.inf, math.nan)
    for om, v in extra.items():
        if v > best.value:
            best = Peak(v, om)
    if len(w):
        vals = mag(w)
        i = int(np.argmax(vals))
        if vals[i] > best.value:
            best = Peak(float(vals[i]), float(w[i]))
        a = w[i - 1] if i > 0 else lo
        b = w[i + 1] if i + 1 < len(w) else hi
        a, b = max(a, lo), min(b, hi)
        if a > 0 and b > a:
            om, v = log_golden_max(lambda x: float(mag(np.array([x]))[0]), a, b)
            if v > best.value:
                best = Peak(v, om)
    return best


def resonance_omegas(tf: TransferFunction, lo: float, hi: float) -> np.ndarray:
    """Pole magnitudes and imaginary parts inside ``[lo, hi]``.

    Lightly damped peaks can be far narrower than a log grid spacing; these
    frequencies are added to grid scans so such peaks are not stepped over.
    """
    if tf.den_order == 0:
        return np.zeros(0)
    p = tf_poles(tf)
    cand = np.concatenate([np.abs(p), np.abs(p.imag)])
    return np.unique(cand[(cand >= lo) & (cand <= hi)])


def hinf_norm(tf: TransferFunction, grid: FrequencyGrid = DEFAULT_GRID) -> Peak:
    """Peak gain over [0, inf) and where it occurs, via grid scan plus golden refinement."""
    if not tf.is_proper:
        raise ImproperSystem("H-infinity norm requires a proper system")
    if tf.is_zero:
        return Peak(0.0, 0.0)
    tf = _require_stable(tf)
    if tf.den_order == 0:
        return Peak(abs(float(tf.num[0])), 0.0)
    w = np.union1d(grid.omegas(), resonance_omegas(tf, grid.omega_min, grid.omega_max))
    mag = lambda x: np.abs(tf.freqresp(x))
    extra = {0.0: abs(tf_eval(tf, 0.0))}
    return _peak_search(mag, w, grid.omega_min, grid.omega_max, extra)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    t: np.ndarray
    y: np.ndarray


def default_t_end(tf: TransferFunction) -> float:
    """Long enough for the slowest mode to decay by ~e^-12."""
    poles = tf_poles(minreal(tf))
    if len(poles) == 0:
        return 1.0
    return 12.0 / float(np.min(np.abs(poles.real)))


def step_response(tf: TransferFunction, t_end: float | None = None,
                  dt: float | None = None) -> TimeSeries:
    """Unit step response by exact zero-order-hold discretisation."""
    if not tf.is_proper:
        raise ImproperSystem("step response requires a proper system")
    tf = _require_stable(tf)
    ss = tf_to_ss(tf)
    if t_end is None:
        t_end = default_t_end(tf)
    if dt is None:
        poles = tf_poles(tf)
        fastest = float(np.max(np.abs(poles))) if len(poles) else 0.0
        dt = t_end / 2000 if fastest == 0 else min(0.5 / fastest, t_end / 2000)
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    steps = int(math.ceil(t_end / dt - 1e-9))
    t = np.arange(steps + 1) * dt
    if ss.order == 0:
        return TimeSeries(t, np.full(t.shape, ss.D))
    n = ss.order
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = ss.A
    M[:n, n:] = ss.B
    E = scipy.linalg.expm(M * dt)
    Ad, Bd = E[:n, :n], E[:n, n]
    x = np.zeros(n)
    y = np.empty(steps + 1)
    c = ss.C[0]
    for k in range(steps + 1):
        y[k] = c @ x + ss.D
        x = Ad @ x + Bd
    return TimeSeries(t, y)


@dataclass(frozen=True)
class StepMetrics:
    overshoot: float
    rise_time_10_90: float
    settling_time_2pct: float


def _first_crossing(t: np.ndarray, y: np.ndarray, level: float) -> float:
    idx = np.flatnonzero(y >= level)
    if idx.size == 0:
        return math.nan
    i = int(idx[0])
    if i == 0:
        return float(t[0])
    y0, y1 = y[i - 1], y[i]
    return float(t[i - 1] + (level - y0) / (y1 - y0) * (t[i] - t[i - 1]))


def step_metrics(series: TimeSeries, dc_gain: float) -> StepMetrics:
    if dc_gain == 0:
        raise ZeroDCGain("step metrics need a nonzero final value")
    t = series.t
    y = series.y / dc_gain
    tail = y[-max(1, len(y) // 10):]
    if np.any(np.abs(tail - 1.0) >= 0.01):
        raise NotSettled("response has not settled within 1% over the last 10% of samples")
    overshoot = max(0.0, float(np.max(y)) - 1.0)
    rise = _first_crossing(t, y, 0.9) - _first_crossing(t, y, 0.1)
    outside = np.flatnonzero(np.abs(y - 1.0) > 0.02)
    if outside.size == 0:
        settling = 0.0
    else:
        i = int(outside[-1])
        e0, e1 = abs(y[i] - 1.0), abs(y[i + 1] - 1.0)
        settling = float(t[i] + (e0 - 0.02) / (e0 - e1) * (t[i + 1] - t[i]))
    return StepMetrics(overshoot, rise, settling)


@dataclass(frozen=True)
class Bandwidth:
    omega: float
    unresolved: bool = False

    def __float__(self):
        return self.omega


def _bandwidth_scan(mag, w: np.ndarray, dc: float, low: float) -> Bandwidth:
    if dc == 0:
        raise ZeroDCGain("bandwidth undefined for zero DC gain")
    target = dc / math.sqrt(2.0)
    vals = mag(w)
    below = np.flatnonzero(vals <= target)
    if below.size == 0:
        return Bandwidth(float(w[-1]), unresolved=True)
    i = int(below[0])
    above = lambda om: float(mag(np.array([om]))[0]) > target
    if i == 0:
        if low >= w[0]:
            return Bandwidth(float(w[0]))
        return Bandwidth(bisect(above, low, float(w[0]), rtol=1e-12))
    return Bandwidth(bisect(above, float(w[i - 1]), float(w[i]), rtol=1e-12, log=True))


def bandwidth(tf: TransferFunction, grid: FrequencyGrid = DEFAULT_GRID) -> Bandwidth:
    """First frequency where the gain drops to DC/sqrt(2)."""
    tf = _require_stable(tf)
    dc = abs(tf_eval(tf, 0.0))
    return _bandwidth_scan(lambda x: np.abs(tf.freqresp(x)), grid.omegas(), dc, 0.0)
