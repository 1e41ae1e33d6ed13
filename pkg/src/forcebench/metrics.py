"""Load-independent transparency metrics and the blocked-system step/bandwidth metrics.

Every metric accepts either a :class:`TransferFunction` or measured
:class:`FrequencyResponseData`. Measured data is never extrapolated: its
frequency span is the analysis band.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.integrate import trapezoid

from . import lti
from .errors import (BandMismatch, DcApproximationWarning, ForcebenchError, ForcebenchWarning,
                     SingularBilinear, TailWarning, UnresolvedBandwidth, ZeroDCGain)
from .frd import FrequencyResponseData
from .grid import DEFAULT_GRID, FrequencyGrid, bisect
from .lti import Bandwidth, Peak, TransferFunction

System = Union[TransferFunction, FrequencyResponseData]

SINGULAR_TOL = 1e-12


def _is_frd(sys) -> bool:
    return isinstance(sys, FrequencyResponseData)


def analysis_omegas(sys: System, grid: FrequencyGrid) -> np.ndarray:
    return sys.frequencies if _is_frd(sys) else grid.omegas()


def shared_omegas(a: System, b: System, grid: FrequencyGrid) -> np.ndarray:
    """Common evaluation frequencies for two systems.

    Two models share the analysis grid; measured data contributes its own
    sample points restricted to the overlap of the measured bands.
    """
    frds = [x for x in (a, b) if _is_frd(x)]
    if not frds:
        return grid.omegas()
    lo = max(f.band[0] for f in frds)
    hi = min(f.band[1] for f in frds)
    if lo >= hi:
        raise BandMismatch(f"measured bands do not overlap (lo={lo!r}, hi={hi!r})")
    pieces = [f.frequencies[(f.frequencies >= lo) & (f.frequencies <= hi)] for f in frds]
    return np.unique(np.concatenate(pieces))


def peak_gain(sys: System, grid: FrequencyGrid = DEFAULT_GRID) -> Peak:
    """H-infinity norm of a model, or the refined peak of measured data over its band."""
    if not _is_frd(sys):
        return lti.hinf_norm(sys, grid)
    lo, hi = sys.band
    return lti._peak_search(lambda x: np.abs(sys.freqresp(x)), sys.frequencies, lo, hi, {})


def bandwidth(sys: System, grid: FrequencyGrid = DEFAULT_GRID) -> Bandwidth:
    """-3 dB bandwidth relative to the DC gain (lowest sample for measured data)."""
    if not _is_frd(sys):
        bw = lti.bandwidth(sys, grid)
    else:
        warnings.warn(DcApproximationWarning(
            f"DC gain taken at the lowest measured frequency {sys.band[0]!r} rad/s"), stacklevel=2)
        bw = lti._bandwidth_scan(lambda x: np.abs(sys.freqresp(x)), sys.frequencies,
                                 abs(sys.responses[0]), sys.band[0])
    if bw.unresolved:
        warnings.warn(UnresolvedBandwidth(
            f"gain never falls below DC/sqrt(2) up to {bw.omega!r} rad/s"), stacklevel=2)
    return bw


def _lowest_order(coeffs: np.ndarray) -> tuple[int, float]:
    nz = np.flatnonzero(coeffs)
    last = int(nz[-1])
    return len(coeffs) - 1 - last, float(coeffs[last])


def _dc_ratio(zt: TransferFunction, zb: TransferFunction) -> float:
    """Limit of |Z_t/Z_b| as s -> 0 from the lowest-order nonzero coefficients."""
    num = np.polymul(zt.num, zb.den)
    den = np.polymul(zt.den, zb.num)
    if not np.any(num):
        return 0.0
    if not np.any(den):
        return math.inf
    kn, cn = _lowest_order(num)
    kd, cd = _lowest_order(den)
    if kn > kd:
        return 0.0
    if kn < kd:
        return math.inf
    return abs(cn / cd)


def lcs(zt: System, zb: System, grid: FrequencyGrid = DEFAULT_GRID,
        omega_b: float | None = None) -> Peak:
    """Load-change sensitivity: peak of |Z_t/Z_b| over [0, omega_b].

    ``omega_b`` defaults to the blocked-system bandwidth.
    """
    if omega_b is None:
        omega_b = bandwidth(zb, grid).omega
    if not omega_b > 0:
        raise ValueError(f"omega_b must be positive, got {omega_b!r}")

    def ratio(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.abs(zt.freqresp(x) / zb.freqresp(x))
        return np.where(np.isnan(r), np.inf, r)

    if _is_frd(zt) or _is_frd(zb):
        w = shared_omegas(zt, zb, grid)
        if omega_b > w[-1] or omega_b < w[0]:
            raise BandMismatch(f"omega_b={omega_b!r} outside the shared measured band "
                               f"[{w[0]!r}, {w[-1]!r}]")
        lo = float(w[0])
        warnings.warn(DcApproximationWarning(
            f"omega=0 approximated by the lowest shared frequency {lo!r} rad/s"), stacklevel=2)
        extra = {}
    else:
        w = grid.omegas()
        lo = grid.omega_min
        extra = {0.0: _dc_ratio(zt, zb)}
    extra[float(omega_b)] = float(ratio(np.array([omega_b]))[0])
    inband = w[(w >= lo) & (w <= omega_b)]
    return lti._peak_search(ratio, inband, lo, float(omega_b), extra)


def transparency_residual(zt: System) -> float:
    """H2 norm of the transparency, i.e. RMS of its impulse response.

    For measured data the integral runs over the data band only and a
    TailWarning is issued when the band edges still carry significant energy.
    """
    if not _is_frd(zt):
        return 0.0 if zt.is_zero else lti.h2_norm(zt)
    w = zt.frequencies
    p = np.abs(zt.responses) ** 2
    area = float(trapezoid(p, w))
    peak = float(np.max(p))
    if peak > 0:
        if p[-1] >= 0.01 * peak:
            warnings.warn(TailWarning(
                f"|Z|^2 at the upper band edge is {p[-1] / peak:.3g} of its peak"), stacklevel=2)
        if w[0] * p[0] > 0.01 * area:
            warnings.warn(TailWarning(
                "energy below the lowest measured frequency exceeds 1% of the integral"),
                stacklevel=2)
    return math.sqrt(area / math.pi)


def _bilinear(g: np.ndarray, omega: np.ndarray) -> np.ndarray:
    den = 1.0 + g
    bad = np.abs(den) < SINGULAR_TOL
    if np.any(bad):
        raise SingularBilinear(float(np.atleast_1d(omega)[np.atleast_1d(bad)][0]))
    return np.abs((1.0 - g) / den)


def passivity_index_value(g: complex) -> float:
    """|(1 - g)/(1 + g)| for a single complex response value."""
    if abs(1.0 + g) < SINGULAR_TOL:
        raise SingularBilinear(math.nan)
    return abs((1.0 - g) / (1.0 + g))


def passivity_index(g: System, omega) -> float | np.ndarray:
    """Passivity index of ``g`` at ``omega``; at most 1 exactly where Re g(jw) >= 0."""
    w = np.asarray(omega, dtype=float)
    r = _bilinear(g.freqresp(w), w)
    return float(r) if r.ndim == 0 else r


@dataclass(frozen=True)
class PiiResult:
    """Passivity index interval of -Z_t and the peak gain outside it.

    ``omega1``/``omega2`` are None when no frequency meets the passivity margin.
    """

    omega1: float | None
    omega2: float | None
    M: float
    epsilon: float
    interval_empty: bool = False

    def to_dict(self) -> dict:
        return {"M": self.M, "omega1_rad_s": self.omega1, "omega2_rad_s": self.omega2,
                "interval_empty": self.interval_empty}


def _true_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    padded = np.concatenate([[False], mask, [False]]).astype(int)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1
    return list(zip(starts.tolist(), stops.tolist()))


def pii(zt: System, epsilon: float = 0.05, grid: FrequencyGrid = DEFAULT_GRID) -> PiiResult:
    """Passivity index interval of -Z_t.

    The interval is the widest (in log-frequency) contiguous run of analysis
    frequencies where the passivity index of -Z_t is at most ``1 - epsilon``;
    its edges are refined by bisection. M is the peak |Z_t| outside it.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    level = 1.0 - epsilon
    w = analysis_omegas(zt, grid)
    r = _bilinear(-zt.freqresp(w), w)
    runs = _true_runs(r <= level)
    if not runs:
        return PiiResult(None, None, peak_gain(zt, grid).value, epsilon, interval_empty=True)

    logw = np.log(w)
    i, j = max(runs, key=lambda ij: (logw[ij[1]] - logw[ij[0]], -ij[0]))

    def inside(om: float) -> bool:
        return float(_bilinear(-zt.freqresp(np.array([om])), np.array([om]))[0]) <= level

    omega1 = 0.0 if i == 0 else bisect(inside, float(w[i]), float(w[i - 1]), log=True)
    omega2 = float(w[-1]) if j == len(w) - 1 else bisect(inside, float(w[j]), float(w[j + 1]),
                                                         log=True)

    mag = lambda x: np.abs(zt.freqresp(x))
    lo_band, hi_band = float(w[0]), float(w[-1])
    M = 0.0
    if omega1 > 0:
        extra = {omega1: float(mag(np.array([omega1]))[0])}
        if not _is_frd(zt):
            extra[0.0] = abs(lti.tf_eval(zt, 0.0))
        M = max(M, lti._peak_search(mag, w[w < omega1], lo_band, omega1, extra).value)
    if j < len(w) - 1:
        extra = {omega2: float(mag(np.array([omega2]))[0])}
        M = max(M, lti._peak_search(mag, w[w > omega2], omega2, hi_band, extra).value)
    return PiiResult(omega1, omega2, M, epsilon)


def mu_siso(m: System, grid: FrequencyGrid | None = None) -> Callable[[float], float]:
    """Structured singular value for one full complex scalar block: mu(w) = |M(jw)|.

    ``grid`` is accepted for symmetry with the other metrics and not used.
    """
    def mu(omega):
        v = np.abs(m.freqresp(np.asarray(omega, dtype=float)))
        return float(v) if np.ndim(v) == 0 else v
    return mu


def lrt(zt: System, grid: FrequencyGrid = DEFAULT_GRID, zb: System | None = None) -> float:
    """Load robustness threshold, 1 / peak mu, with mu taken against Z_t.

    ``zb`` does not enter the robust-stability loop and is ignored.
    """
    if not _is_frd(zt) and zt.is_zero:
        return math.inf
    peak = peak_gain(zt, grid).value
    return math.inf if peak == 0 else 1.0 / peak


@dataclass
class MetricReport:
    """Transparency and blocked-system metrics for one controller.

    A metric that could not be computed is None and explained in ``flags``.
    """

    name: str
    epsilon: float
    lcs: float | None = None
    lcs_argmax: float | None = None
    tr: float | None = None
    pii: PiiResult | None = None
    lrt: float | None = None
    bandwidth: float | None = None
    overshoot: float | None = None
    rise_time: float | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        values = (self.lcs, self.tr, self.pii, self.lrt, self.bandwidth, self.overshoot,
                  self.rise_time)
        return all(v is not None for v in values)

    def to_dict(self) -> dict:
        def enc(x):
            if isinstance(x, float) and math.isinf(x):
                return "inf" if x > 0 else "-inf"
            return x
        pii_d = None if self.pii is None else {k: enc(v) for k, v in self.pii.to_dict().items()}
        return {
            "name": self.name,
            "epsilon": self.epsilon,
            "lcs": enc(self.lcs),
            "lcs_argmax_rad_s": enc(self.lcs_argmax),
            "tr": enc(self.tr),
            "pii": pii_d,
            "lrt": enc(self.lrt),
            "bandwidth_rad_s": enc(self.bandwidth),
            "overshoot": enc(self.overshoot),
            "rise_time_s": enc(self.rise_time),
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> MetricReport:
        def dec(x):
            if x in ("inf", "-inf"):
                return float(x)
            return None if x is None else float(x)
        p = d.get("pii")
        pii_r = None
        if p is not None:
            pii_r = PiiResult(dec(p.get("omega1_rad_s")), dec(p.get("omega2_rad_s")), dec(p["M"]),
                              float(d.get("epsilon", 0.05)), bool(p.get("interval_empty", False)))
        return cls(name=str(d["name"]), epsilon=float(d.get("epsilon", 0.05)),
                   lcs=dec(d.get("lcs")), lcs_argmax=dec(d.get("lcs_argmax_rad_s")),
                   tr=dec(d.get("tr")), pii=pii_r, lrt=dec(d.get("lrt")),
                   bandwidth=dec(d.get("bandwidth_rad_s")), overshoot=dec(d.get("overshoot")),
                   rise_time=dec(d.get("rise_time_s")), flags=list(d.get("flags", [])))


def _collect(label: str, flags: list[str], fn):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            value = fn()
        except ForcebenchError as exc:
            flags.append(f"{label}: {type(exc).__name__}: {exc}")
            value = None
    for w in caught:
        if issubclass(w.category, ForcebenchWarning):
            flags.append(f"{label}: {w.category.__name__}: {w.message}")
        else:
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    return value


def benchmark_report(zb: System, zt: System, epsilon: float = 0.05,
                     grid: FrequencyGrid = DEFAULT_GRID, name: str = "",
                     omega_b: float | None = None) -> MetricReport:
    """Compute every metric, recording failures as flags instead of raising."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    flags: list[str] = []
    report = MetricReport(name=name, epsilon=epsilon, flags=flags)

    bw = _collect("bandwidth", flags, lambda: bandwidth(zb, grid))
    if bw is not None:
        report.bandwidth = bw.omega
    band_edge = omega_b if omega_b is not None else (bw.omega if bw is not None else None)
    if band_edge is not None:
        peak = _collect("lcs", flags, lambda: lcs(zt, zb, grid, omega_b=band_edge))
        if peak is not None:
            report.lcs, report.lcs_argmax = peak.value, peak.omega
    else:
        flags.append("lcs: skipped, blocked-system bandwidth unavailable")

    report.tr = _collect("tr", flags, lambda: transparency_residual(zt))
    report.pii = _collect("pii", flags, lambda: pii(zt, epsilon, grid))
    if report.pii is not None and report.pii.interval_empty:
        flags.append("pii: interval_empty: no frequency meets the passivity margin")
    report.lrt = _collect("lrt", flags, lambda: lrt(zt, grid))

    if _is_frd(zb):
        flags.append("step: measured Z_b has no time-domain model; fit a model first")
    else:
        def step():
            dc = zb.dc_gain()
            if dc == 0:
                raise ZeroDCGain("blocked system has zero DC gain")
            return lti.step_metrics(lti.step_response(zb * (1.0 / dc)), 1.0)
        sm = _collect("step", flags, step)
        if sm is not None:
            report.overshoot, report.rise_time = sm.overshoot, sm.rise_time_10_90
    return report
