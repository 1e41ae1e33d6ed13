"""Coupled actuator/load loop: closed-loop assembly, stability checks and the
constructive destabilisation oracle used to cross-check the robustness metric."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import lti
from .errors import DegenerateLoop, NoPeak, NotPassiveLoad, PoleOnAxis, UnstableSystem
from .grid import DEFAULT_GRID, FrequencyGrid
from .lti import TransferFunction
from .metrics import PiiResult, System, _is_frd, shared_omegas

PASSIVITY_TOL = 1e-9


@dataclass(frozen=True)
class LoadModel:
    """Mass-spring-damper load; passive for any admissible parameters."""

    mass: float
    damping: float = 0.0
    stiffness: float = 0.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass!r}")
        if self.damping < 0 or self.stiffness < 0:
            raise ValueError("damping and stiffness must be non-negative")

    def to_dict(self) -> dict:
        return {"mass_kg": self.mass, "damping_Ns_per_m": self.damping,
                "stiffness_N_per_m": self.stiffness}

    @classmethod
    def from_dict(cls, d: dict) -> LoadModel:
        return cls(float(d["mass_kg"]), float(d.get("damping_Ns_per_m", 0.0)),
                   float(d.get("stiffness_N_per_m", 0.0)))

    @classmethod
    def from_json(cls, path) -> LoadModel:
        return cls.from_dict(json.loads(Path(path).read_text()))


def load_admittance(load: LoadModel) -> TransferFunction:
    """Y(s) = s / (m s^2 + b s + k), force to velocity. Not reduced for k = 0."""
    return TransferFunction([1.0, 0.0], [load.mass, load.damping, load.stiffness], "(m/s)/N")


@dataclass(frozen=True, eq=False)
class CoupledSystem:
    t_y: TransferFunction
    stable: bool
    characteristic_poles: np.ndarray


def coupled_response(zb: TransferFunction, zt: TransferFunction,
                     y: TransferFunction) -> CoupledSystem:
    """Reference-to-force response with the load attached, Z_b / (1 - Z_t Y)."""
    loop = lti.TransferFunction.gain(1.0) - zt * y
    if loop.is_zero:
        raise DegenerateLoop("1 - Z_t Y is identically zero")
    t_y = zb / loop
    t_y = TransferFunction(t_y.num, t_y.den, zb.units)
    poles = np.concatenate([np.roots(loop.num) if loop.num_order else np.zeros(0),
                            lti.tf_poles(zb)])
    return CoupledSystem(t_y, lti.tf_is_stable(t_y), poles)


@dataclass(frozen=True)
class SmallGainResult:
    holds: bool
    worst_omega: float
    worst_product: float


def _maybe_dc(sys: System) -> complex | None:
    if _is_frd(sys):
        return None
    try:
        return lti.tf_eval(sys, 0.0)
    except PoleOnAxis:
        return None


def _loop_omegas(zt: System, y: System, grid: FrequencyGrid) -> np.ndarray:
    """Shared analysis frequencies plus the resonances of any parametric factor."""
    w = shared_omegas(zt, y, grid)
    lo, hi = float(w[0]), float(w[-1])
    for sys_ in (zt, y):
        if not _is_frd(sys_):
            w = np.union1d(w, lti.resonance_omegas(sys_, lo, hi))
    return w


def small_gain_check(zt: System, y: System, grid: FrequencyGrid = DEFAULT_GRID) -> SmallGainResult:
    """Check |Z_t(jw)| |Y(jw)| < 1 on the grid (and at DC when both are models)."""
    w = _loop_omegas(zt, y, grid)
    prod = np.abs(zt.freqresp(w)) * np.abs(y.freqresp(w))
    i = int(np.argmax(prod))
    worst_w, worst = float(w[i]), float(prod[i])
    a, b = _maybe_dc(zt), _maybe_dc(y)
    if a is not None and b is not None and abs(a) * abs(b) >= worst:
        worst_w, worst = 0.0, abs(a) * abs(b)
    return SmallGainResult(worst < 1.0, worst_w, worst)


@dataclass(frozen=True)
class MixedResult:
    guaranteed: bool
    reason: str


def check_passive_load(y: System, grid: FrequencyGrid = DEFAULT_GRID) -> None:
    """Raise NotPassiveLoad unless Re Y(jw) >= -1e-9 on the grid (and Y has no RHP poles)."""
    if not _is_frd(y):
        poles = lti.tf_poles(lti.minreal(y)) if y.den_order else np.zeros(0)
        if np.any(poles.real > PASSIVITY_TOL):
            raise NotPassiveLoad(f"load has right half-plane poles {poles.tolist()}")
    w = y.frequencies if _is_frd(y) else grid.omegas()
    re = y.freqresp(w).real
    if np.any(re < -PASSIVITY_TOL):
        i = int(np.argmin(re))
        raise NotPassiveLoad(f"Re Y = {re[i]!r} < 0 at omega = {w[i]!r} rad/s")


def mixed_stability_check(zt: System, y: System, pii: PiiResult,
                          grid: FrequencyGrid = DEFAULT_GRID) -> MixedResult:
    """Sufficient stability test mixing passivity inside the PII band and small gain outside.

    A negative verdict means only that stability could not be certified.
    """
    check_passive_load(y, grid)
    if not _is_frd(zt) and not lti.tf_is_stable(zt):
        return MixedResult(False, "Z_t is unstable; the sector arguments need a stable Z_t "
                                  "(not a proof of instability)")
    w = _loop_omegas(zt, y, grid)
    if pii.interval_empty:
        mask = np.ones(w.shape, dtype=bool)
    else:
        mask = (w < pii.omega1) | (w > pii.omega2)
    prod = np.abs(zt.freqresp(w[mask])) * np.abs(y.freqresp(w[mask]))
    checks = list(zip(w[mask].tolist(), prod.tolist()))
    if pii.interval_empty or pii.omega1 > 0:
        a, b = _maybe_dc(zt), _maybe_dc(y)
        if a is not None and b is not None:
            checks.append((0.0, abs(a) * abs(b)))
    bad = [(om, p) for om, p in checks if p >= 1.0]
    if bad:
        om, p = max(bad, key=lambda t: t[1])
        return MixedResult(False, f"small-gain condition fails outside the passivity interval: "
                                  f"|Z_t||Y| = {p:.6g} at omega = {om:.6g} rad/s; stability is "
                                  f"not guaranteed (not a proof of instability)")
    where = "at every frequency" if pii.interval_empty else \
        f"outside [{pii.omega1:.6g}, {pii.omega2:.6g}] rad/s"
    return MixedResult(True, f"load is passive and |Z_t||Y| < 1 {where}")


def allpass(phase: float, omega: float) -> TransferFunction:
    """Unit-gain cascade of first-order sections (1 - s/a)/(1 + s/a) with the
    given phase lag at ``omega`` (``phase`` in (-2 pi, 0]); at most pi/2 per section."""
    if phase > 0 or phase <= -2 * math.pi:
        raise ValueError(f"phase must lie in (-2 pi, 0], got {phase!r}")
    out = TransferFunction.gain(1.0)
    if phase == 0:
        return out
    n = int(math.ceil(-phase / (math.pi / 2) - 1e-12))
    a = omega / math.tan(-phase / (2 * n))
    section = TransferFunction([-1.0 / a, 1.0], [1.0 / a, 1.0])
    for _ in range(n):
        out = out * section
    return out


def _rightmost(poly: np.ndarray) -> float:
    roots = np.roots(poly)
    return float(np.max(roots.real)) if len(roots) else -math.inf


@dataclass(frozen=True, eq=False)
class DestabilizingGain:
    alpha_star: float
    omega_star: float
    delta: TransferFunction


PHASE_TOL = 1e-9


def destabilizing_gain_search(zt: TransferFunction, grid: FrequencyGrid = DEFAULT_GRID,
                              rtol: float = 1e-9) -> DestabilizingGain:
    """Smallest alpha for which the unit perturbation alpha * Delta destabilises the loop.

    Delta is aligned in phase with Z_t at its peak-gain frequency so that
    Z_t Delta is real and positive there; alpha is then bisected on the sign of
    the rightmost root of the characteristic polynomial of 1 - alpha Z_t Delta.
    """
    if zt.is_zero:
        raise NoPeak("Z_t is identically zero; no finite gain destabilises the loop")
    if not lti.tf_is_stable(zt):
        raise UnstableSystem("nominal loop is already unstable")
    peak = lti.hinf_norm(zt, grid)
    if peak.value == 0:
        raise NoPeak("Z_t has zero gain on the analysis band")
    target = -np.angle(lti.tf_eval(zt, peak.omega))   # in (-pi, pi]
    if abs(target) < PHASE_TOL:
        delta = TransferFunction.gain(1.0)
    elif abs(abs(target) - math.pi) < PHASE_TOL:
        delta = TransferFunction.gain(-1.0)
    elif target < 0:
        delta = allpass(target, peak.omega)
    else:
        delta = -allpass(target - math.pi, peak.omega)

    zd = zt * delta

    def unstable(alpha: float) -> bool:
        # numerator of 1 - alpha Z_t Delta, no cancellation; a vanishing or
        # sign-flipped leading coefficient means a root passed through infinity
        char = np.polysub(zd.den, alpha * zd.num)
        if char[-len(zd.den)] <= 0.0:
            return True
        return _rightmost(np.trim_zeros(char, "f")) >= 0.0

    lo, hi = 0.5 / peak.value, 2.0 / peak.value
    for _ in range(60):
        if not unstable(lo):
            break
        lo /= 2.0
    for _ in range(60):
        if unstable(hi):
            break
        hi *= 2.0
    else:
        raise NoPeak("no destabilising gain found within the search bracket")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if unstable(mid):
            hi = mid
        else:
            lo = mid
    return DestabilizingGain(0.5 * (lo + hi), peak.omega, delta)


def passive_load_sample(seed: int, count: int, ranges: dict | None = None) -> list[LoadModel]:
    """Reproducible MSD loads, log-uniform within each ``(lo, hi)`` range."""
    if count < 1:
        raise ValueError("count must be at least 1")
    ranges = ranges or {"mass": (0.1, 10.0), "damping": (0.01, 10.0), "stiffness": (1.0, 1e4)}
    rng = np.random.default_rng(seed)
    draws = {}
    for key in ("mass", "damping", "stiffness"):
        lo, hi = ranges[key]
        if not 0 < lo <= hi:
            raise ValueError(f"{key} range must be positive with lo <= hi, got {(lo, hi)}")
        draws[key] = np.exp(rng.uniform(math.log(lo), math.log(hi), size=count))
    return [LoadModel(float(m), float(b), float(k))
            for m, b, k in zip(draws["mass"], draws["damping"], draws["stiffness"])]
