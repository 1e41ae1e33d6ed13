"""Sampled frequency-response data: loading, sampling and Bode-style interpolation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DuplicateFrequency, NonMonotonicFrequency, OutOfRange, ParseError
from .grid import FrequencyGrid
from .lti import TransferFunction

RECT_HEADER = ("omega_rad_s", "real", "imag")
POLAR_HEADER = ("omega_rad_s", "mag_db", "phase_deg")


@dataclass(frozen=True, eq=False)
class FrequencyResponseData:
    """Complex response sampled at strictly increasing positive frequencies."""

    frequencies: np.ndarray
    responses: np.ndarray
    units: str = ""

    def __post_init__(self):
        w = np.asarray(self.frequencies, dtype=float).ravel()
        h = np.asarray(self.responses, dtype=complex).ravel()
        if w.shape != h.shape:
            raise ValueError(f"{w.size} frequencies but {h.size} responses")
        if w.size < 2:
            raise ValueError("need at least 2 frequency points")
        if not np.all(np.isfinite(w)) or not np.all(np.isfinite(h)):
            raise ValueError("frequencies and responses must be finite")
        if w[0] <= 0:
            raise ValueError("frequencies must be positive")
        steps = np.diff(w)
        if np.any(steps == 0):
            raise DuplicateFrequency(f"duplicate frequency {w[1:][steps == 0][0]!r}")
        if np.any(steps < 0):
            raise NonMonotonicFrequency("frequencies must be strictly increasing")
        w.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "frequencies", w)
        object.__setattr__(self, "responses", h)
        mag = np.abs(h)
        with np.errstate(divide="ignore"):
            object.__setattr__(self, "_logw", np.log(w))
            object.__setattr__(self, "_logmag", np.log(mag))
        object.__setattr__(self, "_phase", np.unwrap(np.angle(h)))

    def __len__(self):
        return self.frequencies.size

    @property
    def band(self) -> tuple[float, float]:
        return float(self.frequencies[0]), float(self.frequencies[-1])

    def freqresp(self, omega) -> np.ndarray:
        """Interpolated response; linear in log-frequency for log-magnitude and phase."""
        q = np.asarray(omega, dtype=float)
        qa = np.atleast_1d(q)
        lo, hi = self.band
        if np.any(qa < lo) or np.any(qa > hi) or np.any(~np.isfinite(qa)):
            bad = qa[(qa < lo) | (qa > hi) | ~np.isfinite(qa)][0]
            raise OutOfRange(f"omega={bad!r} outside measured band [{lo!r}, {hi!r}]")
        w, h = self.frequencies, self.responses
        idx = np.clip(np.searchsorted(w, qa), 0, w.size - 1)
        exact = w[idx] == qa
        out = np.empty(qa.shape, dtype=complex)
        out[exact] = h[idx[exact]]
        rest = ~exact
        if np.any(rest):
            x = np.log(qa[rest])
            lm = np.interp(x, self._logw, self._logmag)
            ph = np.interp(x, self._logw, self._phase)
            val = np.exp(lm + 1j * ph)
            # a zero sample makes log-magnitude useless; fall back to rectangular
            hole = ~np.isfinite(lm)
            if np.any(hole):
                val[hole] = (np.interp(x[hole], self._logw, h.real)
                             + 1j * np.interp(x[hole], self._logw, h.imag))
            out[rest] = val
        return out if q.ndim else out[0]

    def __call__(self, omega):
        return self.freqresp(omega)


def frd_sample(tf: TransferFunction, grid: FrequencyGrid) -> FrequencyResponseData:
    w = grid.omegas()
    return FrequencyResponseData(w, tf.freqresp(w), tf.units)


def frd_interp(frd: FrequencyResponseData, omega: float) -> complex:
    return complex(frd.freqresp(float(omega)))


def _parse_float(text: str, path, line: int, column: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", path, line, column) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {text!r}", path, line, column)
    return value


def frd_from_csv(path, units: str = "") -> FrequencyResponseData:
    """Read an FRD CSV file.

    The header is either ``omega_rad_s,real,imag`` or ``omega_rad_s,mag_db,phase_deg``;
    lines starting with ``#`` are comments. Rows may come in any order.
    """
    path = Path(path)
    header = None
    rows: list[tuple[int, float, complex]] = []
    with path.open(newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = [f.strip() for f in next(csv.reader([stripped]))]
            if header is None:
                header = tuple(fields)
                if header not in (RECT_HEADER, POLAR_HEADER):
                    raise ParseError(f"unrecognised header {stripped!r}; expected "
                                     f"{','.join(RECT_HEADER)} or {','.join(POLAR_HEADER)}",
                                     str(path), lineno)
                continue
            if len(fields) != 3:
                raise ParseError(f"expected 3 columns, got {len(fields)}", str(path), lineno)
            w, a, b = (_parse_float(f, str(path), lineno, col) for col, f in enumerate(fields, 1))
            if w <= 0:
                raise ParseError(f"frequency must be positive, got {w!r}", str(path), lineno, 1)
            if header == RECT_HEADER:
                h = complex(a, b)
            else:
                h = 10.0 ** (a / 20.0) * np.exp(1j * math.radians(b))
            rows.append((lineno, w, h))
    if header is None:
        raise ParseError("empty file, no header found", str(path))
    rows.sort(key=lambda r: r[1])
    for (l0, w0, _), (l1, w1, _) in zip(rows, rows[1:]):
        if w0 == w1:
            raise DuplicateFrequency(f"{path}: frequency {w0!r} appears on lines {l0} and {l1}")
    if len(rows) < 2:
        raise ParseError(f"need at least 2 data rows, got {len(rows)}", str(path))
    return FrequencyResponseData([r[1] for r in rows], [r[2] for r in rows], units)


def frd_to_csv(frd: FrequencyResponseData, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECT_HEADER)
        for w, h in zip(frd.frequencies, frd.responses):
            writer.writerow([repr(float(w)), repr(float(h.real)), repr(float(h.imag))])
