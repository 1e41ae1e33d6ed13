"""Exception and warning types raised across the package."""

from __future__ import annotations


class ForcebenchError(Exception):
    """Base class for every error raised by forcebench."""


class ZeroDenominator(ForcebenchError, ValueError):
    pass


class PoleOnAxis(ForcebenchError, ArithmeticError):
    def __init__(self, omega: float):
        super().__init__(f"denominator vanishes on the imaginary axis at omega={omega!r} rad/s")
        self.omega = omega


class DivisionByZeroSystem(ForcebenchError, ZeroDivisionError):
    pass


class ImproperSystem(ForcebenchError, ValueError):
    pass


class NotStrictlyProper(ForcebenchError, ValueError):
    pass


class UnstableSystem(ForcebenchError, ValueError):
    pass


class ZeroDCGain(ForcebenchError, ValueError):
    pass


class NotSettled(ForcebenchError, ValueError):
    pass


class ParseError(ForcebenchError, ValueError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None,
                 column: int | None = None):
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        loc = ", ".join(where)
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line
        self.column = column


class NonMonotonicFrequency(ForcebenchError, ValueError):
    pass


class DuplicateFrequency(ForcebenchError, ValueError):
    pass


class OutOfRange(ForcebenchError, ValueError):
    pass


class BandMismatch(ForcebenchError, ValueError):
    pass


class SingularBilinear(ForcebenchError, ArithmeticError):
    def __init__(self, omega: float):
        super().__init__(f"1 + G(jw) vanishes at omega={omega!r} rad/s")
        self.omega = omega


class DegenerateLoop(ForcebenchError, ValueError):
    pass


class NotPassiveLoad(ForcebenchError, ValueError):
    pass


class NoPeak(ForcebenchError, ValueError):
    pass


class IllConditioned(ForcebenchError, ArithmeticError):
    pass


class InsufficientData(ForcebenchError, ValueError):
    pass


class ForcebenchWarning(UserWarning):
    """Base class for non-fatal conditions collected into report flags."""


class TailWarning(ForcebenchWarning):
    """Frequency data does not span enough band for a reliable integral."""


class DcApproximationWarning(ForcebenchWarning):
    """omega = 0 was replaced by the lowest measured frequency."""


class UnresolvedBandwidth(ForcebenchWarning):
    """No -3 dB crossing inside the analysis band."""


class UnstableFitWarning(ForcebenchWarning):
    """A rational fit returned poles in the closed right half-plane."""
