import numpy as np
import pytest

from forcebench.lti import TransferFunction

ACCEPTANCE_LINES: list[str] = []


def random_poles(rng, order, lo=0.01, hi=100.0):
    """Stable poles, log-uniform magnitudes, a mix of real and complex pairs."""
    poles = []
    while len(poles) < order:
        mag = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
        if order - len(poles) >= 2 and rng.random() < 0.5:
            zeta = rng.uniform(0.1, 0.95)
            re, im = -zeta * mag, mag * np.sqrt(1 - zeta ** 2)
            poles += [complex(re, im), complex(re, -im)]
        else:
            poles.append(complex(-mag, 0.0))
    return np.array(poles)


def random_stable_tf(rng, order, strictly_proper=True, lo=0.01, hi=100.0):
    den = np.real(np.poly(random_poles(rng, order, lo, hi)))
    nnum = order if strictly_proper else order + 1
    num = rng.normal(size=nnum) * den[-1] if nnum else np.ones(1)
    return TransferFunction(num, den)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
