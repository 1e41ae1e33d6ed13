import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forcebench.errors import (DivisionByZeroSystem, ImproperSystem, NotSettled, NotStrictlyProper,
                               PoleOnAxis, UnstableSystem, ZeroDCGain, ZeroDenominator)
from forcebench.grid import FrequencyGrid
from forcebench.lti import (TimeSeries, TransferFunction, bandwidth, h2_norm, hinf_norm, minreal,
                            step_metrics, step_response, tf_div, tf_eval, tf_is_stable, tf_mul,
                            tf_new, tf_poles, tf_to_ss)

from conftest import random_stable_tf

ZETA = 0.1
RESONANT = tf_new([1], [1, 2 * ZETA, 1])


class TestConstruction:
    def test_first_order(self):
        tf = tf_new([1], [1, 1])
        assert tf.num.tolist() == [1.0] and tf.den.tolist() == [1.0, 1.0]

    def test_monic_normalisation(self):
        tf = tf_new([2, 0], [2, 2, 2])
        assert tf.num.tolist() == [1.0, 0.0]
        assert tf.den.tolist() == [1.0, 1.0, 1.0]

    def test_leading_zero_stripped(self):
        assert tf_new([0, 1], [1, 1]) == tf_new([1], [1, 1])

    def test_zero_denominator(self):
        with pytest.raises(ZeroDenominator):
            tf_new([1], [0, 0])

    def test_zero_numerator_is_zero_system(self):
        tf = tf_new([0, 0], [1, 3])
        assert tf.is_zero and tf.num.tolist() == [0.0]

    def test_immutable(self):
        tf = tf_new([1], [1, 1])
        with pytest.raises(ValueError):
            tf.num[0] = 3.0


class TestEval:
    def test_hand_values(self):
        g = tf_new([1], [1, 1])
        assert tf_eval(g, 1.0) == pytest.approx(0.5 - 0.5j, abs=1e-15)
        assert tf_eval(g, 0.0) == 1 + 0j

    def test_band_pass_at_centre(self):
        # j / (-1 + j + 1) = 1
        assert tf_eval(tf_new([1, 0], [1, 1, 1]), 1.0) == pytest.approx(1 + 0j, abs=1e-15)

    def test_pole_on_axis(self):
        with pytest.raises(PoleOnAxis):
            tf_eval(tf_new([1], [1, 0, 1]), 1.0)

    def test_negative_frequency_rejected(self):
        with pytest.raises(ValueError):
            tf_eval(tf_new([1], [1, 1]), -1.0)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.floats(1e-3, 1e4))
    def test_conjugate_symmetry(self, seed, omega):
        g = random_stable_tf(np.random.default_rng(seed), 3)
        s = 1j * omega
        direct = np.polyval(g.num, s) / np.polyval(g.den, s)
        mirrored = np.polyval(g.num, -s) / np.polyval(g.den, -s)
        assert mirrored == pytest.approx(direct.conjugate(), rel=1e-12)
        assert abs(tf_eval(g, omega)) == pytest.approx(abs(mirrored), rel=1e-12)


class TestPoles:
    def test_complex_pair(self):
        p = sorted(tf_poles(tf_new([1], [1, 2, 2])), key=lambda z: z.imag)
        assert p == pytest.approx([-1 - 1j, -1 + 1j])

    def test_first_order(self):
        assert tf_poles(tf_new([1], [1, 1])) == pytest.approx([-1])

    def test_real_pair(self):
        assert sorted(tf_poles(tf_new([1], [1, 0, -1])).real) == pytest.approx([-1, 1])

    def test_scaling_keeps_poles(self, rng):
        g = random_stable_tf(rng, 4)
        np.testing.assert_allclose(np.sort_complex(tf_poles(3.5 * g)),
                                   np.sort_complex(tf_poles(g)))


class TestStability:
    @pytest.mark.parametrize("tf, expected", [
        (tf_new([1], [1, 1]), True),
        (tf_new([1], [1, -1]), False),
        (tf_new([1, 1], np.polymul([1, 1], [1, 2])), True),
        (tf_new([1, -1], np.polymul([1, -1], [1, 2])), True),
        (tf_new([1], [1, 0, 1]), False),
        (TransferFunction.gain(3.0), True),
    ])
    def test_verdicts(self, tf, expected):
        assert tf_is_stable(tf) is expected

    def test_minreal_removes_common_root(self):
        g = minreal(tf_new([1, -1], np.polymul([1, -1], [1, 2])))
        assert g.den == pytest.approx([1, 2]) and g.num == pytest.approx([1])


class TestAlgebra:
    def test_add(self):
        g = tf_new([1], [1, 1])
        assert g + g == tf_new([2], [1, 1])

    def test_mul(self):
        assert tf_mul(tf_new([1], [1, 1]), tf_new([1], [1, 2])) == tf_new([1], [1, 3, 2])

    def test_div_feedback_form(self):
        k = 0.5
        got = tf_div(TransferFunction.gain(1), 1 - tf_new([k], [1, 1]))
        assert got == tf_new([1, 1], [1, 0.5])

    def test_no_automatic_cancellation(self):
        g = tf_new([1], [1, 1])
        assert (g / g).den_order == 1

    def test_divide_by_zero_system(self):
        with pytest.raises(DivisionByZeroSystem):
            tf_new([1], [1, 1]) / TransferFunction.gain(0)


class TestRealization:
    def test_first_order(self):
        ss = tf_to_ss(tf_new([1], [1, 1]))
        assert ss.A.tolist() == [[-1.0]] and ss.B.tolist() == [[1.0]]
        assert ss.C.tolist() == [[1.0]] and ss.D == 0.0

    def test_static_gain(self):
        ss = tf_to_ss(TransferFunction.gain(3))
        assert ss.order == 0 and ss.D == 3.0

    def test_biproper_split(self):
        ss = tf_to_ss(tf_new([1, 1], [1, 2]))
        assert ss.D == 1.0
        assert ss.A.tolist() == [[-2.0]] and ss.C.tolist() == [[-1.0]]

    def test_improper(self):
        with pytest.raises(ImproperSystem):
            tf_to_ss(tf_new([1, 0, 0], [1, 1]))

    @pytest.mark.parametrize("seed", range(20))
    def test_fidelity(self, seed):
        rng = np.random.default_rng(seed)
        g = random_stable_tf(rng, int(rng.integers(1, 7)), strictly_proper=bool(seed % 2))
        w = FrequencyGrid().omegas()[::50]
        np.testing.assert_allclose(tf_to_ss(g).freqresp(w), g.freqresp(w), rtol=1e-9)


def _h2_quadrature(g):
    # independent route: trapezoid of |H|^2 / pi on a dense log grid
    w = np.logspace(-4, 5, 4000)
    return math.sqrt(np.trapezoid(np.abs(g.freqresp(w)) ** 2, w) / math.pi)


class TestH2:
    def test_first_order(self):
        assert h2_norm(tf_new([1], [1, 1])) == pytest.approx(math.sqrt(0.5), abs=1e-5)

    def test_faster_pole(self):
        assert h2_norm(tf_new([1], [1, 2])) == pytest.approx(0.5, rel=1e-12)

    def test_unstable(self):
        with pytest.raises(UnstableSystem):
            h2_norm(tf_new([1], [1, -1]))

    def test_feedthrough(self):
        with pytest.raises(NotStrictlyProper):
            h2_norm(tf_new([1, 1], [1, 2]))

    @pytest.mark.parametrize("seed", range(25))
    def test_against_quadrature(self, seed):
        rng = np.random.default_rng(100 + seed)
        g = random_stable_tf(rng, int(rng.integers(1, 6)))
        assert h2_norm(g) == pytest.approx(_h2_quadrature(g), rel=5e-3)


class TestHinf:
    def test_low_pass_peaks_at_dc(self):
        assert tuple(hinf_norm(tf_new([1], [1, 1]))) == (1.0, 0.0)

    def test_resonance(self):
        peak = hinf_norm(RESONANT)
        assert peak.value == pytest.approx(1 / (2 * ZETA * math.sqrt(1 - ZETA ** 2)), abs=1e-3)
        assert peak.omega == pytest.approx(math.sqrt(1 - 2 * ZETA ** 2), rel=1e-4)

    def test_static(self):
        assert tuple(hinf_norm(TransferFunction.gain(2))) == (2.0, 0.0)

    def test_unstable(self):
        with pytest.raises(UnstableSystem):
            hinf_norm(tf_new([1], [1, -1]))

    @pytest.mark.parametrize("seed", range(10))
    def test_scaling(self, seed):
        g = random_stable_tf(np.random.default_rng(seed), 3)
        c = -2.75
        assert hinf_norm(c * g).value == pytest.approx(abs(c) * hinf_norm(g).value, rel=1e-12)
        assert h2_norm(c * g) == pytest.approx(abs(c) * h2_norm(g), rel=1e-12)


class TestStep:
    def test_first_order_sample(self):
        ts = step_response(tf_new([1], [1, 1]), t_end=2.0, dt=0.01)
        assert ts.y[100] == pytest.approx(1 - math.exp(-1), abs=1e-6)

    def test_static(self):
        ts = step_response(TransferFunction.gain(1), t_end=1.0, dt=0.1)
        assert np.all(ts.y == 1.0)

    def test_final_value(self):
        ts = step_response(tf_new([1], [1, 1, 1]), t_end=60.0)
        assert ts.y[-1] == pytest.approx(1.0, abs=1e-4)

    def test_unstable(self):
        with pytest.raises(UnstableSystem):
            step_response(tf_new([1], [1, -1]))

    def test_improper(self):
        with pytest.raises(ImproperSystem):
            step_response(tf_new([1, 0], [1]))


class TestStepMetrics:
    def test_first_order(self):
        m = step_metrics(step_response(tf_new([1], [1, 1])), 1.0)
        assert m.overshoot == 0.0
        assert m.rise_time_10_90 == pytest.approx(math.log(9), abs=1e-3)
        assert m.settling_time_2pct == pytest.approx(math.log(50), abs=1e-2)

    def test_underdamped_overshoot(self):
        m = step_metrics(step_response(RESONANT), 1.0)
        expected = math.exp(-math.pi * ZETA / math.sqrt(1 - ZETA ** 2))
        assert m.overshoot == pytest.approx(expected, abs=1e-3)

    def test_static(self):
        m = step_metrics(step_response(TransferFunction.gain(1)), 1.0)
        assert (m.overshoot, m.rise_time_10_90) == (0.0, 0.0)

    def test_not_settled(self):
        ts = step_response(tf_new([1], [1, 1]), t_end=1.0)
        with pytest.raises(NotSettled):
            step_metrics(ts, 1.0)

    def test_negative_gain_normalised(self):
        ts = step_response(tf_new([-2], [1, 1]))
        m = step_metrics(ts, -2.0)
        assert m.rise_time_10_90 == pytest.approx(math.log(9), abs=1e-3)

    def test_zero_dc(self):
        with pytest.raises(ZeroDCGain):
            step_metrics(TimeSeries(np.arange(3.0), np.zeros(3)), 0.0)


class TestBandwidth:
    def test_first_order(self):
        bw = bandwidth(tf_new([1], [1, 1]))
        assert bw.omega == pytest.approx(1.0, abs=1e-5) and not bw.unresolved

    def test_scaled(self):
        assert bandwidth(tf_new([10], [1, 10])).omega == pytest.approx(10.0, abs=1e-4)

    def test_static_unresolved(self):
        bw = bandwidth(TransferFunction.gain(2))
        assert bw.unresolved and bw.omega == FrequencyGrid().omega_max

    def test_zero_dc(self):
        with pytest.raises(ZeroDCGain):
            bandwidth(tf_new([1, 0], [1, 1]))

    def test_crossing_below_grid(self):
        bw = bandwidth(tf_new([1e-4], [1, 1e-4]))
        assert bw.omega == pytest.approx(1e-4, rel=1e-6)
