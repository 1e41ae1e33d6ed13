import math

import numpy as np
import pytest

from forcebench.coupling import (LoadModel, allpass, check_passive_load, coupled_response,
                                 destabilizing_gain_search, load_admittance, mixed_stability_check,
                                 passive_load_sample, small_gain_check)
from forcebench.errors import DegenerateLoop, NoPeak, NotPassiveLoad, UnstableSystem
from forcebench.grid import DEFAULT_GRID
from forcebench.lti import TransferFunction, hinf_norm, tf_eval, tf_is_stable, tf_new
from forcebench.metrics import lrt, pii

from conftest import random_stable_tf

ONE = TransferFunction.gain(1.0)
ZERO = TransferFunction.gain(0.0)


class TestLoad:
    def test_unit_msd(self):
        y = load_admittance(LoadModel(1, 1, 1))
        assert y == tf_new([1, 0], [1, 1, 1])

    def test_free_mass_unreduced(self):
        y = load_admittance(LoadModel(1))
        assert y.num.tolist() == [1.0, 0.0] and y.den.tolist() == [1.0, 0.0, 0.0]

    def test_spring_mass(self):
        assert load_admittance(LoadModel(2, 0, 8)) == tf_new([1, 0], [2, 0, 8])

    @pytest.mark.parametrize("kwargs", [dict(mass=0), dict(mass=1, damping=-1),
                                        dict(mass=1, stiffness=-1)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            LoadModel(**kwargs)

    def test_dict_round_trip(self):
        load = LoadModel(2.0, 0.5, 30.0)
        assert LoadModel.from_dict(load.to_dict()) == load


class TestCoupledResponse:
    def test_zero_transparency(self):
        zb = tf_new([1], [1, 2])
        cs = coupled_response(zb, ZERO, load_admittance(LoadModel(1, 1, 1)))
        w = DEFAULT_GRID.omegas()[::100]
        np.testing.assert_allclose(cs.t_y.freqresp(w), zb.freqresp(w), rtol=1e-12)
        assert cs.stable

    def test_static(self):
        cs = coupled_response(ONE, TransferFunction.gain(0.5), ONE)
        assert cs.t_y == TransferFunction.gain(2.0)

    def test_unstable_pole_at_one(self):
        cs = coupled_response(tf_new([1], [1, 1]), tf_new([2], [1, 1]), ONE)
        assert not cs.stable
        assert np.max(cs.characteristic_poles.real) == pytest.approx(1.0)
        assert tf_eval(cs.t_y, 0.5) == pytest.approx(1 / (0.5j - 1))

    def test_degenerate(self):
        with pytest.raises(DegenerateLoop):
            coupled_response(ONE, ONE, ONE)

    @pytest.mark.parametrize("seed", range(10))
    def test_pointwise_agreement(self, seed):
        rng = np.random.default_rng(seed)
        zb, zt = random_stable_tf(rng, 2), random_stable_tf(rng, 3)
        y = load_admittance(passive_load_sample(seed, 1)[0])
        cs = coupled_response(zb, zt, y)
        w = DEFAULT_GRID.omegas()
        direct = zb.freqresp(w) / (1 - zt.freqresp(w) * y.freqresp(w))
        np.testing.assert_allclose(cs.t_y.freqresp(w), direct, rtol=1e-9)


class TestSmallGain:
    def test_holds_at_dc(self):
        res = small_gain_check(TransferFunction.gain(0.4), tf_new([1], [1, 1]))
        assert res.holds and res.worst_omega == 0.0
        assert res.worst_product == pytest.approx(0.4)

    def test_fails(self):
        res = small_gain_check(TransferFunction.gain(2), ONE)
        assert not res.holds and res.worst_product == pytest.approx(2.0)

    def test_zero(self):
        res = small_gain_check(ZERO, ONE)
        assert res.holds and res.worst_product == 0.0


class TestMixed:
    def test_lowpass_guaranteed(self):
        zt = tf_new([-1], [1, 1])
        res = mixed_stability_check(zt, load_admittance(LoadModel(1, 1, 1)), pii(zt, 0.05))
        assert res.guaranteed

    def test_zero_transparency(self):
        res = mixed_stability_check(ZERO, load_admittance(LoadModel(0.3, 0.1, 5)), pii(ZERO, 0.05))
        assert res.guaranteed

    def test_active_load(self):
        zt = tf_new([-1], [1, 1])
        with pytest.raises(NotPassiveLoad):
            mixed_stability_check(zt, TransferFunction.gain(-1), pii(zt, 0.05))

    def test_unstable_load_rejected(self):
        with pytest.raises(NotPassiveLoad):
            check_passive_load(tf_new([1], [1, -1]))

    def test_not_guaranteed_is_not_instability_claim(self):
        zt = TransferFunction.gain(2.0)
        res = mixed_stability_check(zt, ONE, pii(zt, 0.05))
        assert not res.guaranteed and "not a proof of instability" in res.reason

    def test_narrow_load_resonance_is_seen(self):
        # |Y| peaks at 1/b = 1e3 in a band far narrower than one grid step
        y = load_admittance(LoadModel(1.0, 1e-3, 587.0))
        zt = TransferFunction.gain(-0.01)
        res = mixed_stability_check(zt, y, pii(zt, 0.05))
        assert not res.guaranteed
        assert not small_gain_check(zt, y).holds

    @pytest.mark.parametrize("seed", range(20))
    def test_sufficiency(self, seed):
        rng = np.random.default_rng(1000 + seed)
        zt = random_stable_tf(rng, int(rng.integers(1, 4)), strictly_proper=False)
        zt = zt * float(np.exp(rng.uniform(-3, 1)))
        zb = random_stable_tf(rng, 2)
        p = pii(zt, 0.05)
        for load in passive_load_sample(seed, 5):
            y = load_admittance(load)
            if mixed_stability_check(zt, y, p).guaranteed:
                assert coupled_response(zb, zt, y).stable


class TestAllpass:
    @pytest.mark.parametrize("phase", [-0.3, -math.pi / 2, -2.5, -4.0, -6.0])
    def test_phase_and_gain(self, phase):
        d = allpass(phase, 3.0)
        h = tf_eval(d, 3.0)
        assert abs(h) == pytest.approx(1.0, rel=1e-12)
        assert np.angle(h) == pytest.approx(math.remainder(phase, 2 * math.pi), abs=1e-9)
        assert tf_is_stable(d)

    def test_zero_phase(self):
        assert allpass(0.0, 1.0) == ONE


class TestDestabilizingGain:
    def test_first_order(self):
        res = destabilizing_gain_search(tf_new([2], [1, 1]))
        assert res.omega_star == 0.0 and res.delta == ONE
        assert res.alpha_star == pytest.approx(0.5, rel=1e-6)

    def test_resonance(self):
        res = destabilizing_gain_search(tf_new([1], [1, 0.2, 1]))
        assert res.alpha_star == pytest.approx(0.19900, rel=5e-3)

    def test_static(self):
        assert destabilizing_gain_search(TransferFunction.gain(4)).alpha_star == pytest.approx(0.25)

    def test_zero(self):
        with pytest.raises(NoPeak):
            destabilizing_gain_search(ZERO)

    def test_unstable(self):
        with pytest.raises(UnstableSystem):
            destabilizing_gain_search(tf_new([1], [1, -1]))

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_lrt_and_flips(self, seed):
        rng = np.random.default_rng(500 + seed)
        zt = random_stable_tf(rng, int(rng.integers(1, 5)))
        res = destabilizing_gain_search(zt)
        assert res.alpha_star == pytest.approx(lrt(zt), rel=0.02)
        assert res.alpha_star * hinf_norm(zt).value == pytest.approx(1.0, rel=1e-6)
        zb = tf_new([1], [1, 1])
        assert coupled_response(zb, zt, 0.99 * res.alpha_star * res.delta).stable
        assert not coupled_response(zb, zt, 1.01 * res.alpha_star * res.delta).stable


class TestLoadSample:
    def test_deterministic(self):
        assert passive_load_sample(42, 3) == passive_load_sample(42, 3)

    def test_degenerate_ranges(self):
        ranges = {"mass": (1, 1), "damping": (1, 1), "stiffness": (1, 1)}
        assert passive_load_sample(0, 1, ranges) == [LoadModel(1, 1, 1)]

    def test_population(self):
        loads = passive_load_sample(1, 100)
        assert len(loads) == 100
        for ld in loads:
            assert 0.1 <= ld.mass <= 10 and 0.01 <= ld.damping <= 10
            assert 1 <= ld.stiffness <= 1e4
            check_passive_load(load_admittance(ld))

    def test_count(self):
        with pytest.raises(ValueError):
            passive_load_sample(0, 0)
