"""Relay experiment and Ziegler-Nichols table."""

import pytest

from pidlab.errors import NoOscillationError, NotConvergedError, NumericDomainError
from pidlab.pid import GainBounds, PidGains
from pidlab.plant import PlantParams
from pidlab.relay import RelayResult, relay_autotune, zn_gains, ziegler_nichols_table


class TestRelayExperiment:
    def test_default_plant_produces_limit_cycle(self):
        result = relay_autotune(PlantParams())
        assert result.ultimate_gain > 0.0
        assert result.ultimate_period > 0.0
        assert result.amplitude > 0.0
        # the loop cannot cycle faster than twice the transport delay
        assert result.ultimate_period >= 2 * PlantParams().actuation_delay

    def test_ku_invariant_under_relay_amplitude(self):
        # linear plant: doubling h doubles a, Ku = 4h/(pi a) unchanged
        r1 = relay_autotune(PlantParams(), amplitude=1.0)
        r2 = relay_autotune(PlantParams(), amplitude=2.0)
        assert r2.ultimate_gain == pytest.approx(r1.ultimate_gain, rel=0.05)
        assert r2.ultimate_period == pytest.approx(r1.ultimate_period, rel=0.05)
        assert r2.amplitude == pytest.approx(2.0 * r1.amplitude, rel=0.05)

    def test_deterministic_without_noise(self):
        a = relay_autotune(PlantParams())
        b = relay_autotune(PlantParams())
        assert a == b

    def test_damped_double_integrator_has_no_cycle(self):
        # no delay and no spring: the relay chatters at the sampling rate
        params = PlantParams(actuation_delay=0.0, stiffness=0.0)
        with pytest.raises(NoOscillationError):
            relay_autotune(params)

    def test_budget_exhaustion_reports_no_oscillation(self):
        with pytest.raises((NoOscillationError, NotConvergedError)):
            relay_autotune(PlantParams(), max_steps=40)

    def test_amplitude_below_noise_floor_rejected(self):
        params = PlantParams(noise_std=0.05)
        import numpy as np

        with pytest.raises(NoOscillationError):
            relay_autotune(params, amplitude=1e-6, rng=np.random.default_rng(0))

    def test_rejects_nonpositive_amplitude(self):
        with pytest.raises(NumericDomainError):
            relay_autotune(PlantParams(), amplitude=0.0)


class TestZieglerNichols:
    def test_reference_row_exact(self):
        gains = ziegler_nichols_table(2.0, 1.0)
        # 0.6*2, 1.2/0.5, 1.2*0.125 are all exact in binary
        assert gains.kp == 1.2
        assert gains.ki == 2.4
        assert gains.kd == 0.15

    def test_second_reference_row(self):
        gains = ziegler_nichols_table(1.0, 2.0)
        assert gains.kp == pytest.approx(0.6)
        assert gains.ki == pytest.approx(0.6)
        assert gains.kd == pytest.approx(0.15)

    def test_kp_strictly_increasing_in_ku(self):
        kps = [ziegler_nichols_table(ku, 1.0).kp for ku in (0.5, 1.0, 2.0, 10.0, 60.0)]
        assert all(a < b for a, b in zip(kps, kps[1:]))

    def test_gains_clamped_into_bounds(self):
        result = relay_autotune(PlantParams())
        gains = zn_gains(result)
        bounds = GainBounds()
        assert bounds.kp_min <= gains.kp <= bounds.kp_max
        assert bounds.ki_min <= gains.ki <= bounds.ki_max
        assert bounds.kd_min <= gains.kd <= bounds.kd_max

    def test_default_plant_saturates_the_box(self):
        # the stiff default plant tunes far outside the working box
        result = relay_autotune(PlantParams())
        raw = ziegler_nichols_table(result.ultimate_gain, result.ultimate_period)
        assert raw.kp > 2.4 and raw.ki > 2.0 and raw.kd > 0.02
        assert zn_gains(result) == PidGains(2.4, 2.0, 0.02)

    def test_rejects_nonpositive_inputs(self):
        with pytest.raises(NumericDomainError):
            ziegler_nichols_table(0.0, 1.0)
        with pytest.raises(NumericDomainError):
            ziegler_nichols_table(1.0, -2.0)
