"""Estimator wrappers: sklearn contract, trials, and the three tuners."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pidlab.dqn import TrainConfig
from pidlab.errors import NumericDomainError
from pidlab.nn import init_net
from pidlab.pid import BASE_GAINS, GainBounds, PidGains
from pidlab.plant import PlantParams
from pidlab.tuners import DqnPidTuner, FuzzyPidTuner, TrialRow, ZieglerNicholsTuner

SMALL_TRAIN = TrainConfig(
    episodes=2,
    steps_per_episode=10,
    warmup_steps=2,
    batch_size=8,
    buffer_capacity=100,
    rollout_ticks=10,
    hidden_sizes=(8, 8),
    sync_interval=5,
    exploration_steps=20,
)


class TestEstimatorContract:
    def test_get_params_round_trips_through_set_params(self):
        tuner = ZieglerNicholsTuner(relay_amplitude=2.0, rollout_ticks=50)
        params = tuner.get_params()
        assert params["relay_amplitude"] == 2.0
        assert params["rollout_ticks"] == 50
        assert params["plant"] is None
        other = ZieglerNicholsTuner().set_params(**params)
        assert other.get_params() == params

    def test_clone_keeps_params_and_drops_fit_state(self):
        tuner = ZieglerNicholsTuner(rollout_ticks=20).fit()
        twin = clone(tuner)
        assert twin.rollout_ticks == 20
        with pytest.raises(NotFittedError):
            twin.predict([0.1])

    def test_unfitted_tuners_refuse_to_run(self):
        for tuner in (ZieglerNicholsTuner(), FuzzyPidTuner(), DqnPidTuner()):
            with pytest.raises(NotFittedError):
                tuner.predict([0.1])
            with pytest.raises(NotFittedError):
                tuner.score([0.1])

    def test_fit_returns_self(self):
        tuner = FuzzyPidTuner()
        assert tuner.fit() is tuner

    def test_setpoint_validation(self):
        tuner = FuzzyPidTuner().fit()
        with pytest.raises(NumericDomainError):
            tuner.predict([])
        with pytest.raises(NumericDomainError):
            tuner.predict(np.zeros((3, 2)))
        with pytest.raises(NumericDomainError):
            tuner.predict([0.1, float("nan")])
        # a single-column matrix is accepted as a command sequence
        assert tuner.predict(np.full((3, 1), 0.1)).shape == (3,)


class TestTrials:
    def test_rows_echo_the_commands_in_order(self):
        tuner = ZieglerNicholsTuner().fit()
        setpoints = [0.05, 0.1, -0.02]
        rows = tuner.run_trial(setpoints)
        assert len(rows) == 3
        assert [r.step for r in rows] == [0, 1, 2]
        assert [r.setpoint for r in rows] == setpoints
        for row in rows:
            assert isinstance(row, TrialRow)
            assert row.error == pytest.approx(row.setpoint - row.measured)

    def test_predict_and_score_agree_with_the_rows(self):
        tuner = ZieglerNicholsTuner().fit()
        setpoints = [0.1, 0.2, 0.05, 0.15]
        rows = tuner.run_trial(setpoints)
        assert np.array_equal(tuner.predict(setpoints), [r.measured for r in rows])
        expected = -float(np.mean([abs(r.error) for r in rows]))
        assert tuner.score(setpoints) == pytest.approx(expected)

    def test_long_rollouts_settle_onto_the_setpoint(self):
        # integral action drives the settled error to zero given time
        tuner = ZieglerNicholsTuner(rollout_ticks=5000).fit()
        rows = tuner.run_trial([0.1])
        assert abs(rows[0].error) < 1e-3


class TestZieglerNicholsTuner:
    def test_fit_stores_the_relay_result_and_corner_gains(self):
        tuner = ZieglerNicholsTuner().fit()
        assert tuner.relay_result_.ultimate_gain > 0.0
        # the default plant tunes so hot that every gain clamps at its cap
        bounds = GainBounds()
        assert tuner.gains_.as_tuple() == (bounds.kp_max, bounds.ki_max, bounds.kd_max)

    def test_gains_never_move_during_a_trial(self):
        tuner = ZieglerNicholsTuner().fit()
        rows = tuner.run_trial([0.1, -0.1, 0.3])
        gains = {(r.kp, r.ki, r.kd) for r in rows}
        assert len(gains) == 1


class TestFuzzyPidTuner:
    def test_fit_starts_from_the_base_gains(self):
        tuner = FuzzyPidTuner().fit()
        assert tuner.gains_.as_tuple() == BASE_GAINS.as_tuple()
        assert tuner.table_.kp.shape == (7, 7)
        assert tuner.scale_.error_range == 0.2

    def test_tracking_error_moves_the_gains(self):
        tuner = FuzzyPidTuner().fit()
        rows = tuner.run_trial([0.15, 0.15])
        assert rows[0].kp > BASE_GAINS.kp
        bounds = GainBounds()
        for row in rows:
            assert bounds.kp_min <= row.kp <= bounds.kp_max
            assert bounds.ki_min <= row.ki <= bounds.ki_max
            assert bounds.kd_min <= row.kd <= bounds.kd_max

    def test_all_zero_rule_file_freezes_the_gains(self, tmp_path):
        row = " ".join(["ZO"] * 7)
        block = "\n".join([row] * 7)
        path = tmp_path / "rules.txt"
        path.write_text(f"[kp]\n{block}\n[ki]\n{block}\n[kd]\n{block}\n", encoding="utf-8")
        tuner = FuzzyPidTuner(rules_path=path).fit()
        rows = tuner.run_trial([0.15, 0.15])
        assert {(r.kp, r.ki, r.kd) for r in rows} == {BASE_GAINS.as_tuple()}


class TestDqnPidTuner:
    def test_fit_trains_and_exposes_the_report(self):
        tuner = DqnPidTuner(train_config=SMALL_TRAIN, random_state=0).fit()
        assert len(tuner.report_.logs) == SMALL_TRAIN.episodes
        assert tuner.network_ is not None
        assert tuner.config_ is SMALL_TRAIN
        bounds = GainBounds()
        assert bounds.kp_min <= tuner.gains_.kp <= bounds.kp_max
        rows = tuner.run_trial([0.1, 0.12])
        assert len(rows) == 2

    def test_fit_is_reproducible_for_a_fixed_seed(self):
        a = DqnPidTuner(train_config=SMALL_TRAIN, random_state=11).fit()
        b = DqnPidTuner(train_config=SMALL_TRAIN, random_state=11).fit()
        assert a.gains_.as_tuple() == b.gains_.as_tuple()
        assert a.report_.final_checkpoint == b.report_.final_checkpoint

    def test_restore_skips_training(self):
        net = init_net([6, 8, 27], rng=np.random.default_rng(0))
        tuner = DqnPidTuner(random_state=0).restore(net)
        assert tuner.gains_.as_tuple() == BASE_GAINS.as_tuple()
        assert not hasattr(tuner, "report_")
        assert tuner.predict([0.1]).shape == (1,)

    def test_restore_clamps_supplied_gains(self):
        net = init_net([6, 8, 27], rng=np.random.default_rng(0))
        tuner = DqnPidTuner().restore(net, gains=PidGains(99.0, 99.0, 99.0))
        bounds = GainBounds()
        assert tuner.gains_.as_tuple() == (bounds.kp_max, bounds.ki_max, bounds.kd_max)

    def test_trial_ticks_follow_the_train_config(self):
        config = TrainConfig(
            episodes=1,
            steps_per_episode=5,
            warmup_steps=1,
            batch_size=4,
            buffer_capacity=50,
            rollout_ticks=7,
            hidden_sizes=(4,),
            sync_interval=5,
            exploration_steps=10,
        )
        tuner = DqnPidTuner(train_config=config, random_state=0).fit()
        assert tuner._ticks() == 7

    def test_noisy_plant_runs_end_to_end(self):
        plant = PlantParams(noise_std=1e-4)
        tuner = DqnPidTuner(plant=plant, train_config=SMALL_TRAIN, random_state=3).fit()
        rows = tuner.run_trial([0.1], rng=np.random.default_rng(5))
        assert np.isfinite(rows[0].measured)
