import math

import numpy as np
import pytest
from conftest import make_frame, smooth_image

from qbslam.core.dlsc import Dictionary, DlscParams, EncoderState, SparseCode
from qbslam.core.models import Frame
from qbslam.core.surprise import SurpriseState, gated_learning_step, qbs_raw, qbs_update
from qbslam.exceptions import CodingDivergenceError, ConfigurationError, SurpriseInputError


def static_frames(count, width=32, height=24):
    image = smooth_image(width, height)
    return [Frame.from_image(k, k / 10.0, image) for k in range(count)]


class TestQbsUpdate:
    def test_first_call_opens_the_gate(self):
        state = SurpriseState()
        decision = qbs_update(state, 4.0)
        assert decision.s2 == 1.0
        assert decision.learn is True
        assert decision.s2_raw is None
        assert state.gate_open

    def test_raw_is_error_difference(self):
        assert qbs_raw(3.0, 1.0) == 2.0
        assert qbs_raw(1.0, 3.0) == -2.0

    def test_window_average_of_alternating_errors(self):
        state = SurpriseState(window=5)
        decisions = [qbs_update(state, e) for e in [3.0, 1.0, 3.0, 1.0, 3.0, 1.0, 3.0]]

        smoothed = [d.s2 for d in decisions[1:]]
        np.testing.assert_allclose(smoothed, [-2.0, 0.0, -2.0 / 3.0, 0.0, -0.4, 0.4])
        assert [d.learn for d in decisions] == [True, False, False, False, False, False, True]

    def test_zero_surprise_closes_the_gate(self):
        state = SurpriseState(window=1)
        qbs_update(state, 2.0)
        assert qbs_update(state, 2.0).learn is False

    @pytest.mark.parametrize('error', [-1.0, math.nan, math.inf])
    def test_rejects_bad_errors(self, error):
        with pytest.raises(SurpriseInputError):
            qbs_update(SurpriseState(), error)

    def test_window_must_be_positive(self):
        with pytest.raises(ConfigurationError) as excinfo:
            SurpriseState(window=0)
        assert excinfo.value.config_key == 'window'


class TestGatedLearningStep:
    def test_static_scene_closes_the_gate(self):
        frames = static_frames(200)
        enc = EncoderState.create(frames[0].n, DlscParams(n_atoms=16, lambda1=0.01), seed=0)
        sur = SurpriseState()

        verdicts = [gated_learning_step(enc, sur, frame)[1].learn for frame in frames]

        assert not all(verdicts[:50])

    def test_static_scene_open_steps_do_not_grow_with_length(self):
        frames = static_frames(300)
        enc = EncoderState.create(frames[0].n, DlscParams(n_atoms=16, lambda1=0.01), seed=0)
        sur = SurpriseState()

        verdicts = [gated_learning_step(enc, sur, frame)[1].learn for frame in frames]

        assert sum(verdicts) == sum(verdicts[:100])

    def test_alternating_frames_reopen_the_gate(self):
        image = smooth_image(32, 24)
        frames = static_frames(100)
        frames += [Frame.from_image(k, k / 10.0, image if k % 2 else image * 0.5) for k in range(100, 120)]
        enc = EncoderState.create(frames[0].n, DlscParams(n_atoms=16, lambda1=0.01), seed=0)
        sur = SurpriseState()

        verdicts = [gated_learning_step(enc, sur, frame)[1].learn for frame in frames]

        assert not all(verdicts[:100])
        assert sum(verdicts[100:]) >= 5

    def test_closed_gate_keeps_the_dictionary(self):
        frames = static_frames(60)
        enc = EncoderState.create(frames[0].n, DlscParams(n_atoms=16, lambda1=0.01), seed=0)
        sur = SurpriseState()

        closed_steps = 0
        for frame in frames:
            allowed = sur.gate_open
            before = enc.dictionary
            gated_learning_step(enc, sur, frame)
            if allowed:
                assert enc.dictionary is not before
            else:
                closed_steps += 1
                assert enc.dictionary is before

        assert closed_steps > 0

    def test_ungated_learns_every_step(self):
        frames = static_frames(30)
        enc = EncoderState.create(frames[0].n, DlscParams(n_atoms=16, lambda1=0.01), seed=0)
        sur = SurpriseState()

        for frame in frames:
            before = enc.dictionary
            _, decision = gated_learning_step(enc, sur, frame, gating=False)
            assert enc.dictionary is not before
            assert decision.error >= 0.0

        assert enc.frames_seen == 30

    def test_error_is_measured_before_learning(self, rng):
        frame = make_frame(rng.uniform(size=20))
        enc = EncoderState.create(20, DlscParams(n_atoms=4, eta_c=0.5, eta_d=0.5, lambda1=0.0), seed=2)
        sur = SurpriseState()

        code, decision = gated_learning_step(enc, sur, frame, gating=False)

        residual = enc.dictionary.atoms @ code.values - frame.pixels
        assert decision.error != pytest.approx(float(residual @ residual))
        assert enc.prev_error == decision.error

    def test_overflowing_error_is_a_divergence(self, rng):
        frame = make_frame(rng.uniform(size=12), index=4)
        enc = EncoderState(
            dictionary=Dictionary(np.full((12, 3), 1e200)),
            code=SparseCode(np.full(3, 1e200)),
            params=DlscParams(n_atoms=3),
        )

        with pytest.raises(CodingDivergenceError) as excinfo:
            gated_learning_step(enc, SurpriseState(), frame)

        assert excinfo.value.frame_index == 4
