import math

import numpy as np
import pytest

from qbslam.core.backend import (
    BackendParams,
    Experience,
    ExperienceMap,
    LinkKind,
    MapLink,
    dead_reckoning,
    integrate_odometry,
    link_disagreement,
    on_sample,
    relax_map,
)
from qbslam.core.matcher import LoopClosure
from qbslam.core.models import ORIGIN, OdometrySample, Pose, wrap_angle, wrap_angles
from qbslam.exceptions import ConfigurationError, MapError, UnknownExperienceError


class TestPose:
    @pytest.mark.parametrize(
        'angle, expected',
        [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (3 * math.pi, math.pi), (-0.5, -0.5), (7.0, 7.0 - math.tau)],
    )
    def test_wrap_angle(self, angle, expected):
        assert wrap_angle(angle) == pytest.approx(expected)

    def test_in_range_angles_are_untouched(self, rng):
        angles = rng.uniform(-math.pi, math.pi, size=500)
        angles = angles[angles > -math.pi]

        assert all(wrap_angle(float(a)) == a for a in angles)
        np.testing.assert_array_equal(wrap_angles(angles), angles)

    def test_wrap_angles_matches_scalar(self, rng):
        angles = rng.uniform(-20.0, 20.0, size=200)
        wrapped = wrap_angles(angles)

        assert np.all((wrapped > -math.pi) & (wrapped <= math.pi))
        np.testing.assert_allclose(wrapped, [wrap_angle(float(a)) for a in angles], atol=1e-12)

    def test_compose_then_between(self):
        a = Pose(1.0, 2.0, 0.7)
        b = Pose(-3.0, 0.5, -2.9)
        back = a.compose(a.between(b))
        assert back == pytest.approx(b)

    def test_compose_is_body_frame(self):
        moved = Pose(0.0, 0.0, math.pi / 2).compose(Pose(1.0, 0.0, 0.0))
        assert moved == pytest.approx(Pose(0.0, 1.0, math.pi / 2))

    def test_non_finite_odometry(self):
        with pytest.raises(ValueError, match='non-finite'):
            OdometrySample(0.0, math.nan, 0.0, 0.0)


class TestOdometry:
    def test_square_returns_home(self):
        side = OdometrySample(0.0, 1.0, 0.0, math.pi / 2)
        poses = dead_reckoning([side] * 4)
        assert len(poses) == 4
        assert poses[-1] == pytest.approx(ORIGIN, abs=1e-12)

    def test_integrate_single_step(self):
        assert integrate_odometry(Pose(1.0, 1.0, 0.0), OdometrySample(0.1, 0.5, 0.0, 0.1)) == pytest.approx(
            Pose(1.5, 1.0, 0.1)
        )

    def test_chain_matches_homogeneous_product(self, rng):
        samples = [
            OdometrySample(k * 0.1, rng.normal(0.3, 0.2), rng.normal(0.0, 0.1), rng.uniform(-1.0, 1.0))
            for k in range(100)
        ]
        product = np.eye(3)
        for sample, pose in zip(samples, dead_reckoning(samples), strict=True):
            c, s = math.cos(sample.dtheta), math.sin(sample.dtheta)
            product = product @ np.array([[c, -s, sample.dx], [s, c, sample.dy], [0.0, 0.0, 1.0]])
            heading = math.atan2(product[1, 0], product[0, 0])

            np.testing.assert_allclose([pose.x, pose.y], product[:2, 2], atol=1e-9)
            assert wrap_angle(pose.theta - heading) == pytest.approx(0.0, abs=1e-9)


class TestExperienceMap:
    def test_experiences_chain_odometrically(self):
        exp_map = ExperienceMap()
        exp_map.add_experience(Pose(0.0, 0.0, 0.0), 0.0)
        exp_map.add_experience(Pose(1.0, 0.0, 0.0), 0.1)
        exp_map.add_experience(Pose(1.0, 1.0, math.pi / 2), 0.2)

        assert [(link.from_id, link.to_id, link.kind) for link in exp_map.links] == [
            (0, 1, LinkKind.ODOMETRIC),
            (1, 2, LinkKind.ODOMETRIC),
        ]
        assert exp_map.current_id == 2
        assert link_disagreement(exp_map) == pytest.approx(0.0, abs=1e-24)

    def test_self_link_is_rejected(self):
        with pytest.raises(MapError):
            MapLink(1, 1, ORIGIN, LinkKind.LOOP_CLOSURE)

    def test_from_parts_validates(self):
        experiences = [Experience(0, ORIGIN, 0.0), Experience(1, Pose(1.0, 0.0, 0.0), 0.1)]
        with pytest.raises(UnknownExperienceError):
            ExperienceMap.from_parts(experiences, [MapLink(0, 5, ORIGIN, LinkKind.LOOP_CLOSURE)])
        with pytest.raises(MapError):
            ExperienceMap.from_parts([Experience(1, ORIGIN, 0.0)], [])

    def test_copy_is_independent(self):
        exp_map = ExperienceMap()
        exp_map.add_experience(ORIGIN, 0.0)
        clone = exp_map.copy()
        exp_map.add_experience(Pose(1.0, 0.0, 0.0), 0.1)
        assert len(clone) == 1
        assert len(exp_map) == 2

    def test_rows(self):
        exp_map = ExperienceMap()
        exp_map.add_experience(ORIGIN, 0.0)
        exp_map.add_experience(Pose(1.0, 0.0, 0.0), 0.1)
        exp_map.add_loop_link(1, 0)
        assert exp_map.to_rows() == [[0, 0.0, 0.0, 0.0], [1, 1.0, 0.0, 0.0]]
        assert exp_map.link_rows() == [[0, 1, 'odometric'], [1, 0, 'loop_closure']]
        assert exp_map.loop_closure_count == 1


class TestRelaxation:
    def test_two_node_loop_meets_in_the_middle(self):
        exp_map = ExperienceMap.from_parts(
            [Experience(0, Pose(0.0, 0.0, 0.0), 0.0), Experience(1, Pose(2.0, 0.0, 0.0), 1.0)],
            [MapLink(1, 0, ORIGIN, LinkKind.LOOP_CLOSURE)],
        )

        history = relax_map(exp_map, alpha=0.5, iterations=1)

        np.testing.assert_allclose(exp_map.pose_array(), [[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        assert history == pytest.approx([4.0, 0.0])

    def test_history_never_increases(self, rng):
        exp_map = ExperienceMap()
        pose = ORIGIN
        for k in range(40):
            exp_map.add_experience(pose, k * 0.1)
            pose = pose.compose(Pose(0.5 + rng.normal(0, 0.05), 0.0, math.tau / 40 + rng.normal(0, 0.02)))
        exp_map.add_loop_link(39, 0)

        history = relax_map(exp_map, alpha=0.5, iterations=25)

        assert len(history) == 26
        assert all(b <= a for a, b in zip(history, history[1:], strict=False))
        assert history[-1] < history[0]

    def test_loop_link_closes_a_drifted_square(self, rng):
        exp_map = ExperienceMap()
        pose = ORIGIN
        for side in range(4):
            for step in range(10):
                exp_map.add_experience(pose, (side * 10 + step) * 0.1)
                turn = math.pi / 2 + 0.03 if step == 9 else 0.0
                pose = pose.compose(Pose(1.0 + rng.normal(0, 0.02), rng.normal(0, 0.02), turn))
        exp_map.add_experience(pose, 4.0)
        last = len(exp_map) - 1
        gap_before = math.dist(exp_map.experience(last).pose[:2], exp_map.experience(0).pose[:2])

        exp_map.add_loop_link(last, 0)
        relax_map(exp_map, alpha=0.5, iterations=50)

        gap_after = math.dist(exp_map.experience(last).pose[:2], exp_map.experience(0).pose[:2])
        assert gap_before > 0.05
        assert gap_after < 0.5 * gap_before

    def test_without_links_nothing_moves(self):
        exp_map = ExperienceMap()
        exp_map.add_experience(Pose(3.0, 4.0, 0.1), 0.0)
        history = relax_map(exp_map, iterations=3)
        assert history == [0.0, 0.0, 0.0, 0.0]
        np.testing.assert_array_equal(exp_map.pose_array(), [[3.0, 4.0, 0.1]])

    @pytest.mark.parametrize('key, value', [('alpha', 0.0), ('alpha', 1.0), ('iterations', -1), ('max_halvings', -1)])
    def test_params(self, key, value):
        with pytest.raises(ConfigurationError) as excinfo:
            BackendParams(**{key: value})
        assert excinfo.value.config_key == key


class TestOnSample:
    def test_without_loops_follows_dead_reckoning(self, rng):
        samples = [OdometrySample(k * 0.1, 0.1, rng.normal(0, 0.01), rng.normal(0, 0.05)) for k in range(30)]
        exp_map = ExperienceMap()
        for sample, pose in zip(samples, dead_reckoning(samples), strict=True):
            on_sample(exp_map, pose, None, sample.timestamp)

        expected = np.array(dead_reckoning(samples))
        np.testing.assert_array_equal(exp_map.pose_array()[:, :2], expected[:, :2])
        np.testing.assert_allclose(exp_map.pose_array()[:, 2], expected[:, 2], atol=1e-12)
        assert exp_map.loop_closure_count == 0

    def test_loop_closure_links_and_relaxes(self):
        exp_map = ExperienceMap()
        on_sample(exp_map, ORIGIN, None, 0.0)
        on_sample(exp_map, Pose(1.0, 0.0, 0.0), None, 1.0)
        before = link_disagreement(exp_map)

        experience = on_sample(
            exp_map, Pose(0.4, 0.0, 0.0), LoopClosure(0, 0, 0.97), 2.0, BackendParams(alpha=0.5, iterations=10)
        )

        assert experience.experience_id == 2
        assert exp_map.loop_closure_count == 1
        assert exp_map.links[-1] == MapLink(2, 0, ORIGIN, LinkKind.LOOP_CLOSURE)
        assert link_disagreement(exp_map) <= before + 0.4**2
        assert experience.pose == exp_map.experience(2).pose

    def test_unknown_loop_target(self):
        exp_map = ExperienceMap()
        on_sample(exp_map, ORIGIN, None, 0.0)
        with pytest.raises(UnknownExperienceError):
            on_sample(exp_map, ORIGIN, LoopClosure(0, 9, 0.99), 1.0)
        assert len(exp_map) == 1
