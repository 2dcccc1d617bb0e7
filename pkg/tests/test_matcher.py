import math

import numpy as np
import pytest

from qbslam.core.dlsc import SparseCode
from qbslam.core.matcher import MatcherParams, TemplateStore, cosine_similarity, pose_candidates
from qbslam.core.models import Pose
from qbslam.exceptions import ConfigurationError, ZeroNormCodeError


def code(*values):
    return SparseCode(np.array(values, dtype=np.float64))


def brute_force_match(templates, query, timestamp, window, mu):
    best = None
    for template in templates:
        if template.timestamp >= timestamp - window:
            break
        similarity = cosine_similarity(template.code, query)
        if best is None or similarity > best[1]:
            best = (template, similarity)
    if best is None or best[1] < mu:
        return None
    return best[0].template_id


class TestCosineSimilarity:
    def test_scale_invariant(self):
        assert cosine_similarity(code(1.0, 2.0, 0.0), code(2.0, 4.0, 0.0)) == pytest.approx(1.0)

    def test_opposite_and_orthogonal(self):
        assert cosine_similarity(code(1.0, 0.0), code(-3.0, 0.0)) == pytest.approx(-1.0)
        assert cosine_similarity(code(1.0, 0.0), code(0.0, 5.0)) == 0.0

    def test_zero_norm_is_rejected(self):
        with pytest.raises(ZeroNormCodeError):
            cosine_similarity(code(0.0, 0.0), code(1.0, 0.0))


class TestParams:
    @pytest.mark.parametrize('key, value', [('mu', 0.0), ('sample_period', 0.0), ('exclusion_window', -1.0)])
    def test_invalid_values(self, key, value):
        with pytest.raises(ConfigurationError) as excinfo:
            MatcherParams(**{key: value})
        assert excinfo.value.config_key == key

    def test_mu_above_one_only_warns(self, caplog):
        caplog.set_level('WARNING', logger='qbslam.Matcher')
        MatcherParams(mu=1.5)
        assert any('loop closures are disabled' in record.getMessage() for record in caplog.records)

    @pytest.mark.parametrize(
        'key, value',
        [('search_radius', 0.0), ('radius_growth', -0.1), ('heading_tolerance', 0.0), ('heading_tolerance', 4.0)],
    )
    def test_invalid_pose_gate(self, key, value):
        with pytest.raises(ConfigurationError) as excinfo:
            MatcherParams(**{key: value})
        assert excinfo.value.config_key == key

    def test_radius_widens_with_distance(self):
        params = MatcherParams(search_radius=1.0, radius_growth=0.1)
        assert params.radius_after(0.0) == 1.0
        assert params.radius_after(20.0) == pytest.approx(3.0)
        assert MatcherParams(search_radius=None).radius_after(20.0) is None


class TestSampling:
    def test_clock(self):
        store = TemplateStore(MatcherParams(sample_period=0.1))
        assert store.maybe_sample(code(1.0, 0.0), 0.0, 0) is not None
        assert store.maybe_sample(code(1.0, 0.0), 0.05, 0) is None
        template = store.maybe_sample(code(0.0, 1.0), 0.1, 1)
        assert template is not None
        assert (template.template_id, template.experience_id) == (1, 1)
        assert len(store) == 2

    def test_zero_code_advances_the_clock(self, caplog):
        store = TemplateStore(MatcherParams(sample_period=0.1))
        caplog.set_level('WARNING', logger='qbslam.Matcher')

        assert store.maybe_sample(code(0.0, 0.0), 0.0, 0) is None
        assert store.last_sample_time == 0.0
        assert store.maybe_sample(code(1.0, 0.0), 0.05, 0) is None
        assert len(store) == 0
        assert any('template skipped' in record.getMessage() for record in caplog.records)

    def test_timestamps_must_not_go_back(self):
        store = TemplateStore()
        store.maybe_sample(code(1.0, 0.0), 1.0, 0)
        with pytest.raises(ConfigurationError):
            store.maybe_sample(code(1.0, 0.0), 0.5, 0)

    def test_stored_code_is_a_copy(self):
        store = TemplateStore()
        source = code(1.0, 2.0)
        store.maybe_sample(source, 0.0, 0)
        source.values[0] = 99.0
        assert store.snapshot()[0].code.values[0] == 1.0

    def test_rows(self):
        store = TemplateStore()
        store.maybe_sample(code(0.5, -0.5), 0.0, 3)
        assert store.to_rows() == [[0, 3, 0.0, 0.5, -0.5]]

    def test_count_follows_the_clock(self, rng):
        period = 0.1
        store = TemplateStore(MatcherParams(sample_period=period))
        timestamps = np.cumsum(rng.uniform(0.01, 0.07, size=500))
        for t in timestamps:
            store.maybe_sample(SparseCode(rng.normal(size=4)), float(t), 0)

        duration = timestamps[-1] - timestamps[0]
        assert len(store) <= math.ceil(duration / period) + 1
        stored = [t.timestamp for t in store.snapshot()]
        assert all(b - a >= period - 1e-9 for a, b in zip(stored, stored[1:], strict=False))


class TestLoopClosure:
    def test_exclusion_window_boundary(self):
        store = TemplateStore(MatcherParams(mu=0.9, exclusion_window=10.0))
        store.maybe_sample(code(1.0, 0.0, 0.0), 0.0, 0)

        assert store.find_loop_closure(code(1.0, 0.0, 0.0), 10.0) is None
        loop = store.find_loop_closure(code(1.0, 0.0, 0.0), 10.5)
        assert loop is not None
        assert loop.template_id == 0
        assert loop.similarity == pytest.approx(1.0)

    def test_best_match_wins(self):
        store = TemplateStore(MatcherParams(mu=0.5, exclusion_window=1.0))
        store.maybe_sample(code(1.0, 0.0, 0.0), 0.0, 0)
        store.maybe_sample(code(0.6, 0.8, 0.0), 0.2, 1)
        store.maybe_sample(code(0.0, 0.0, 1.0), 0.4, 2)

        loop = store.find_loop_closure(code(0.5, 0.9, 0.0), 5.0)

        assert loop is not None
        assert loop.experience_id == 1

    def test_ties_go_to_the_older_template(self):
        store = TemplateStore(MatcherParams(mu=0.9, exclusion_window=1.0))
        store.maybe_sample(code(0.0, 2.0), 0.0, 0)
        store.maybe_sample(code(0.0, 2.0), 0.1, 1)

        loop = store.find_loop_closure(code(0.0, 1.0), 5.0)

        assert loop is not None
        assert (loop.template_id, loop.experience_id) == (0, 0)

    def test_threshold(self):
        store = TemplateStore(MatcherParams(mu=0.95, exclusion_window=1.0))
        store.maybe_sample(code(1.0, 0.0), 0.0, 0)
        assert store.find_loop_closure(code(1.0, 1.0), 5.0) is None

    def test_mu_above_one_never_closes(self):
        store = TemplateStore(MatcherParams(mu=1.5, exclusion_window=1.0))
        store.maybe_sample(code(1.0, 0.0), 0.0, 0)
        assert store.find_loop_closure(code(1.0, 0.0), 5.0) is None

    def test_empty_store_and_zero_query(self):
        store = TemplateStore(MatcherParams(exclusion_window=1.0))
        assert store.find_loop_closure(code(1.0, 0.0), 5.0) is None
        store.maybe_sample(code(1.0, 0.0), 0.0, 0)
        assert store.find_loop_closure(code(0.0, 0.0), 5.0) is None

    def test_later_templates_become_eligible(self):
        store = TemplateStore(MatcherParams(mu=0.9, exclusion_window=1.0))
        store.maybe_sample(code(1.0, 0.0), 0.0, 0)
        assert store.find_loop_closure(code(0.0, 1.0), 1.5) is None

        store.maybe_sample(code(0.0, 1.0), 1.0, 1)
        loop = store.find_loop_closure(code(0.0, 1.0), 2.5)

        assert loop is not None
        assert loop.experience_id == 1

    def test_matches_an_exhaustive_scan(self, rng):
        store = TemplateStore(MatcherParams(mu=0.3, exclusion_window=2.0))
        for k in range(200):
            store.maybe_sample(SparseCode(rng.normal(size=8)), k * 0.1, k)
        templates = store.snapshot()

        for _ in range(50):
            query = SparseCode(rng.normal(size=8))
            timestamp = float(rng.uniform(0.0, 25.0))
            loop = store.find_loop_closure(query, timestamp)
            expected = brute_force_match(templates, query, timestamp, 2.0, 0.3)
            assert (loop.template_id if loop else None) == expected

    def test_positive_scaling_keeps_the_match(self, rng):
        store = TemplateStore(MatcherParams(mu=0.1, exclusion_window=1.0))
        for k in range(50):
            store.maybe_sample(SparseCode(rng.normal(size=6)), k * 0.1, k)
        query = rng.normal(size=6)

        reference = store.find_loop_closure(SparseCode(query), 10.0)
        for factor in (1e-3, 0.5, 7.0, 1e4):
            loop = store.find_loop_closure(SparseCode(query * factor), 10.0)
            assert (loop.template_id if loop else None) == (reference.template_id if reference else None)

    def test_candidate_mask_narrows_the_search(self):
        store = TemplateStore(MatcherParams(mu=0.5, exclusion_window=1.0))
        store.maybe_sample(code(1.0, 0.0), 0.0, 0)
        store.maybe_sample(code(0.8, 0.6), 0.2, 1)

        assert store.find_loop_closure(code(1.0, 0.0), 5.0, np.array([True, True])).experience_id == 0
        assert store.find_loop_closure(code(1.0, 0.0), 5.0, np.array([False, True])).experience_id == 1
        assert store.find_loop_closure(code(1.0, 0.0), 5.0, np.array([False, False])) is None

    def test_candidate_mask_must_cover_the_store(self):
        store = TemplateStore(MatcherParams(exclusion_window=1.0))
        store.maybe_sample(code(1.0, 0.0), 0.0, 0)
        with pytest.raises(ConfigurationError):
            store.find_loop_closure(code(1.0, 0.0), 5.0, np.array([True, False]))


class TestPoseCandidates:
    def test_radius_and_heading(self):
        poses = np.array([[0.5, 0.0, 0.0], [3.0, 0.0, 0.0], [0.0, 0.5, 2.0], [0.0, -0.5, -3.1]])
        mask = pose_candidates(poses, Pose(0.0, 0.0, 0.1), radius=1.0, heading_tolerance=0.75)
        assert mask.tolist() == [True, False, False, False]

    def test_heading_wraps(self):
        poses = np.array([[0.0, 0.0, math.pi - 0.05]])
        mask = pose_candidates(poses, Pose(0.0, 0.0, -math.pi + 0.05), radius=1.0, heading_tolerance=0.2)
        assert mask.tolist() == [True]
