import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from artmanip import affordance, scene
from artmanip.errors import EmptyPartError, JointLimitError, NoAffordanceError


def _axis_distance(points, joint):
    rel = points - joint.axis_origin
    radial = rel - np.outer(rel @ joint.axis_direction, joint.axis_direction)
    return np.linalg.norm(radial, axis=1)


def test_prismatic_distance_equals_probe(drawer, drawer_view):
    probe = 0.05
    dist = affordance.distance_map(drawer, [0.0], drawer_view, 0, probe)
    valid = drawer_view.part_id == 1
    assert np.allclose(dist[valid], probe, atol=1e-12)
    assert np.all(dist[~valid] == 0.0)


def test_revolute_distance_matches_chord(door, door_view):
    probe = 0.1
    dist = affordance.distance_map(door, [0.0], door_view, 0, probe)
    valid = door_view.part_id == door.part_of_joint(0)
    r = _axis_distance(door_view.position3d[valid], door.joints[0])
    expected = 2.0 * r * math.sin(probe / 2.0)
    assert np.allclose(dist[valid], expected, atol=1e-9)


def test_distance_zero_probe(door, door_view):
    dist = affordance.distance_map(door, [0.0], door_view, 0, 0.0)
    assert np.all(dist == 0.0)


def test_distance_probe_limit_error(door, door_view):
    with pytest.raises(JointLimitError):
        affordance.distance_map(door, [0.0], door_view, 0, 99.0)


def test_normalization_hand_oracle():
    dist = np.array([[0.0, 1.0, 2.0]])
    valid = np.array([[True, True, True]])
    amap = affordance.affordance_from_distance(dist, valid, scene.REVOLUTE)
    assert np.allclose(amap.scores, [[0.0, 0.5, 1.0]])


def test_prismatic_scores_all_one(drawer, drawer_view):
    amap = affordance.affordance_map(drawer, [0.0], drawer_view, 0)
    assert np.all(amap.scores[amap.valid] == 1.0)
    assert np.all(amap.scores[~amap.valid] == 0.0)


def test_min_zero_reduces_to_plain_ratio():
    dist = np.array([[0.0, 0.2, 0.8]])
    valid = np.ones_like(dist, dtype=bool)
    amap = affordance.affordance_from_distance(dist, valid, scene.REVOLUTE)
    assert np.allclose(amap.scores, dist / dist.max())


def test_degenerate_constant_distance():
    dist = np.full((2, 2), 0.3)
    valid = np.ones((2, 2), dtype=bool)
    amap = affordance.affordance_from_distance(dist, valid, scene.REVOLUTE)
    assert np.all(amap.scores == 1.0)


def test_empty_valid_mask():
    with pytest.raises(EmptyPartError):
        affordance.affordance_from_distance(
            np.zeros((2, 2)), np.zeros((2, 2), dtype=bool), scene.REVOLUTE
        )


@given(
    hnp.arrays(np.float64, (4, 5), elements=st.floats(0, 10)),
    st.floats(min_value=0.01, max_value=100.0),
)
@settings(max_examples=50, deadline=None)
def test_scale_invariance(dist, factor):
    valid = np.ones_like(dist, dtype=bool)
    a = affordance.affordance_from_distance(dist, valid, scene.REVOLUTE)
    b = affordance.affordance_from_distance(dist * factor, valid, scene.REVOLUTE)
    assert np.allclose(a.scores, b.scores, atol=1e-9)


def test_scores_span_unit_interval(door, door_view):
    amap = affordance.affordance_map(door, [0.0], door_view, 0)
    values = amap.scores[amap.valid]
    assert values.min() == 0.0
    assert values.max() == 1.0
    assert np.all((values >= 0) & (values <= 1))


def test_revolute_monotonicity(door, door_view):
    amap = affordance.affordance_map(door, [0.0], door_view, 0)
    pts = door_view.position3d[amap.valid]
    r = _axis_distance(pts, door.joints[0])
    s = amap.scores[amap.valid]
    order = np.argsort(r)
    assert np.all(np.diff(s[order]) >= -1e-9)


def test_sample_pixels_counts(door, door_view):
    amap = affordance.affordance_map(door, [0.0], door_view, 0)
    sample = affordance.sample_pixels(amap, door_view, 20, seed=0, obj=door)
    assert len(sample.positives) == 20
    assert len(sample.negatives) == 20
    for x, y in sample.positives:
        assert amap.valid[y, x] and amap.scores[y, x] > 0.8
    for x, y in sample.negatives:
        low = amap.valid[y, x] and amap.scores[y, x] < 0.2
        off_part = door_view.part_id[y, x] >= 0 and not amap.valid[y, x]
        assert low or off_part


def test_sample_pixels_prismatic_pool_is_valid_mask(drawer, drawer_view):
    amap = affordance.affordance_map(drawer, [0.0], drawer_view, 0)
    sample = affordance.sample_pixels(amap, drawer_view, 20, seed=1, obj=drawer)
    for x, y in sample.positives:
        assert amap.valid[y, x]


def test_sample_pixels_with_replacement_fallback(drawer, drawer_view, caplog):
    amap = affordance.affordance_map(drawer, [0.0], drawer_view, 0)
    # shrink the positive pool to 3 pixels
    ys, xs = np.nonzero(amap.valid)
    squeezed = amap.scores.copy()
    squeezed[amap.valid] = 0.0
    for y, x in zip(ys[:3], xs[:3]):
        squeezed[y, x] = 1.0
    small = affordance.AffordanceMap(scores=squeezed, valid=amap.valid,
                                     target_joint=0, probe_delta=amap.probe_delta)
    pool = {(int(x), int(y)) for y, x in zip(ys[:3], xs[:3])}
    with caplog.at_level("WARNING"):
        sample = affordance.sample_pixels(small, drawer_view, 20, seed=2, obj=drawer)
    assert set(sample.positives) <= pool
    assert len(sample.positives) == 20
    assert any("with replacement" in r.message for r in caplog.records)


def test_sample_pixels_empty_positive_pool(drawer, drawer_view):
    amap = affordance.affordance_map(drawer, [0.0], drawer_view, 0)
    zeroed = affordance.AffordanceMap(
        scores=np.zeros_like(amap.scores), valid=amap.valid,
        target_joint=0, probe_delta=amap.probe_delta,
    )
    with pytest.raises(NoAffordanceError):
        affordance.sample_pixels(zeroed, drawer_view, 20, seed=0, obj=drawer)


def test_sample_pixels_deterministic(door, door_view):
    amap = affordance.affordance_map(door, [0.0], door_view, 0)
    a = affordance.sample_pixels(amap, door_view, 20, seed=7, obj=door)
    b = affordance.sample_pixels(amap, door_view, 20, seed=7, obj=door)
    assert a == b
