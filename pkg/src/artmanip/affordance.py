"""Per-pixel actionability maps for the target joint.

The distance map tracks each valid pixel's 3D surface point through a small
probe displacement of the target joint (material-point tracking, no
re-render) and records the Euclidean distance moved. Revolute maps are then
min-max normalized to [0, 1]; prismatic parts move rigidly, so every valid
pixel scores 1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import scene
from .errors import EmptyPartError, NoAffordanceError
from .render import CameraView
from .scene import PRISMATIC, REVOLUTE, ArticulatedObject

log = logging.getLogger(__name__)

POSITIVE_THRESHOLD = 0.8
NEGATIVE_THRESHOLD = 0.2

DEFAULT_PROBE_DELTA = {REVOLUTE: 0.1, PRISMATIC: 0.05}


@dataclass
class AffordanceMap:
    """Scores in [0, 1] on the target joint's part; zero and ignored elsewhere."""

    scores: np.ndarray  # (H, W) float64
    valid: np.ndarray  # (H, W) bool
    target_joint: int
    probe_delta: float


@dataclass(frozen=True)
class PixelSample:
    positives: tuple  # ((x, y), ...) length == count
    negatives: tuple
    count: int


def default_probe_delta(joint: scene.JointSpec) -> float:
    return DEFAULT_PROBE_DELTA[joint.kind]


def distance_map(
    obj: ArticulatedObject,
    joint_values,
    view: CameraView,
    target_joint: int,
    probe_delta: float,
) -> np.ndarray:
    """Distance each valid pixel's surface point moves when the target joint
    advances by probe_delta. Non-valid pixels are 0."""
    joint_values = np.asarray(joint_values, dtype=float)
    joint = obj.joints[target_joint]
    q = float(joint_values[target_joint])
    joint.check_value(q + probe_delta)

    part_index = None
    for i, part in enumerate(obj.parts):
        if part.attached_joint == target_joint:
            part_index = i
            break
    valid = view.part_id == obj.parts[part_index].part_id
    out = np.zeros_like(view.depth)
    if not valid.any():
        return out

    before = view.position3d[valid]
    r0, t0 = scene.part_transform(obj, joint_values, part_index)
    local = (before - t0) @ r0  # R^T (p - t)
    after_values = joint_values.copy()
    after_values[target_joint] = q + probe_delta
    r1, t1 = scene.part_transform(obj, after_values, part_index)
    after = local @ r1.T + t1
    out[valid] = np.linalg.norm(after - before, axis=1)
    return out


def affordance_from_distance(
    dist: np.ndarray,
    valid: np.ndarray,
    joint_kind: str,
    target_joint: int = -1,
    probe_delta: float = 0.0,
) -> AffordanceMap:
    """Normalize a distance map into actionability scores.

    Prismatic parts score 1 everywhere on the valid mask. Revolute parts get
    min-max normalization over valid pixels; a degenerate (constant) map is
    treated as uniformly actionable.
    """
    valid = np.asarray(valid, dtype=bool)
    if not valid.any():
        raise EmptyPartError("no valid pixels for the target part")
    scores = np.zeros_like(np.asarray(dist, dtype=float))
    if joint_kind == PRISMATIC:
        scores[valid] = 1.0
    else:
        values = dist[valid]
        lo = float(values.min())
        hi = float(values.max())
        if hi - lo <= 0.0:
            scores[valid] = 1.0
        else:
            scores[valid] = (values - lo) / (hi - lo)
    return AffordanceMap(scores=scores, valid=valid,
                         target_joint=target_joint, probe_delta=probe_delta)


def affordance_map(
    obj: ArticulatedObject,
    joint_values,
    view: CameraView,
    target_joint: int,
    probe_delta: float | None = None,
) -> AffordanceMap:
    """Distance map + normalization in one step."""
    joint = obj.joints[target_joint]
    if probe_delta is None:
        probe_delta = default_probe_delta(joint)
    dist = distance_map(obj, joint_values, view, target_joint, probe_delta)
    part_id = obj.part_of_joint(target_joint)
    valid = view.part_id == part_id
    return affordance_from_distance(dist, valid, joint.kind,
                                    target_joint=target_joint, probe_delta=probe_delta)


def _movable_mask(view: CameraView, obj: ArticulatedObject) -> np.ndarray:
    movable_ids = [p.part_id for p in obj.parts if p.movable]
    mask = np.zeros_like(view.part_id, dtype=bool)
    for pid in movable_ids:
        mask |= view.part_id == pid
    return mask


def _pick(rng: np.random.Generator, pool: np.ndarray, count: int, label: str):
    if len(pool) >= count:
        chosen = rng.choice(len(pool), size=count, replace=False)
    else:
        log.warning("%s pool has %d pixels < n=%d; sampling with replacement",
                    label, len(pool), count)
        chosen = rng.choice(len(pool), size=count, replace=True)
    return [(int(pool[i][1]), int(pool[i][0])) for i in chosen]  # (x, y)


def sample_pixels(
    amap: AffordanceMap,
    view: CameraView,
    count: int,
    seed: int,
    obj: ArticulatedObject | None = None,
) -> PixelSample:
    """Draw `count` positive and `count` negative pixels.

    Positives come from valid pixels scoring above 0.8. Negatives are the
    union of low-scoring valid pixels and rendered pixels on parts that
    cannot move. Deterministic per seed; falls back to sampling with
    replacement (logged) when a pool is smaller than `count`.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    pos_mask = amap.valid & (amap.scores > POSITIVE_THRESHOLD)
    rendered = view.part_id >= 0
    if obj is not None:
        movable = _movable_mask(view, obj)
    else:
        movable = amap.valid
    neg_mask = (amap.valid & (amap.scores < NEGATIVE_THRESHOLD)) | (rendered & ~movable)

    pos_pool = np.argwhere(pos_mask)  # (k, 2) rows of (y, x)
    if len(pos_pool) == 0:
        raise NoAffordanceError("no pixels score above the positive threshold")
    neg_pool = np.argwhere(neg_mask)
    if len(neg_pool) == 0:
        raise NoAffordanceError("no pixels qualify as negatives")

    positives = _pick(rng, pos_pool, count, "positive")
    negatives = _pick(rng, neg_pool, count, "negative")
    return PixelSample(positives=tuple(positives), negatives=tuple(negatives), count=count)
