"""Pose-proposal policies and the outcome-supervised online scorer.

Policies replace a learned pose predictor behind a common interface: given a
rendered view (and optionally an affordance map) they return a contact pixel
plus gripper directions, together with the three-step reasoning trace
(category -> actionability -> pose) rendered from the dataset templates.
Proposal directions go through the direction codec, so a proposal's pose and
the pose recoverable from its own trace coincide.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import dataset
from .affordance import AffordanceMap
from .dataset import ManipPose
from .errors import VisibilityError
from .render import CameraView
from .scene import ArticulatedObject

FEATURE_DIM = 5  # x, y (normalized), affordance score, centroid distance, bias


@dataclass(frozen=True)
class PoseProposal:
    pose: ManipPose
    cot_trace: tuple  # ((prompt, answer), ...) in inference order
    source: str


def _quantized_pose(view: CameraView, x: int, y: int, forward) -> ManipPose:
    forward_q = dataset.quantize_direction(forward)
    up_q = dataset.quantize_direction(dataset.orthogonal_up(forward_q))
    return ManipPose(
        contact_px=(x, y),
        contact_3d=view.position3d[y, x],
        up_dir=up_q,
        forward_dir=forward_q,
    )


def _cot_trace(category: str, pose: ManipPose) -> tuple:
    steps = [
        (dataset.OCI_PROMPT, category),
        (dataset.APR_SINGLE_PROMPT_PREFIX + f"({pose.contact_px[0]}, {pose.contact_px[1]})", "yes"),
        (dataset.FT_PROMPT, dataset.ft_answer(pose)),
    ]
    return tuple(steps)


def _target_pixels(view: CameraView, obj: ArticulatedObject, target_joint: int) -> np.ndarray:
    part_id = obj.part_of_joint(target_joint)
    pool = np.argwhere(view.part_id == part_id)  # rows (y, x)
    if len(pool) == 0:
        raise VisibilityError(f"part of joint {target_joint} is not visible")
    return pool


def propose_normal_oracle(
    obj: ArticulatedObject,
    view: CameraView,
    target_joint: int,
    seed: int,
) -> PoseProposal:
    """Uniform random contact on the target part, approaching against its normal."""
    pool = _target_pixels(view, obj, target_joint)
    rng = np.random.default_rng(seed)
    y, x = pool[int(rng.integers(len(pool)))]
    forward = -view.normal_at(int(x), int(y))
    pose = _quantized_pose(view, int(x), int(y), forward)
    return PoseProposal(pose=pose, cot_trace=_cot_trace(obj.category, pose), source="oracle")


def propose_affordance_argmax(
    obj: ArticulatedObject,
    view: CameraView,
    amap: AffordanceMap,
    seed: int,
    top_fraction: float = 0.95,
) -> PoseProposal:
    """Uniform choice among pixels scoring within 95% of the best score."""
    if not amap.valid.any():
        raise VisibilityError("affordance map has an empty valid mask")
    best = float(amap.scores[amap.valid].max())
    mask = amap.valid & (amap.scores >= top_fraction * best)
    pool = np.argwhere(mask)
    rng = np.random.default_rng(seed)
    y, x = pool[int(rng.integers(len(pool)))]
    forward = -view.normal_at(int(x), int(y))
    pose = _quantized_pose(view, int(x), int(y), forward)
    return PoseProposal(pose=pose, cot_trace=_cot_trace(obj.category, pose), source="affordance")


# ---------------------------------------------------------------------------
# Test-time adaptation scorer
# ---------------------------------------------------------------------------

@dataclass
class TtaScorer:
    """Online logistic scorer over pixel features, updated from outcomes.

    The step size decays as 1/sqrt(updates) so repeated conflicting outcomes
    on the same features settle toward 0.5 instead of oscillating.
    """

    weights: np.ndarray = field(default_factory=lambda: np.zeros(FEATURE_DIM))
    learning_rate: float = 0.5
    update_count: int = 0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (FEATURE_DIM,):
            raise ValueError(f"weights must have shape ({FEATURE_DIM},)")

    def to_json(self) -> str:
        return json.dumps(
            {
                "weights": self.weights.tolist(),
                "learning_rate": self.learning_rate,
                "update_count": self.update_count,
            }
        )

    @staticmethod
    def from_json(text: str) -> "TtaScorer":
        data = json.loads(text)
        return TtaScorer(
            weights=np.asarray(data["weights"], dtype=float),
            learning_rate=float(data["learning_rate"]),
            update_count=int(data["update_count"]),
        )


def pixel_features(view: CameraView, amap: AffordanceMap, pixel) -> np.ndarray:
    """Features of a candidate contact pixel for the online scorer."""
    x, y = int(pixel[0]), int(pixel[1])
    ys, xs = np.nonzero(amap.valid)
    cx = float(xs.mean())
    cy = float(ys.mean())
    diag = math.hypot(view.width, view.height)
    return np.array(
        [
            x / max(view.width - 1, 1),
            y / max(view.height - 1, 1),
            float(amap.scores[y, x]),
            math.hypot(x - cx, y - cy) / diag,
            1.0,
        ]
    )


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


_SCORE_EPS = 1e-12


def tta_score(scorer: TtaScorer, features) -> float:
    p = _sigmoid(float(scorer.weights @ np.asarray(features, dtype=float)))
    return min(max(p, _SCORE_EPS), 1.0 - _SCORE_EPS)  # keep the open interval


def tta_update(scorer: TtaScorer, features, outcome: bool) -> TtaScorer:
    """One binary cross-entropy gradient step (label 1 = success)."""
    features = np.asarray(features, dtype=float)
    p = tta_score(scorer, features)
    label = 1.0 if outcome else 0.0
    step = scorer.learning_rate / math.sqrt(1.0 + scorer.update_count)
    scorer.weights = scorer.weights - step * (p - label) * features
    scorer.update_count += 1
    return scorer


def propose_with_tta(
    base_policy,
    scorer: TtaScorer,
    obj: ArticulatedObject,
    view: CameraView,
    amap: AffordanceMap,
    seed: int,
    candidate_count: int = 8,
) -> PoseProposal:
    """Draw candidates from the base policy and keep the top-scoring one.

    `base_policy` is called as base_policy(obj, view, amap, seed); ties keep
    the first candidate, so an untrained scorer reproduces the base policy.
    """
    if candidate_count < 1:
        raise ValueError("candidate_count must be >= 1")
    rng = np.random.default_rng(seed)
    candidates = []
    for _ in range(candidate_count):
        sub_seed = int(rng.integers(0, 2**63 - 1))
        candidates.append(base_policy(obj, view, amap, sub_seed))
    scores = [
        tta_score(scorer, pixel_features(view, amap, c.pose.contact_px))
        for c in candidates
    ]
    best = int(np.argmax(scores))
    chosen = candidates[best]
    px = chosen.pose.contact_px
    assessment = (
        dataset.APR_SINGLE_PROMPT_PREFIX + f"({px[0]}, {px[1]})",
        "yes",
    )
    return PoseProposal(
        pose=chosen.pose,
        cot_trace=chosen.cot_trace + (assessment,),
        source=chosen.source + "+tta",
    )


# ---------------------------------------------------------------------------
# Policy registry (CLI names)
# ---------------------------------------------------------------------------

def oracle_policy(obj, view, amap, seed):
    return propose_normal_oracle(obj, view, amap.target_joint, seed)


def affordance_policy(obj, view, amap, seed):
    return propose_affordance_argmax(obj, view, amap, seed)


POLICIES = {
    "oracle": oracle_policy,
    "affordance": affordance_policy,
}

TTA_POLICY_NAMES = {"oracle+tta": "oracle", "affordance+tta": "affordance"}


def policy_names() -> tuple:
    return tuple(POLICIES) + tuple(TTA_POLICY_NAMES)
