"""Shared episode setup: object + camera + view + affordance map.

Episodes drive dataset collection, evaluation, and the adaptation runs. The
camera sampler itself is unrestricted; the episode driver re-samples (with
derived seeds, deterministically) until the target part is visible and its
visible surface is mostly pullable, mirroring a setup where the operable
side of the object faces the sensor. The final camera seed is recorded so an
episode can be replayed without repeating the search.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass

import numpy as np

from . import affordance, control, dataset, policy, render, scene
from .errors import ArtmanipError, NoAffordanceError, VisibilityError

log = logging.getLogger(__name__)

MAX_CAMERA_ATTEMPTS = 20
MIN_PULLABLE_FRACTION = 0.5
PULLABLE_COS = 0.1

COLLECT_TARGET_DISPLACEMENT = 0.02  # just past the initial-movement threshold
INITIAL_THRESHOLD = 0.01


@dataclass
class EpisodeSetup:
    obj: scene.ArticulatedObject
    object_seed: int
    target_joint: int
    camera_seed: int
    view: render.CameraView
    amap: affordance.AffordanceMap


def pullable_fraction(
    obj: scene.ArticulatedObject, view: render.CameraView, target_joint: int
) -> float:
    """Fraction of the target part's visible pixels where pulling along the
    outward normal advances the joint."""
    part_id = obj.part_of_joint(target_joint)
    mask = view.part_id == part_id
    if not mask.any():
        return 0.0
    joint = obj.joints[target_joint]
    base_r = obj.base_rotation
    axis = base_r @ joint.axis_direction
    pts = view.position3d[mask]
    normals = view.tri_normals[view.tri_index[mask]]
    if joint.kind == scene.PRISMATIC:
        jac = np.broadcast_to(axis, pts.shape)
    else:
        origin = base_r @ joint.axis_origin + obj.base_translation
        jac = np.cross(np.broadcast_to(axis, pts.shape), pts - origin)
    norms = np.linalg.norm(jac, axis=1)
    ok = norms > 1e-9
    cosines = np.zeros(len(pts))
    cosines[ok] = (jac[ok] * normals[ok]).sum(axis=1) / norms[ok]
    return float((cosines > PULLABLE_COS).mean())


def prepare_episode(
    category: str,
    rng: np.random.Generator,
    resolution: int | None = None,
    probe_delta: float | None = None,
    params: dict | None = None,
) -> EpisodeSetup:
    """Build the scene and find a workable view; raises VisibilityError when
    no sampled camera exposes a pullable surface."""
    object_seed = int(rng.integers(0, 2**31 - 1))
    obj = scene.build_object(category, object_seed, params)
    target_joint = int(rng.integers(len(obj.joints)))
    intr = None
    if resolution is not None:
        intr = render.make_intrinsics(width=resolution, height=resolution)
    view = None
    camera_seed = -1
    for _ in range(MAX_CAMERA_ATTEMPTS):
        camera_seed = int(rng.integers(0, 2**31 - 1))
        cam = render.sample_camera(camera_seed)
        candidate = render.render(obj, cam=cam, intrinsics=intr)
        if pullable_fraction(obj, candidate, target_joint) >= MIN_PULLABLE_FRACTION:
            view = candidate
            break
    if view is None:
        raise VisibilityError(
            f"no workable view of {category!r} joint {target_joint} "
            f"in {MAX_CAMERA_ATTEMPTS} camera samples"
        )
    amap = affordance.affordance_map(
        obj, obj.joint_values(), view, target_joint, probe_delta
    )
    return EpisodeSetup(
        obj=obj,
        object_seed=object_seed,
        target_joint=target_joint,
        camera_seed=camera_seed,
        view=view,
        amap=amap,
    )


def rebuild_episode(meta: dict) -> EpisodeSetup:
    """Reconstruct an episode from recorded metadata (no camera search)."""
    obj = scene.build_object(meta["category"], int(meta["object_seed"]))
    target_joint = int(meta["target_joint"])
    width, height = meta["resolution"]
    intr = render.make_intrinsics(width=int(width), height=int(height))
    cam = render.sample_camera(int(meta["camera_seed"]))
    view = render.render(obj, cam=cam, intrinsics=intr)
    amap = affordance.affordance_map(obj, obj.joint_values(), view, target_joint)
    return EpisodeSetup(
        obj=obj,
        object_seed=int(meta["object_seed"]),
        target_joint=target_joint,
        camera_seed=int(meta["camera_seed"]),
        view=view,
        amap=amap,
    )


def episode_meta(setup: EpisodeSetup, control_seed: int) -> dict:
    joint = setup.obj.joints[setup.target_joint]
    return {
        "category": setup.obj.category,
        "joint_kind": joint.kind,
        "object_seed": setup.object_seed,
        "camera_seed": setup.camera_seed,
        "target_joint": setup.target_joint,
        "control_seed": control_seed,
        "resolution": [setup.view.width, setup.view.height],
    }


# ---------------------------------------------------------------------------
# Dataset collection
# ---------------------------------------------------------------------------

def collect(
    categories,
    per_category: int,
    seed: int,
    out_path,
    image_dir=None,
    resolution: int | None = None,
    cfg: control.AiaConfig | None = None,
    apr_count: int = 20,
    max_attempt_factor: int = 20,
) -> dict:
    """Oracle-driven collection; emits records only for successful episodes."""
    if cfg is None:
        cfg = control.AiaConfig(target_displacement=COLLECT_TARGET_DISPLACEMENT)
    rng = np.random.default_rng(seed)
    stats = {"episodes": 0, "successes": 0, "records": 0, "skipped": 0}
    if image_dir is not None:
        os.makedirs(image_dir, exist_ok=True)
    out_dir = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(out_dir, exist_ok=True)

    with open(out_path, "w", encoding="utf-8") as out:
        for category in categories:
            successes = 0
            attempts = 0
            budget = max(per_category * max_attempt_factor, 20)
            while successes < per_category and attempts < budget:
                attempts += 1
                stats["episodes"] += 1
                policy_seed = int(rng.integers(0, 2**31 - 1))
                sample_seed = int(rng.integers(0, 2**31 - 1))
                mask_seed = int(rng.integers(0, 2**31 - 1))
                control_seed = int(rng.integers(0, 2**31 - 1))
                try:
                    setup = prepare_episode(category, rng, resolution=resolution)
                    proposal = policy.propose_normal_oracle(
                        setup.obj, setup.view, setup.target_joint, policy_seed
                    )
                    sample = affordance.sample_pixels(
                        setup.amap, setup.view, apr_count, sample_seed, obj=setup.obj
                    )
                except (VisibilityError, NoAffordanceError) as exc:
                    log.info("skipping %s episode: %s", category, exc)
                    stats["skipped"] += 1
                    continue
                result = control.run_manipulation(
                    setup.obj, proposal.pose, cfg, control_seed
                )
                if not result.reached(INITIAL_THRESHOLD):
                    continue
                successes += 1
                episode_id = f"{category}-{successes - 1:05d}"
                image_ref = ""
                if image_dir is not None:
                    image_path = os.path.join(image_dir, f"{episode_id}.png")
                    render.save_shaded_png(setup.view, image_path)
                    # referenced relative to the JSONL so the dataset relocates
                    image_ref = os.path.relpath(image_path, out_dir)
                meta = episode_meta(setup, control_seed)
                records = dataset.episode_records(
                    category, sample, proposal.pose, mask_seed, episode_id, image_ref, meta
                )
                for record in records:
                    out.write(record.to_json() + "\n")
                stats["records"] += len(records)
            stats["successes"] += successes
            if successes < per_category:
                log.warning(
                    "category %s: only %d/%d successes within %d attempts",
                    category, successes, per_category, budget,
                )
    return stats


def replay_record(record: dataset.PromptRecord, cfg: control.AiaConfig | None = None):
    """Re-run the manipulation stored in an FT record; returns the result."""
    if record.task != dataset.TASK_FT:
        raise ArtmanipError("only FT records can be replayed")
    setup = rebuild_episode(record.meta)
    pose = dataset.pose_from_answer(record.answer, setup.view)
    if cfg is None:
        cfg = control.AiaConfig(target_displacement=COLLECT_TARGET_DISPLACEMENT)
    return control.run_manipulation(
        setup.obj, pose, cfg, int(record.meta["control_seed"])
    )
