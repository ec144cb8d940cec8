"""Quasi-static impedance response and the closed-loop direction optimizer.

The contact is a suction attachment on one movable part. A force f applied
at the contact produces a joint displacement dq = (J . f) / k, where J is
the derivative of the contact's world position with respect to the joint
value and k is the joint compliance; limits clamp dq. Probes measure the
resulting Cartesian displacement without mutating state; each loop step
probes the previous direction plus random perturbations, keeps the best,
and commits one movement step along it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import scene
from .dataset import ManipPose
from .errors import ContactError, StallError
from .scene import ArticulatedObject

COMMIT_FORCE_FACTOR = 10.0  # commit steps push harder than measurement probes

SUCTION_CONE_DEG = 60.0

DEFAULT_COMPLIANCE = 500.0  # generalized force per unit joint motion


@dataclass(frozen=True)
class AiaConfig:
    num_perturbations: int = 16
    perturbation_radius: float = 0.5  # direction-space ball for candidates
    probe_force: float = 1.0
    joint_compliance: float = DEFAULT_COMPLIANCE
    max_steps: int = 50
    target_displacement: float = 0.1  # joint units

    def __post_init__(self):
        if self.num_perturbations < 0:
            raise ValueError("num_perturbations must be >= 0")
        for name in ("perturbation_radius", "probe_force", "joint_compliance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return {
            "num_perturbations": self.num_perturbations,
            "perturbation_radius": self.perturbation_radius,
            "probe_force": self.probe_force,
            "joint_compliance": self.joint_compliance,
            "max_steps": self.max_steps,
            "target_displacement": self.target_displacement,
        }

    @staticmethod
    def from_dict(data: dict) -> "AiaConfig":
        return AiaConfig(**data)


@dataclass(frozen=True)
class ContactState:
    obj: ArticulatedObject
    target_joint: int
    q: float
    contact_local: np.ndarray  # part-local coordinates of the suction point
    attached: bool = True
    step_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "contact_local", np.asarray(self.contact_local, dtype=float))

    @property
    def part_index(self) -> int:
        for i, part in enumerate(self.obj.parts):
            if part.attached_joint == self.target_joint:
                return i
        raise ValueError("target joint has no attached part")


def _joint_vector(state: ContactState, q: float) -> np.ndarray:
    values = state.obj.joint_values()
    values[state.target_joint] = q
    return values


def contact_world(state: ContactState, q: float | None = None) -> np.ndarray:
    if q is None:
        q = state.q
    rot, trans = scene.part_transform(state.obj, _joint_vector(state, q), state.part_index)
    return rot @ state.contact_local + trans


def contact_jacobian(state: ContactState) -> np.ndarray:
    """d(contact world position)/dq at the current joint value."""
    joint = state.obj.joints[state.target_joint]
    base_r = state.obj.base_rotation
    axis = base_r @ joint.axis_direction
    if joint.kind == scene.PRISMATIC:
        return axis
    origin = base_r @ joint.axis_origin + state.obj.base_translation
    return np.cross(axis, contact_world(state) - origin)


def _clamped_dq(state: ContactState, tau: float, compliance: float) -> float:
    lo, hi = state.obj.joints[state.target_joint].limits
    q_new = min(max(state.q + tau / compliance, lo), hi)
    return q_new - state.q


def apply_probe(
    state: ContactState,
    direction,
    magnitude: float,
    compliance: float = DEFAULT_COMPLIANCE,
) -> float:
    """Cartesian displacement of the contact under a test force; no mutation."""
    if not state.attached:
        raise ContactError("probe on a detached contact")
    direction = np.asarray(direction, dtype=float)
    jac = contact_jacobian(state)
    tau = float(jac @ (magnitude * direction))
    dq = _clamped_dq(state, tau, compliance)
    if dq == 0.0:
        return 0.0
    return float(np.linalg.norm(contact_world(state, state.q + dq) - contact_world(state)))


def _ball_perturbations(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    """Uniform samples from the open ball of the given radius."""
    if count == 0:
        return np.zeros((0, 3))
    vecs = rng.normal(size=(count, 3))
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = radius * rng.uniform(size=(count, 1)) ** (1.0 / 3.0)
    return vecs / norms * radii


def candidate_directions(direction, cfg: AiaConfig, seed: int) -> np.ndarray:
    """Previous direction first, then normalized perturbed variants."""
    direction = scene.unit(np.asarray(direction, dtype=float))
    rng = np.random.default_rng(seed)
    zetas = _ball_perturbations(rng, cfg.num_perturbations, cfg.perturbation_radius)
    candidates = [direction]
    for z in zetas:
        candidates.append(scene.unit(direction + z))
    return np.array(candidates)


def aia_step(state: ContactState, direction, cfg: AiaConfig, seed: int):
    """Probe perturbed directions, pick the argmax displacement, commit one step.

    Ties go to the lowest candidate index, so the unperturbed direction wins
    when no perturbation helps. Raises StallError when every probe measures
    zero displacement.
    """
    candidates = candidate_directions(direction, cfg, seed)
    deltas = np.array(
        [apply_probe(state, d, cfg.probe_force, cfg.joint_compliance) for d in candidates]
    )
    if float(deltas.max()) == 0.0:
        raise StallError(f"all {len(candidates)} probed directions stalled")
    opt = int(np.argmax(deltas))  # first maximum: lowest index wins ties
    d_opt = candidates[opt]

    jac = contact_jacobian(state)
    tau = float(jac @ (COMMIT_FORCE_FACTOR * cfg.probe_force * d_opt))
    dq = _clamped_dq(state, tau, cfg.joint_compliance)
    new_state = replace(state, q=state.q + dq, step_index=state.step_index + 1)
    return d_opt, new_state


@dataclass(frozen=True)
class StepTrace:
    direction: tuple
    delta: float  # Cartesian displacement of the contact for this commit
    q: float  # joint value after the commit


@dataclass(frozen=True)
class ManipulationResult:
    displacement: float  # |q_end - q_start| in joint units
    steps: int
    trace: tuple
    reason: str  # "target", "max-steps", "stall", or an attach failure
    start_q: float
    end_q: float
    target_joint: int

    def reached(self, threshold: float) -> bool:
        return self.displacement > threshold

    def to_dict(self) -> dict:
        return {
            "displacement": self.displacement,
            "steps": self.steps,
            "reason": self.reason,
            "start_q": self.start_q,
            "end_q": self.end_q,
            "target_joint": self.target_joint,
            "trace": [
                {"direction": list(s.direction), "delta": s.delta, "q": s.q}
                for s in self.trace
            ],
        }


def _failure(reason: str, q: float = 0.0, joint: int = -1) -> ManipulationResult:
    return ManipulationResult(displacement=0.0, steps=0, trace=(), reason=reason,
                              start_q=q, end_q=q, target_joint=joint)


def establish_contact(obj: ArticulatedObject, pose: ManipPose, joint_values=None):
    """Locate the surface under the pose and check the suction cone.

    Returns (ContactState, None) on success or (None, reason) on an
    attachment failure; reasons are results, not exceptions.
    """
    if joint_values is None:
        joint_values = obj.joint_values()
    joint_values = np.asarray(joint_values, dtype=float)
    try:
        part_index, tri_index = scene.locate_point(obj, joint_values, pose.contact_3d)
    except Exception:
        return None, "no-surface"
    part = obj.parts[part_index]
    if not part.movable:
        return None, "fixed-part"
    rot, trans = scene.part_transform(obj, joint_values, part_index)
    posed_tri = part.triangles[tri_index] @ rot.T + trans
    normal = scene.triangle_normal(posed_tri)
    approach = np.asarray(pose.forward_dir, dtype=float)
    if float(approach @ (-normal)) < math.cos(math.radians(SUCTION_CONE_DEG)):
        return None, "suction-cone"
    target_joint = part.attached_joint
    q = float(joint_values[target_joint])
    local = rot.T @ (pose.contact_3d - trans)
    state = ContactState(obj=obj, target_joint=target_joint, q=q, contact_local=local)
    return state, None


def run_manipulation(
    obj: ArticulatedObject,
    pose: ManipPose,
    cfg: AiaConfig,
    seed: int,
    joint_values=None,
) -> ManipulationResult:
    """Attach at the pose, then loop the direction optimizer until the target
    joint displacement, the step budget, or a stall."""
    state, fail_reason = establish_contact(obj, pose, joint_values)
    if state is None:
        return _failure(fail_reason)

    start_q = state.q
    # The gripper approaches along forward_dir and pulls back along its
    # opposite; that pulling direction seeds the optimizer.
    direction = -np.asarray(pose.forward_dir, dtype=float)
    rng = np.random.default_rng(seed)
    trace: list[StepTrace] = []
    reason = "max-steps"
    for _ in range(cfg.max_steps):
        step_seed = int(rng.integers(0, 2**63 - 1))
        try:
            d_opt, new_state = aia_step(state, direction, cfg, step_seed)
        except StallError:
            reason = "stall"
            break
        delta = float(np.linalg.norm(contact_world(new_state) - contact_world(state)))
        trace.append(StepTrace(direction=tuple(float(c) for c in d_opt),
                               delta=delta, q=new_state.q))
        state = new_state
        direction = d_opt
        if abs(state.q - start_q) >= cfg.target_displacement:
            reason = "target"
            break
    return ManipulationResult(
        displacement=abs(state.q - start_q),
        steps=len(trace),
        trace=tuple(trace),
        reason=reason,
        start_q=start_q,
        end_q=state.q,
        target_joint=state.target_joint,
    )
