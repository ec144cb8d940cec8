"""Procedural articulated objects: parametric generators, forward kinematics, normals.

Conventions: world units are meters, z is up, revolute joint values are radians.
Geometry is triangle soup with outward winding (counter-clockwise seen from
outside), so face normals come straight from the vertex order. Every category
generator builds an object of roughly one meter extent whose bounding box is
centered at the origin, with all joints at their lower limit (closed state).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
import numpy as np

from .errors import GeometryError, JointLimitError, UnknownCategoryError

REVOLUTE = "revolute"
PRISMATIC = "prismatic"

SCHEMA_VERSION = 1

_UNIT_TOL = 1e-9
_MIN_TRIANGLE_AREA = 1e-12


def unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for a unit axis."""
    x, y, z = axis
    c = math.cos(angle)
    s = math.sin(angle)
    t = 1.0 - c
    return np.array(
        [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ]
    )


def triangle_normal(tri: np.ndarray) -> np.ndarray:
    """Outward unit normal of one triangle (assumes outward winding)."""
    e1 = tri[1] - tri[0]
    e2 = tri[2] - tri[0]
    return unit(np.cross(e1, e2))


def point_triangle_distance(p: np.ndarray, tri: np.ndarray) -> float:
    """Distance from a point to the closest point on a triangle."""
    a, b, c = tri[0], tri[1], tri[2]
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = float(ab @ ap)
    d2 = float(ac @ ap)
    if d1 <= 0.0 and d2 <= 0.0:
        return float(np.linalg.norm(ap))
    bp = p - b
    d3 = float(ab @ bp)
    d4 = float(ac @ bp)
    if d3 >= 0.0 and d4 <= d3:
        return float(np.linalg.norm(bp))
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        w = d1 / (d1 - d3)
        return float(np.linalg.norm(ap - w * ab))
    cp = p - c
    d5 = float(ab @ cp)
    d6 = float(ac @ cp)
    if d6 >= 0.0 and d5 <= d6:
        return float(np.linalg.norm(cp))
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        return float(np.linalg.norm(ap - w * ac))
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return float(np.linalg.norm(p - (b + w * (c - b))))
    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    return float(np.linalg.norm(p - (a + v * ab + w * ac)))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class JointSpec:
    """One degree of freedom: a hinge axis or a slide axis with limits."""

    kind: str
    axis_origin: np.ndarray
    axis_direction: np.ndarray
    limits: tuple[float, float]
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in (REVOLUTE, PRISMATIC):
            raise ValueError(f"unknown joint kind {self.kind!r}")
        object.__setattr__(self, "axis_origin", _frozen(self.axis_origin))
        direction = np.asarray(self.axis_direction, dtype=float)
        if abs(np.linalg.norm(direction) - 1.0) > _UNIT_TOL:
            raise ValueError("axis_direction must be unit length")
        object.__setattr__(self, "axis_direction", _frozen(direction))
        lo, hi = float(self.limits[0]), float(self.limits[1])
        if lo > hi:
            raise ValueError("joint limits must satisfy q_min <= q_max")
        object.__setattr__(self, "limits", (lo, hi))
        if not (lo <= self.value <= hi):
            raise JointLimitError(
                f"joint value {self.value} outside limits [{lo}, {hi}]"
            )

    def check_value(self, value: float) -> float:
        lo, hi = self.limits
        if not (lo <= value <= hi):
            raise JointLimitError(f"value {value} outside limits [{lo}, {hi}]")
        return float(value)


@dataclass(frozen=True)
class PartGeometry:
    """Triangle soup of one rigid part, in its own local frame."""

    triangles: np.ndarray  # (N, 3, 3)
    part_id: int
    movable: bool
    attached_joint: int | None = None
    handle_point: np.ndarray | None = None  # local anchor a handle would occupy

    def __post_init__(self):
        tris = np.asarray(self.triangles, dtype=float).reshape(-1, 3, 3)
        areas = 0.5 * np.linalg.norm(
            np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0]), axis=1
        )
        if np.any(areas <= _MIN_TRIANGLE_AREA):
            raise ValueError(f"part {self.part_id}: degenerate triangle")
        object.__setattr__(self, "triangles", _frozen(tris))
        if self.movable != (self.attached_joint is not None):
            raise ValueError("movable parts need a joint; fixed parts must not have one")
        if self.handle_point is not None:
            object.__setattr__(self, "handle_point", _frozen(self.handle_point))


@dataclass(frozen=True)
class ArticulatedObject:
    """A manipulation scene: rigid parts tied together by 1-DoF joints."""

    category: str
    parts: tuple[PartGeometry, ...]
    joints: tuple[JointSpec, ...]
    base_rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    base_translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "base_rotation", _frozen(self.base_rotation))
        object.__setattr__(self, "base_translation", _frozen(self.base_translation))
        referenced = [p.attached_joint for p in self.parts if p.movable]
        if sorted(referenced) != list(range(len(self.joints))):
            raise ValueError("each joint must be attached to exactly one movable part")

    def joint_values(self) -> np.ndarray:
        return np.array([j.value for j in self.joints])

    def part_of_joint(self, joint_index: int) -> int:
        for part in self.parts:
            if part.attached_joint == joint_index:
                return part.part_id
        raise ValueError(f"no part attached to joint {joint_index}")

    def triangle_count(self) -> int:
        return sum(len(p.triangles) for p in self.parts)


def _check_joint_values(obj: ArticulatedObject, joint_values) -> np.ndarray:
    values = np.asarray(joint_values, dtype=float)
    if values.shape != (len(obj.joints),):
        raise ValueError(f"expected {len(obj.joints)} joint values, got {values.shape}")
    for joint, value in zip(obj.joints, values):
        joint.check_value(float(value))
    return values


def joint_displacement_transform(joint: JointSpec, value: float):
    """Rigid transform (R, t) moving the attached part from value 0 to `value`."""
    if joint.kind == PRISMATIC:
        return np.eye(3), value * joint.axis_direction
    rot = rotation_about_axis(joint.axis_direction, value)
    return rot, joint.axis_origin - rot @ joint.axis_origin


def part_transform(obj: ArticulatedObject, joint_values, part_index: int):
    """World placement (R, t) of one part at the given joint values."""
    values = _check_joint_values(obj, joint_values)
    part = obj.parts[part_index]
    rot = np.eye(3)
    trans = np.zeros(3)
    if part.movable:
        rot, trans = joint_displacement_transform(
            obj.joints[part.attached_joint], float(values[part.attached_joint])
        )
    base_r = obj.base_rotation
    base_t = obj.base_translation
    return base_r @ rot, base_r @ trans + base_t


def transform_points(rot: np.ndarray, trans: np.ndarray, pts: np.ndarray) -> np.ndarray:
    return pts @ rot.T + trans


def forward_kinematics(obj: ArticulatedObject, joint_values):
    """Pose every part; returns (triangles (M,3,3), part_id per triangle (M,))."""
    _check_joint_values(obj, joint_values)
    tris = []
    ids = []
    for index, part in enumerate(obj.parts):
        rot, trans = part_transform(obj, joint_values, index)
        posed = part.triangles @ rot.T + trans
        tris.append(posed)
        ids.append(np.full(len(part.triangles), part.part_id, dtype=np.int32))
    return np.concatenate(tris, axis=0), np.concatenate(ids)


def locate_point(obj: ArticulatedObject, joint_values, point, tol: float = 1e-6):
    """Find (part_index, local_triangle_index) of the surface containing `point`."""
    point = np.asarray(point, dtype=float)
    best = (None, None, math.inf)
    for index, part in enumerate(obj.parts):
        rot, trans = part_transform(obj, joint_values, index)
        posed = part.triangles @ rot.T + trans
        for k, tri in enumerate(posed):
            d = point_triangle_distance(point, tri)
            if d < best[2]:
                best = (index, k, d)
    if best[2] >= tol:
        raise GeometryError(f"point {point.tolist()} not on any surface (closest {best[2]:.2e})")
    return best[0], best[1]


def surface_normal(obj: ArticulatedObject, joint_values, part_id: int, point, tol: float = 1e-6):
    """Outward face normal of the triangle of `part_id` containing `point`."""
    point = np.asarray(point, dtype=float)
    index = next((i for i, p in enumerate(obj.parts) if p.part_id == part_id), None)
    if index is None:
        raise GeometryError(f"no part with id {part_id}")
    rot, trans = part_transform(obj, joint_values, index)
    posed = obj.parts[index].triangles @ rot.T + trans
    dists = np.array([point_triangle_distance(point, tri) for tri in posed])
    k = int(np.argmin(dists))
    if dists[k] >= tol:
        raise GeometryError(
            f"point {point.tolist()} not on part {part_id} (closest {dists[k]:.2e})"
        )
    return triangle_normal(posed[k])


# ---------------------------------------------------------------------------
# Procedural generators
# ---------------------------------------------------------------------------

# Corner order: bit 0 -> +x, bit 1 -> +y, bit 2 -> +z is NOT used; corners are
# listed explicitly so each face keeps outward winding.
_BOX_QUADS = (
    (0, 3, 2, 1),  # -z
    (4, 5, 6, 7),  # +z
    (0, 1, 5, 4),  # -y
    (2, 3, 7, 6),  # +y
    (0, 4, 7, 3),  # -x
    (1, 2, 6, 5),  # +x
)


def box_triangles(center, half_extents) -> np.ndarray:
    """12 outward-wound triangles of an axis-aligned box."""
    cx, cy, cz = center
    hx, hy, hz = half_extents
    corners = np.array(
        [
            [cx - hx, cy - hy, cz - hz],
            [cx + hx, cy - hy, cz - hz],
            [cx + hx, cy + hy, cz - hz],
            [cx - hx, cy + hy, cz - hz],
            [cx - hx, cy - hy, cz + hz],
            [cx + hx, cy - hy, cz + hz],
            [cx + hx, cy + hy, cz + hz],
            [cx - hx, cy + hy, cz + hz],
        ]
    )
    tris = []
    for a, b, c, d in _BOX_QUADS:
        tris.append(corners[[a, b, c]])
        tris.append(corners[[a, c, d]])
    return np.array(tris)


@dataclass
class _PartDraft:
    triangles: np.ndarray
    movable: bool = False
    attached_joint: int | None = None
    handle_point: np.ndarray | None = None


def _assemble(category: str, drafts: list[_PartDraft], joints: list[JointSpec]) -> ArticulatedObject:
    """Center the closed-state bounding box at the origin and freeze the object."""
    all_pts = np.concatenate([d.triangles.reshape(-1, 3) for d in drafts])
    shift = -(all_pts.min(axis=0) + all_pts.max(axis=0)) / 2.0
    parts = []
    for pid, draft in enumerate(drafts):
        handle = None if draft.handle_point is None else draft.handle_point + shift
        parts.append(
            PartGeometry(
                triangles=draft.triangles + shift,
                part_id=pid,
                movable=draft.movable,
                attached_joint=draft.attached_joint,
                handle_point=handle,
            )
        )
    shifted_joints = [
        replace(j, axis_origin=np.asarray(j.axis_origin) + shift) for j in joints
    ]
    return ArticulatedObject(category=category, parts=tuple(parts), joints=tuple(shifted_joints))


def _draw(rng: np.random.Generator, ranges: dict, key: str) -> float:
    lo, hi = ranges[key]
    if hi < lo:
        raise ValueError(f"empty range for {key!r}: ({lo}, {hi})")
    return float(rng.uniform(lo, hi))


def _gen_drawer(rng, ranges):
    depth = _draw(rng, ranges, "depth")
    width = _draw(rng, ranges, "width")
    height = _draw(rng, ranges, "height")
    t = 0.03
    lip = 0.02
    shell = [
        box_triangles((0, 0, -height / 2 + t / 2), (depth / 2, width / 2, t / 2)),
        box_triangles((0, 0, height / 2 - t / 2), (depth / 2, width / 2, t / 2)),
        box_triangles((0, -width / 2 + t / 2, 0), (depth / 2, t / 2, height / 2 - t)),
        box_triangles((0, width / 2 - t / 2, 0), (depth / 2, t / 2, height / 2 - t)),
        box_triangles((-depth / 2 + t / 2, 0, 0), (t / 2, width / 2 - t, height / 2 - t)),
    ]
    gap = 0.01
    dhx = (depth - t) / 2 - gap
    dhy = width / 2 - t - gap
    dhz = height / 2 - t - gap
    front_x = depth / 2 + lip
    drawer = box_triangles((front_x - dhx, 0, 0), (dhx, dhy, dhz))
    joint = JointSpec(
        kind=PRISMATIC,
        axis_origin=np.array([front_x - dhx, 0.0, 0.0]),
        axis_direction=np.array([1.0, 0.0, 0.0]),
        limits=(0.0, 0.6 * depth),
    )
    # pull placement varies across instances within the central zone of the face
    handle = np.array([
        front_x,
        rng.uniform(-0.45, 0.45) * dhy,
        rng.uniform(-0.45, 0.45) * dhz,
    ])
    drafts = [
        _PartDraft(np.concatenate(shell)),
        _PartDraft(drawer, movable=True, attached_joint=0, handle_point=handle),
    ]
    return drafts, [joint]


def _hinged_panel(rng, ranges):
    """Door-like objects: fixed frame posts plus a panel on a vertical hinge."""
    width = _draw(rng, ranges, "width")
    height = _draw(rng, ranges, "height")
    th = 0.04
    side = 1.0 if rng.uniform() < 0.5 else -1.0  # hinge on +y or -y edge
    post = 0.06
    frame = [
        box_triangles((0, -width / 2 - post / 2, 0), (post / 2, post / 2, height / 2 + post)),
        box_triangles((0, width / 2 + post / 2, 0), (post / 2, post / 2, height / 2 + post)),
        box_triangles((0, 0, height / 2 + post / 2), (post / 2, width / 2 + post, post / 2)),
    ]
    panel = box_triangles((0, 0, 0), (th / 2, width / 2 - 0.005, height / 2 - 0.005))
    # Axis sign keeps positive joint values swinging the free edge toward +x.
    joint = JointSpec(
        kind=REVOLUTE,
        axis_origin=np.array([0.0, side * width / 2, 0.0]),
        axis_direction=np.array([0.0, 0.0, side]),
        limits=(0.0, 1.6),
    )
    drafts = [
        _PartDraft(np.concatenate(frame)),
        _PartDraft(panel, movable=True, attached_joint=0,
                   handle_point=np.array([th / 2, -side * (width / 2 - 0.06), 0.0])),
    ]
    return drafts, [joint]


def _gen_door(rng, ranges):
    return _hinged_panel(rng, ranges)


def _gen_safe(rng, ranges):
    depth = _draw(rng, ranges, "depth")
    width = _draw(rng, ranges, "width")
    height = _draw(rng, ranges, "height")
    dt = 0.05
    side = 1.0 if rng.uniform() < 0.5 else -1.0
    body = box_triangles((0, 0, 0), (depth / 2, width / 2, height / 2))
    door_hy = width / 2 - 0.05
    door_hz = height / 2 - 0.05
    door = box_triangles((depth / 2 + dt / 2, 0, 0), (dt / 2, door_hy, door_hz))
    joint = JointSpec(
        kind=REVOLUTE,
        axis_origin=np.array([depth / 2 + dt / 2, side * door_hy, 0.0]),
        axis_direction=np.array([0.0, 0.0, side]),
        limits=(0.0, 1.5),
    )
    drafts = [
        _PartDraft(body),
        _PartDraft(door, movable=True, attached_joint=0,
                   handle_point=np.array([depth / 2 + dt, -side * (door_hy - 0.07), 0.0])),
    ]
    return drafts, [joint]


def _back_hinged_lid(body_drafts, lid_center, lid_half, hinge_x, hinge_z, limits, handle):
    """Lid hinged along its back (-x) edge; positive values lift the front edge."""
    lid = box_triangles(lid_center, lid_half)
    joint = JointSpec(
        kind=REVOLUTE,
        axis_origin=np.array([hinge_x, 0.0, hinge_z]),
        axis_direction=np.array([0.0, -1.0, 0.0]),
        limits=limits,
    )
    drafts = body_drafts + [
        _PartDraft(lid, movable=True, attached_joint=0, handle_point=np.asarray(handle))
    ]
    return drafts, [joint]


def _gen_lid_box(rng, ranges):
    depth = _draw(rng, ranges, "depth")
    width = _draw(rng, ranges, "width")
    height = _draw(rng, ranges, "height")
    t = 0.03
    lt = 0.04
    body_top = height / 2 - lt
    body = [
        box_triangles((0, 0, -height / 2 + t / 2), (depth / 2, width / 2, t / 2)),
        box_triangles((0, -width / 2 + t / 2, (body_top - height / 2) / 2),
                      (depth / 2, t / 2, (body_top + height / 2) / 2)),
        box_triangles((0, width / 2 - t / 2, (body_top - height / 2) / 2),
                      (depth / 2, t / 2, (body_top + height / 2) / 2)),
        box_triangles((-depth / 2 + t / 2, 0, (body_top - height / 2) / 2),
                      (t / 2, width / 2 - t, (body_top + height / 2) / 2)),
        box_triangles((depth / 2 - t / 2, 0, (body_top - height / 2) / 2),
                      (t / 2, width / 2 - t, (body_top + height / 2) / 2)),
    ]
    return _back_hinged_lid(
        [_PartDraft(np.concatenate(body))],
        lid_center=(0, 0, height / 2 - lt / 2),
        lid_half=(depth / 2, width / 2, lt / 2),
        hinge_x=-depth / 2,
        hinge_z=height / 2 - lt,
        limits=(0.0, 1.3),
        handle=np.array([depth / 2 - 0.03, 0.0, height / 2]),
    )


def _gen_laptop(rng, ranges):
    depth = _draw(rng, ranges, "depth")
    width = _draw(rng, ranges, "width")
    bt = 0.035
    st = 0.025
    base = box_triangles((0, 0, bt / 2), (depth / 2, width / 2, bt / 2))
    return _back_hinged_lid(
        [_PartDraft(base)],
        lid_center=(0, 0, bt + st / 2),
        lid_half=(depth / 2, width / 2, st / 2),
        hinge_x=-depth / 2,
        hinge_z=bt + st / 2,
        limits=(0.0, 1.9),
        handle=np.array([depth / 2 - 0.02, 0.0, bt + st]),
    )


def _gen_trashcan(rng, ranges):
    side_len = _draw(rng, ranges, "width")
    height = _draw(rng, ranges, "height")
    t = 0.025
    lt = 0.03
    body_top = height / 2 - lt
    walls = [
        box_triangles((0, 0, -height / 2 + t / 2), (side_len / 2, side_len / 2, t / 2)),
        box_triangles((0, -side_len / 2 + t / 2, (body_top - height / 2) / 2),
                      (side_len / 2, t / 2, (body_top + height / 2) / 2)),
        box_triangles((0, side_len / 2 - t / 2, (body_top - height / 2) / 2),
                      (side_len / 2, t / 2, (body_top + height / 2) / 2)),
        box_triangles((-side_len / 2 + t / 2, 0, (body_top - height / 2) / 2),
                      (t / 2, side_len / 2 - t, (body_top + height / 2) / 2)),
        box_triangles((side_len / 2 - t / 2, 0, (body_top - height / 2) / 2),
                      (t / 2, side_len / 2 - t, (body_top + height / 2) / 2)),
    ]
    overhang = 0.02
    return _back_hinged_lid(
        [_PartDraft(np.concatenate(walls))],
        lid_center=(0, 0, height / 2 - lt / 2),
        lid_half=(side_len / 2 + overhang, side_len / 2 + overhang, lt / 2),
        hinge_x=-side_len / 2 - overhang,
        hinge_z=height / 2 - lt,
        limits=(0.0, 1.4),
        handle=np.array([side_len / 2 + overhang - 0.02, 0.0, height / 2]),
    )


def _gen_kettle_lid(rng, ranges):
    side_len = _draw(rng, ranges, "width")
    height = _draw(rng, ranges, "height")
    body = box_triangles((0, 0, 0), (side_len / 2, side_len / 2, height / 2))
    spout = box_triangles((side_len / 2 + 0.05, 0, height * 0.2), (0.05, 0.03, 0.03))
    lid_h = 0.05
    lid_half = (0.22 * side_len, 0.22 * side_len, lid_h)
    lid_center = (0, 0, height / 2 + lid_h - 0.02)
    lid = box_triangles(lid_center, lid_half)
    knob = box_triangles((0, 0, height / 2 + 2 * lid_h + 0.005), (0.035, 0.035, 0.025))
    joint = JointSpec(
        kind=PRISMATIC,
        axis_origin=np.array(lid_center),
        axis_direction=np.array([0.0, 0.0, 1.0]),
        limits=(0.0, 0.12),
    )
    drafts = [
        _PartDraft(np.concatenate([body, spout])),
        _PartDraft(np.concatenate([lid, knob]), movable=True, attached_joint=0,
                   handle_point=np.array([0.0, 0.0, height / 2 + 2 * lid_h - 0.02])),
    ]
    return drafts, [joint]


def _gen_pliers(rng, ranges):
    length = _draw(rng, ranges, "length")
    wd = 0.08
    ht = 0.05
    offset = 0.042
    pivot = box_triangles((0, 0, 0), (0.045, 0.09, ht / 2 + 0.012))
    handle_a = box_triangles((length / 2 + 0.03, offset, 0), (length / 2, wd / 2, ht / 2))
    handle_b = box_triangles((-length / 2 - 0.03, -offset, 0), (length / 2, wd / 2, ht / 2))
    # Opposite axis signs so positive values lift both free tips upward.
    joint_a = JointSpec(
        kind=REVOLUTE,
        axis_origin=np.array([0.0, offset, 0.0]),
        axis_direction=np.array([0.0, -1.0, 0.0]),
        limits=(0.0, 0.7),
    )
    joint_b = JointSpec(
        kind=REVOLUTE,
        axis_origin=np.array([0.0, -offset, 0.0]),
        axis_direction=np.array([0.0, 1.0, 0.0]),
        limits=(0.0, 0.7),
    )
    drafts = [
        _PartDraft(pivot),
        _PartDraft(handle_a, movable=True, attached_joint=0,
                   handle_point=np.array([length - 0.05, offset, ht / 2])),
        _PartDraft(handle_b, movable=True, attached_joint=1,
                   handle_point=np.array([-length + 0.05, -offset, ht / 2])),
    ]
    return drafts, [joint_a, joint_b]


_DEFAULT_RANGES = {
    "drawer": {"depth": (0.5, 0.8), "width": (0.7, 1.0), "height": (0.5, 0.9)},
    "door": {"width": (0.7, 1.0), "height": (1.0, 1.4)},
    "safe": {"depth": (0.5, 0.7), "width": (0.6, 0.8), "height": (0.7, 1.0)},
    "lid-box": {"depth": (0.5, 0.7), "width": (0.7, 1.0), "height": (0.4, 0.6)},
    "laptop-hinge": {"depth": (0.45, 0.6), "width": (0.6, 0.85)},
    "trashcan": {"width": (0.35, 0.5), "height": (0.7, 1.0)},
    "kettle-lid": {"width": (0.35, 0.5), "height": (0.35, 0.5)},
    "pliers": {"length": (0.35, 0.48)},
}

_GENERATORS = {
    "drawer": _gen_drawer,
    "door": _gen_door,
    "safe": _gen_safe,
    "lid-box": _gen_lid_box,
    "laptop-hinge": _gen_laptop,
    "trashcan": _gen_trashcan,
    "kettle-lid": _gen_kettle_lid,
    "pliers": _gen_pliers,
}

DEFAULT_CATEGORIES = tuple(_GENERATORS)


def registered_categories() -> tuple[str, ...]:
    return DEFAULT_CATEGORIES


def build_object(category: str, seed: int, params: dict | None = None) -> ArticulatedObject:
    """Build one randomized object; deterministic for a fixed (category, seed)."""
    if category not in _GENERATORS:
        raise UnknownCategoryError(
            f"unknown category {category!r}; known: {sorted(_GENERATORS)}"
        )
    ranges = dict(_DEFAULT_RANGES[category])
    if params:
        for key, bounds in params.items():
            if key not in ranges:
                raise ValueError(f"unknown size parameter {key!r} for {category!r}")
            lo, hi = float(bounds[0]), float(bounds[1])
            if hi < lo:
                raise ValueError(f"empty range for {key!r}: ({lo}, {hi})")
            ranges[key] = (lo, hi)
    rng = np.random.default_rng(seed)
    drafts, joints = _GENERATORS[category](rng, ranges)
    return _assemble(category, drafts, joints)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def object_to_dict(obj: ArticulatedObject) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "category": obj.category,
        "base_pose": {
            "rotation": obj.base_rotation.reshape(-1).tolist(),
            "translation": obj.base_translation.tolist(),
        },
        "parts": [
            {
                "part_id": p.part_id,
                "movable": p.movable,
                "attached_joint": p.attached_joint,
                "handle_point": None if p.handle_point is None else p.handle_point.tolist(),
                "triangles": p.triangles.reshape(-1).tolist(),
            }
            for p in obj.parts
        ],
        "joints": [
            {
                "kind": j.kind,
                "axis_origin": j.axis_origin.tolist(),
                "axis_direction": j.axis_direction.tolist(),
                "limits": [j.limits[0], j.limits[1]],
                "value": j.value,
            }
            for j in obj.joints
        ],
    }


def object_from_dict(data: dict) -> ArticulatedObject:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported scene schema_version {version!r}")
    parts = tuple(
        PartGeometry(
            triangles=np.asarray(p["triangles"], dtype=float).reshape(-1, 3, 3),
            part_id=int(p["part_id"]),
            movable=bool(p["movable"]),
            attached_joint=None if p["attached_joint"] is None else int(p["attached_joint"]),
            handle_point=None if p.get("handle_point") is None else np.asarray(p["handle_point"]),
        )
        for p in data["parts"]
    )
    joints = tuple(
        JointSpec(
            kind=j["kind"],
            axis_origin=np.asarray(j["axis_origin"], dtype=float),
            axis_direction=np.asarray(j["axis_direction"], dtype=float),
            limits=(float(j["limits"][0]), float(j["limits"][1])),
            value=float(j["value"]),
        )
        for j in data["joints"]
    )
    pose = data["base_pose"]
    return ArticulatedObject(
        category=data["category"],
        parts=parts,
        joints=joints,
        base_rotation=np.asarray(pose["rotation"], dtype=float).reshape(3, 3),
        base_translation=np.asarray(pose["translation"], dtype=float),
    )


def save_object(obj: ArticulatedObject, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(object_to_dict(obj), fh)


def load_object(path) -> ArticulatedObject:
    with open(path, "r", encoding="utf-8") as fh:
        return object_from_dict(json.load(fh))
