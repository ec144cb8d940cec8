"""Pinhole camera, ray-cast rendering, and image export.

Camera frame follows the usual computer-vision convention: x right, y down,
z forward. Extrinsics map world points into that frame (p_cam = R @ p + t).
Rays go through pixel centers (x + 0.5, y + 0.5); the stored depth is the
camera-frame z of the hit, so back-projecting (pixel, depth) through the
intrinsics reproduces the stored 3D position exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, scene
from .errors import NoSurfaceError

DEFAULT_RESOLUTION = 336
DEFAULT_VFOV_DEG = 25.0

DISTANCE_RANGE = (4.5, 5.5)
AZIMUTH_RANGE_DEG = (0.0, 360.0)
ALTITUDE_RANGE_DEG = (30.0, 60.0)


@dataclass(frozen=True)
class CameraIntrinsics:
    width: int
    height: int
    focal: float  # pixels; same for x and y
    cx: float
    cy: float


def make_intrinsics(
    width: int = DEFAULT_RESOLUTION,
    height: int = DEFAULT_RESOLUTION,
    vfov_deg: float = DEFAULT_VFOV_DEG,
) -> CameraIntrinsics:
    focal = (height / 2.0) / math.tan(math.radians(vfov_deg) / 2.0)
    return CameraIntrinsics(width=width, height=height, focal=focal,
                            cx=width / 2.0, cy=height / 2.0)


@dataclass(frozen=True)
class CameraExtrinsics:
    """World-to-camera rigid transform."""

    rotation: np.ndarray  # (3, 3)
    translation: np.ndarray  # (3,)

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))

    @property
    def camera_center(self) -> np.ndarray:
        return -self.rotation.T @ self.translation


def look_at(position, target, up=(0.0, 0.0, 1.0)) -> CameraExtrinsics:
    position = np.asarray(position, dtype=float)
    forward = scene.unit(np.asarray(target, dtype=float) - position)
    right = np.cross(forward, np.asarray(up, dtype=float))
    right = scene.unit(right)
    down = np.cross(forward, right)
    rotation = np.stack([right, down, forward])
    return CameraExtrinsics(rotation=rotation, translation=-rotation @ position)


def sample_camera(
    seed: int,
    center=(0.0, 0.0, 0.0),
    distance_range=DISTANCE_RANGE,
    azimuth_range_deg=AZIMUTH_RANGE_DEG,
    altitude_range_deg=ALTITUDE_RANGE_DEG,
) -> CameraExtrinsics:
    """Random camera on the upper viewing shell, looking at `center`."""
    rng = np.random.default_rng(seed)
    distance = rng.uniform(*distance_range)
    azimuth = math.radians(rng.uniform(*azimuth_range_deg))
    altitude = math.radians(rng.uniform(*altitude_range_deg))
    center = np.asarray(center, dtype=float)
    offset = distance * np.array(
        [
            math.cos(altitude) * math.cos(azimuth),
            math.cos(altitude) * math.sin(azimuth),
            math.sin(altitude),
        ]
    )
    return look_at(center + offset, center)


@dataclass
class CameraView:
    """Rendered buffers plus the camera that produced them. Treat as read-only."""

    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics
    depth: np.ndarray  # (H, W) camera-z in meters, 0 where no hit
    part_id: np.ndarray  # (H, W) int32, -1 where no hit
    position3d: np.ndarray  # (H, W, 3) world frame, 0 where no hit
    tri_index: np.ndarray  # (H, W) int32 into the posed triangle soup, -1 miss
    tri_normals: np.ndarray  # (M, 3) outward normals of the posed soup
    joint_values: np.ndarray  # joint configuration the view was rendered at

    @property
    def width(self) -> int:
        return self.intrinsics.width

    @property
    def height(self) -> int:
        return self.intrinsics.height

    def project(self, point) -> tuple[float, float]:
        """World point -> continuous pixel coordinates (u, v)."""
        p_cam = self.extrinsics.rotation @ np.asarray(point, dtype=float) + self.extrinsics.translation
        if p_cam[2] <= 0:
            raise NoSurfaceError("point is behind the camera")
        u = self.intrinsics.focal * p_cam[0] / p_cam[2] + self.intrinsics.cx
        v = self.intrinsics.focal * p_cam[1] / p_cam[2] + self.intrinsics.cy
        return float(u), float(v)

    def normal_at(self, x: int, y: int) -> np.ndarray:
        tri = int(self.tri_index[y, x])
        if tri < 0:
            raise NoSurfaceError(f"pixel ({x}, {y}) hit nothing")
        return self.tri_normals[tri]


def _pixel_dirs_world(intr: CameraIntrinsics, extr: CameraExtrinsics) -> np.ndarray:
    """Per-pixel ray directions with unit camera-z, so hit t equals depth."""
    xs = (np.arange(intr.width) + 0.5 - intr.cx) / intr.focal
    ys = (np.arange(intr.height) + 0.5 - intr.cy) / intr.focal
    gx, gy = np.meshgrid(xs, ys)
    dirs_cam = np.stack([gx, gy, np.ones_like(gx)], axis=-1).reshape(-1, 3)
    return dirs_cam @ extr.rotation  # == (R^T @ d) per row


def render(
    obj: scene.ArticulatedObject,
    joint_values=None,
    cam: CameraExtrinsics | None = None,
    intrinsics: CameraIntrinsics | None = None,
) -> CameraView:
    """Ray-cast the posed object into depth / part-id / 3D-position buffers."""
    if joint_values is None:
        joint_values = obj.joint_values()
    joint_values = np.asarray(joint_values, dtype=float)
    if cam is None:
        cam = sample_camera(0)
    if intrinsics is None:
        intrinsics = make_intrinsics()

    tris, tri_parts = scene.forward_kinematics(obj, joint_values)
    v0 = np.ascontiguousarray(tris[:, 0])
    e1 = np.ascontiguousarray(tris[:, 1] - tris[:, 0])
    e2 = np.ascontiguousarray(tris[:, 2] - tris[:, 0])
    origin = cam.camera_center
    dirs = np.ascontiguousarray(_pixel_dirs_world(intrinsics, cam))

    t, tri_idx = _kernels.cast_rays(origin, dirs, v0, e1, e2)

    h, w = intrinsics.height, intrinsics.width
    hit = tri_idx >= 0
    t_hit = np.where(hit, t, 0.0)  # keep inf-miss values out of the arithmetic
    depth = t_hit.reshape(h, w)
    part = np.where(hit, tri_parts[np.clip(tri_idx, 0, None)], -1).astype(np.int32).reshape(h, w)
    pos = np.where(hit[:, None], origin[None, :] + t_hit[:, None] * dirs, 0.0).reshape(h, w, 3)
    normals = np.cross(e1, e2)
    norms = np.linalg.norm(normals, axis=1, keepdims=True)
    normals = normals / norms
    return CameraView(
        intrinsics=intrinsics,
        extrinsics=cam,
        depth=depth,
        part_id=part,
        position3d=pos,
        tri_index=tri_idx.reshape(h, w),
        tri_normals=normals,
        joint_values=joint_values,
    )


def pixel_to_3d(view: CameraView, x: int, y: int) -> np.ndarray:
    """World-frame 3D point rendered at pixel (x, y)."""
    if view.part_id[y, x] < 0:
        raise NoSurfaceError(f"pixel ({x}, {y}) hit nothing")
    return view.position3d[y, x]


# ---------------------------------------------------------------------------
# Image export
# ---------------------------------------------------------------------------

def save_pgm16(buffer: np.ndarray, path, max_value: float | None = None) -> None:
    """Write a float buffer as a 16-bit binary PGM, scaled to [0, 65535]."""
    buffer = np.asarray(buffer, dtype=float)
    if max_value is None:
        max_value = float(buffer.max()) or 1.0
    scaled = np.clip(buffer / max_value, 0.0, 1.0)
    data = (scaled * 65535.0 + 0.5).astype(">u2")
    h, w = buffer.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(data.tobytes())


def save_png16(buffer: np.ndarray, path, max_value: float | None = None) -> None:
    """16-bit grayscale PNG with the same scaling as save_pgm16."""
    from PIL import Image

    buffer = np.asarray(buffer, dtype=float)
    if max_value is None:
        max_value = float(buffer.max()) or 1.0
    scaled = np.clip(buffer / max_value, 0.0, 1.0)
    data = (scaled * 65535.0 + 0.5).astype(np.uint16)
    image = Image.new("I;16", (data.shape[1], data.shape[0]))
    image.frombytes(data.tobytes())
    image.save(path)


def _heat_colormap(values: np.ndarray) -> np.ndarray:
    """Simple dark-blue -> yellow gradient for score visualization."""
    v = np.clip(values, 0.0, 1.0)
    r = np.clip(1.5 * v - 0.25, 0.0, 1.0)
    g = np.clip(1.2 * v, 0.0, 1.0) * 0.9
    b = np.clip(0.9 - 1.1 * v, 0.05, 0.9)
    return (np.stack([r, g, b], axis=-1) * 255.0 + 0.5).astype(np.uint8)


def save_heatmap_png(scores: np.ndarray, valid: np.ndarray, path) -> None:
    """Score heatmap; pixels outside the valid mask are dimmed gray."""
    from PIL import Image

    rgb = _heat_colormap(scores)
    gray = np.full_like(rgb, 40)
    rgb = np.where(valid[..., None], rgb, gray)
    Image.fromarray(rgb, mode="RGB").save(path)


def shade_image(view: CameraView) -> np.ndarray:
    """Flat-shaded grayscale image for human inspection (uint8)."""
    h, w = view.height, view.width
    dirs = _pixel_dirs_world(view.intrinsics, view.extrinsics)
    norms = np.linalg.norm(dirs, axis=1, keepdims=True)
    dirs = dirs / norms
    tri = view.tri_index.reshape(-1)
    hit = tri >= 0
    cosine = np.zeros(h * w)
    cosine[hit] = np.abs((view.tri_normals[tri[hit]] * dirs[hit]).sum(axis=1))
    shade = np.zeros(h * w)
    shade[hit] = 0.25 + 0.75 * cosine[hit]
    # modulate slightly by part id so parts are distinguishable
    part = view.part_id.reshape(-1)
    shade[hit] *= 1.0 - 0.08 * (part[hit] % 4)
    return (np.clip(shade, 0.0, 1.0).reshape(h, w) * 255.0 + 0.5).astype(np.uint8)


def save_shaded_png(view: CameraView, path) -> None:
    from PIL import Image

    Image.fromarray(shade_image(view), mode="L").save(path)
