"""Prompt/answer record emission and parsing for the four training tasks.

Tasks: category identification (OCI), affordance yes/no over sampled pixels
(APR), masked pose infilling (MLM), and full pose prediction (FT). Direction
vectors are discretized to 100 bins of width 0.02 over [-1, 1] and written
as 2-decimal fixed point, so every answer string survives a parse round trip.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import NoSurfaceError, PromptFormatError, UnknownCategoryError
from .render import CameraView, pixel_to_3d

log = logging.getLogger(__name__)

TASK_OCI = "OCI"
TASK_APR = "APR"
TASK_MLM = "MLM"
TASK_FT = "FT"

OCI_PROMPT = "What is the category of the object in the image?"
APR_PROMPT_PREFIX = (
    "Determine if operating on each following point can effectively manipulate "
    "the object within the image: "
)
APR_SINGLE_PROMPT_PREFIX = (
    "Determine if operating on the following point can effectively manipulate "
    "the object within the image: "
)
FT_PROMPT = "Specify the contact point and gripper direction of manipulating the object."
MASK_TOKEN = "[MASK]"

BIN_WIDTH = 0.02
BIN_MIN = -50
BIN_MAX = 50

_WORLD_UP = np.array([0.0, 0.0, 1.0])
_WORLD_X = np.array([1.0, 0.0, 0.0])


# ---------------------------------------------------------------------------
# Poses and the direction codec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ManipPose:
    """Contact pixel + 3D point and the gripper's up/forward unit vectors."""

    contact_px: tuple[int, int]
    contact_3d: np.ndarray
    up_dir: np.ndarray
    forward_dir: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "contact_px", (int(self.contact_px[0]), int(self.contact_px[1])))
        object.__setattr__(self, "contact_3d", np.asarray(self.contact_3d, dtype=float))
        up = np.asarray(self.up_dir, dtype=float)
        fwd = np.asarray(self.forward_dir, dtype=float)
        for name, v in (("up_dir", up), ("forward_dir", fwd)):
            if abs(np.linalg.norm(v) - 1.0) > 1e-6:
                raise ValueError(f"{name} must be unit length")
        if abs(float(up @ fwd)) >= 0.999:
            raise ValueError("up_dir and forward_dir are (nearly) parallel")
        object.__setattr__(self, "up_dir", up)
        object.__setattr__(self, "forward_dir", fwd)


@dataclass(frozen=True)
class DirectionCode:
    bins: tuple[int, int, int]


def _round_half_away(x: float) -> int:
    if x >= 0.0:
        return int(math.floor(x + 0.5))
    return int(math.ceil(x - 0.5))


def encode_direction(v) -> DirectionCode:
    """Quantize each component of v (in [-1, 1]) to a signed bin index."""
    v = np.asarray(v, dtype=float)
    bins = tuple(
        max(BIN_MIN, min(BIN_MAX, _round_half_away(float(c) / BIN_WIDTH))) for c in v
    )
    return DirectionCode(bins=bins)


def decode_direction(code: DirectionCode) -> np.ndarray:
    """Bin centers; renormalize separately before using as a pose direction."""
    return np.array([b * BIN_WIDTH for b in code.bins])


def quantize_direction(v) -> np.ndarray:
    """Codec round trip re-normalized to unit length.

    Iterates to a fixed point of encode -> decode -> normalize: the returned
    unit vector re-encodes to the same bins, so writing it as answer text and
    parsing it back reproduces the identical floats.
    """
    vec = np.asarray(v, dtype=float)
    code = encode_direction(vec)
    for _ in range(8):
        decoded = decode_direction(code)
        norm = float(np.linalg.norm(decoded))
        if norm == 0.0:
            raise ValueError("direction quantized to zero; input too small")
        unit_vec = decoded / norm
        again = encode_direction(unit_vec)
        if again == code:
            return unit_vec
        code = again
    return unit_vec


def orthogonal_up(forward) -> np.ndarray:
    """Deterministic up vector: forward x world-up, else world-x when parallel."""
    forward = np.asarray(forward, dtype=float)
    up = np.cross(forward, _WORLD_UP)
    norm = float(np.linalg.norm(up))
    if norm < 1e-9:
        return _WORLD_X.copy()
    return up / norm


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PromptRecord:
    task: str
    prompt: str
    answer: str
    episode_id: str = ""
    image: str = ""
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "task": self.task,
                "prompt": self.prompt,
                "answer": self.answer,
                "episode_id": self.episode_id,
                "image": self.image,
                "meta": self.meta,
            },
            ensure_ascii=False,
        )

    @staticmethod
    def from_json(line: str) -> "PromptRecord":
        data = json.loads(line)
        return PromptRecord(
            task=data["task"],
            prompt=data["prompt"],
            answer=data["answer"],
            episode_id=data.get("episode_id", ""),
            image=data.get("image", ""),
            meta=data.get("meta", {}),
        )


def _fmt_px(px) -> str:
    return f"({int(px[0])}, {int(px[1])})"


def _fmt_dir(v) -> str:
    decoded = decode_direction(encode_direction(v))
    return "({:.2f}, {:.2f}, {:.2f})".format(*decoded)


def ft_answer(pose: ManipPose) -> str:
    return (
        f"The contact point is {_fmt_px(pose.contact_px)}, "
        f"the gripper up direction is {_fmt_dir(pose.up_dir)}, "
        f"and the gripper forward direction is {_fmt_dir(pose.forward_dir)}"
    )


def make_oci(category: str, episode_id: str = "", image: str = "", meta: dict | None = None) -> PromptRecord:
    meta = dict(meta or {})
    meta["loss_bearing"] = False  # category answers are context, not a training signal
    return PromptRecord(task=TASK_OCI, prompt=OCI_PROMPT, answer=category,
                        episode_id=episode_id, image=image, meta=meta)


def make_apr(sample, episode_id: str = "", image: str = "", meta: dict | None = None) -> PromptRecord:
    if sample.count < 1 or not sample.positives or not sample.negatives:
        raise ValueError("APR needs at least one positive and one negative pixel")
    points = list(sample.positives) + list(sample.negatives)
    prompt = APR_PROMPT_PREFIX + ", ".join(_fmt_px(p) for p in points)
    answer = ", ".join(["yes"] * len(sample.positives) + ["no"] * len(sample.negatives))
    return PromptRecord(task=TASK_APR, prompt=prompt, answer=answer,
                        episode_id=episode_id, image=image, meta=dict(meta or {}))


def make_ft(pose: ManipPose, episode_id: str = "", image: str = "", meta: dict | None = None) -> PromptRecord:
    return PromptRecord(task=TASK_FT, prompt=FT_PROMPT, answer=ft_answer(pose),
                        episode_id=episode_id, image=image, meta=dict(meta or {}))


_MASK_GROUPS = ("contact", "up", "forward")


def make_mlm(pose: ManipPose, mask_seed: int, episode_id: str = "", image: str = "",
             meta: dict | None = None) -> PromptRecord:
    """Mask one field group (contact pair, up triple, or forward triple)."""
    full = ft_answer(pose)
    group = _MASK_GROUPS[int(np.random.default_rng(mask_seed).integers(len(_MASK_GROUPS)))]
    replacements = {
        "contact": _fmt_px(pose.contact_px),
        "up": _fmt_dir(pose.up_dir),
        "forward": _fmt_dir(pose.forward_dir),
    }
    # Replace only the intended occurrence: contact first, directions by their
    # labeled segment (up and forward triples can coincide textually).
    if group == "contact":
        prompt = full.replace(replacements["contact"], MASK_TOKEN, 1)
    elif group == "up":
        prompt = full.replace(
            f"up direction is {replacements['up']}", f"up direction is {MASK_TOKEN}", 1
        )
    else:
        prompt = full.replace(
            f"forward direction is {replacements['forward']}",
            f"forward direction is {MASK_TOKEN}", 1,
        )
    meta = dict(meta or {})
    meta["masked_group"] = group
    return PromptRecord(task=TASK_MLM, prompt=prompt, answer=full,
                        episode_id=episode_id, image=image, meta=meta)


# ---------------------------------------------------------------------------
# Parsers
# ---------------------------------------------------------------------------

_PX = r"\((-?\d+), (-?\d+)\)"
_F = r"(-?\d+\.\d{2})"
_TRIPLE = rf"\({_F}, {_F}, {_F}\)"
_FT_RE = re.compile(
    rf"^The contact point is {_PX}, the gripper up direction is {_TRIPLE}, "
    rf"and the gripper forward direction is {_TRIPLE}$"
)
_APR_POINT_RE = re.compile(_PX)
_APR_ANSWER_RE = re.compile(r"^(yes|no)(, (yes|no))*$")


@dataclass(frozen=True)
class ParsedPose:
    """Pose fields recovered from an FT answer (directions re-normalized)."""

    contact_px: tuple[int, int]
    up_dir: np.ndarray
    forward_dir: np.ndarray


def parse_oci_answer(answer: str, registry: Iterable[str] | None = None) -> str:
    label = answer.strip()
    if not label:
        raise PromptFormatError("empty category answer")
    if registry is not None and label not in set(registry):
        raise UnknownCategoryError(f"category {label!r} not in registry")
    return label


def parse_apr_prompt(prompt: str) -> list[tuple[int, int]]:
    if not prompt.startswith(APR_PROMPT_PREFIX):
        raise PromptFormatError("not an affordance prompt")
    return [(int(x), int(y)) for x, y in _APR_POINT_RE.findall(prompt)]


def parse_apr_answer(answer: str) -> list[bool]:
    if not _APR_ANSWER_RE.match(answer):
        raise PromptFormatError(f"malformed yes/no answer: {answer!r}")
    return [token == "yes" for token in answer.split(", ")]


def parse_ft_answer(answer: str) -> ParsedPose:
    m = _FT_RE.match(answer)
    if not m:
        raise PromptFormatError(f"malformed pose answer: {answer!r}")
    g = m.groups()
    px = (int(g[0]), int(g[1]))
    # Snap parsed components back onto the bin grid so a parsed pose carries
    # exactly the floats the writer produced.
    up = decode_direction(encode_direction([float(v) for v in g[2:5]]))
    fwd = decode_direction(encode_direction([float(v) for v in g[5:8]]))
    for name, v in (("up", up), ("forward", fwd)):
        if float(np.linalg.norm(v)) == 0.0:
            raise PromptFormatError(f"{name} direction is zero")
    up = up / np.linalg.norm(up)
    fwd = fwd / np.linalg.norm(fwd)
    if abs(float(up @ fwd)) >= 0.999:
        raise PromptFormatError("up and forward directions are parallel")
    return ParsedPose(contact_px=px, up_dir=up, forward_dir=fwd)


def parse_mlm_answer(answer: str) -> ParsedPose:
    return parse_ft_answer(answer)


def pose_from_answer(answer: str, view: CameraView) -> ManipPose:
    """Full pose from an FT answer plus the episode's rendered view."""
    parsed = parse_ft_answer(answer)
    x, y = parsed.contact_px
    if not (0 <= x < view.width and 0 <= y < view.height):
        raise NoSurfaceError(f"contact pixel {parsed.contact_px} outside the image")
    point = pixel_to_3d(view, x, y)
    return ManipPose(contact_px=parsed.contact_px, contact_3d=point,
                     up_dir=parsed.up_dir, forward_dir=parsed.forward_dir)


# ---------------------------------------------------------------------------
# Dataset collection
# ---------------------------------------------------------------------------

def episode_records(category: str, sample, pose: ManipPose, mask_seed: int,
                    episode_id: str, image: str, meta: dict) -> list[PromptRecord]:
    """The four records one successful episode contributes, in fixed order."""
    return [
        make_oci(category, episode_id, image, meta),
        make_apr(sample, episode_id, image, meta),
        make_mlm(pose, mask_seed, episode_id, image, meta),
        make_ft(pose, episode_id, image, meta),
    ]


def collect_dataset(
    categories,
    episodes_per_category: int,
    seed: int,
    out_path,
    image_dir=None,
    resolution: int | None = None,
    cfg=None,
    apr_count: int = 20,
    max_attempt_factor: int = 20,
) -> dict:
    """Run oracle episodes and stream records for the successful ones.

    `episodes_per_category` is the number of *successful* episodes targeted
    per category (failures emit nothing). Returns collection statistics.
    """
    from . import episodes  # deferred: episodes imports policy/control

    return episodes.collect(
        categories=categories,
        per_category=episodes_per_category,
        seed=seed,
        out_path=out_path,
        image_dir=image_dir,
        resolution=resolution,
        cfg=cfg,
        apr_count=apr_count,
        max_attempt_factor=max_attempt_factor,
    )
