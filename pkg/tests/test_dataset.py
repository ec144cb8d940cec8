import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artmanip import dataset, scene
from artmanip.affordance import PixelSample
from artmanip.errors import PromptFormatError, UnknownCategoryError


def _pose(px=(100, 120), up=(0, 0, 1), fwd=(1, 0, 0)):
    return dataset.ManipPose(contact_px=px, contact_3d=np.zeros(3),
                             up_dir=np.asarray(up, float), forward_dir=np.asarray(fwd, float))


def _random_pose(rng):
    fwd = rng.normal(size=3)
    fwd /= np.linalg.norm(fwd)
    fwd = dataset.quantize_direction(fwd)
    up = dataset.quantize_direction(dataset.orthogonal_up(fwd))
    px = (int(rng.integers(0, 336)), int(rng.integers(0, 336)))
    return dataset.ManipPose(contact_px=px, contact_3d=np.zeros(3), up_dir=up, forward_dir=fwd)


# --- codec ---------------------------------------------------------------

def test_encode_boundary():
    code = dataset.encode_direction([0.0, 0.0, 1.0])
    assert code.bins == (0, 0, 50)
    assert np.allclose(dataset.decode_direction(code), [0.0, 0.0, 1.0])


def test_encode_half_away_from_zero():
    # 0.013/0.02 = 0.65 -> 1; -0.013/0.02 = -0.65 -> -1; 0.9998/0.02 = 49.99 -> 50
    code = dataset.encode_direction([0.013, -0.013, 0.9998])
    assert code.bins == (1, -1, 50)


def test_encode_clamps():
    assert dataset.encode_direction([1.2, -1.2, 0.0]).bins == (50, -50, 0)


@given(st.lists(st.floats(min_value=-1, max_value=1), min_size=3, max_size=3))
@settings(max_examples=300, deadline=None)
def test_codec_roundtrip_error_bound(v):
    decoded = dataset.decode_direction(dataset.encode_direction(v))
    assert np.all(np.abs(decoded - np.asarray(v)) <= 0.01 + 1e-12)


def test_codec_idempotent_after_decode():
    rng = np.random.default_rng(0)
    for _ in range(100):
        v = rng.uniform(-1, 1, size=3)
        code = dataset.encode_direction(v)
        again = dataset.encode_direction(dataset.decode_direction(code))
        assert code == again


# --- OCI -----------------------------------------------------------------

def test_make_oci():
    rec = dataset.make_oci("door")
    assert rec.prompt == "What is the category of the object in the image?"
    assert rec.answer == "door"
    assert rec.meta["loss_bearing"] is False
    assert dataset.parse_oci_answer(rec.answer, scene.DEFAULT_CATEGORIES) == "door"


def test_parse_oci_unknown_label():
    with pytest.raises(UnknownCategoryError):
        dataset.parse_oci_answer("submarine", scene.DEFAULT_CATEGORIES)


# --- APR -----------------------------------------------------------------

def test_make_apr_answer_layout():
    sample = PixelSample(positives=((10, 20), (30, 40)),
                         negatives=((5, 5), (6, 6)), count=2)
    rec = dataset.make_apr(sample)
    assert rec.answer == "yes, yes, no, no"
    assert rec.prompt == (
        "Determine if operating on each following point can effectively "
        "manipulate the object within the image: (10, 20), (30, 40), (5, 5), (6, 6)"
    )
    assert dataset.parse_apr_prompt(rec.prompt) == [(10, 20), (30, 40), (5, 5), (6, 6)]
    labels = dataset.parse_apr_answer(rec.answer)
    assert labels == [True, True, False, False]


def test_make_apr_rejects_empty():
    empty = PixelSample(positives=(), negatives=(), count=0)
    with pytest.raises(ValueError):
        dataset.make_apr(empty)


def test_parse_apr_malformed():
    with pytest.raises(PromptFormatError):
        dataset.parse_apr_answer("yes, maybe, no")


# --- FT ------------------------------------------------------------------

def test_make_ft_exact_string():
    rec = dataset.make_ft(_pose())
    assert rec.prompt == (
        "Specify the contact point and gripper direction of manipulating the object."
    )
    assert rec.answer == (
        "The contact point is (100, 120), "
        "the gripper up direction is (0.00, 0.00, 1.00), "
        "and the gripper forward direction is (1.00, 0.00, 0.00)"
    )


def test_ft_parse_inverse():
    rng = np.random.default_rng(3)
    for _ in range(50):
        pose = _random_pose(rng)
        parsed = dataset.parse_ft_answer(dataset.make_ft(pose).answer)
        assert parsed.contact_px == pose.contact_px
        assert np.allclose(parsed.up_dir, pose.up_dir, atol=1e-12)
        assert np.allclose(parsed.forward_dir, pose.forward_dir, atol=1e-12)


def test_ft_parse_truncation_fuzz():
    answer = dataset.make_ft(_pose()).answer
    for cut in range(10, len(answer), 7):
        with pytest.raises(PromptFormatError):
            dataset.parse_ft_answer(answer[:cut])


def test_ft_parse_rejects_parallel_directions():
    bad = (
        "The contact point is (1, 2), "
        "the gripper up direction is (1.00, 0.00, 0.00), "
        "and the gripper forward direction is (1.00, 0.00, 0.00)"
    )
    with pytest.raises(PromptFormatError):
        dataset.parse_ft_answer(bad)


# --- MLM -----------------------------------------------------------------

def test_mlm_mask_and_restore():
    pose = _pose()
    full = dataset.ft_answer(pose)
    for seed in range(30):
        rec = dataset.make_mlm(pose, mask_seed=seed)
        assert rec.answer == full
        assert dataset.MASK_TOKEN in rec.prompt
        group = rec.meta["masked_group"]
        masked_text = {
            "contact": "(100, 120)",
            "up": "(0.00, 0.00, 1.00)",
            "forward": "(1.00, 0.00, 0.00)",
        }[group]
        assert rec.prompt.replace(dataset.MASK_TOKEN, masked_text, 1) == full


def test_mlm_group_frequency():
    pose = _pose()
    counts = {"contact": 0, "up": 0, "forward": 0}
    n = 10_000
    for seed in range(n):
        counts[dataset.make_mlm(pose, mask_seed=seed).meta["masked_group"]] += 1
    for value in counts.values():
        assert abs(value / n - 1 / 3) < 0.02


# --- misc ----------------------------------------------------------------

def test_orthogonal_up_rules():
    fwd = np.array([0.3, -0.4, 0.0])
    fwd /= np.linalg.norm(fwd)
    up = dataset.orthogonal_up(fwd)
    assert abs(up @ fwd) < 1e-9
    assert abs(np.linalg.norm(up) - 1.0) < 1e-9
    # parallel-to-world-up fallback
    assert np.allclose(dataset.orthogonal_up([0, 0, 1.0]), [1, 0, 0])


def test_record_json_roundtrip():
    rec = dataset.make_ft(_pose(), episode_id="door-00001", image="images/x.png",
                          meta={"category": "door"})
    back = dataset.PromptRecord.from_json(rec.to_json())
    assert back == rec


def test_pose_validation():
    with pytest.raises(ValueError):
        dataset.ManipPose(contact_px=(0, 0), contact_3d=np.zeros(3),
                          up_dir=np.array([0, 0, 2.0]), forward_dir=np.array([1.0, 0, 0]))
    with pytest.raises(ValueError):
        dataset.ManipPose(contact_px=(0, 0), contact_3d=np.zeros(3),
                          up_dir=np.array([1.0, 0, 0]), forward_dir=np.array([1.0, 0, 0]))
