"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s`. The heavier criteria run
whole evaluation campaigns; the full module takes a few minutes with the
compiled ray-casting kernel.
"""

import contextlib
import math
import time

import numpy as np
import pytest

from artmanip import (_kernels, affordance, cli, control, dataset, episodes,
                      harness, policy, render, scene)

REVOLUTE_CATEGORIES = ("door", "safe", "lid-box", "laptop-hinge", "trashcan", "pliers")
PRISMATIC_CATEGORIES = ("drawer", "kettle-lid")


@contextlib.contextmanager
def _criterion(number, name, budget_s=None):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {number} ({name}): FAIL")
        raise
    elapsed = time.perf_counter() - start
    print(f"\nACCEPTANCE {number} ({name}): PASS ({elapsed:.1f}s)")
    # runtime budgets hold for the shipped compiled kernel, not the fallback
    if budget_s is not None and _kernels.BACKEND == "cython":
        assert elapsed < budget_s, f"criterion {number} exceeded {budget_s}s"


def _axis_distance(points, joint):
    rel = points - joint.axis_origin
    radial = rel - np.outer(rel @ joint.axis_direction, joint.axis_direction)
    return np.linalg.norm(radial, axis=1)


def test_c1_affordance_matches_chord_oracle():
    with _criterion(1, "affordance oracle equivalence", budget_s=60):
        checked = 0
        for category in REVOLUTE_CATEGORIES:
            for seed in (0, 1, 2, 3):
                setup = episodes.prepare_episode(
                    category, np.random.default_rng(seed), resolution=168
                )
                joint = setup.obj.joints[setup.target_joint]
                pts = setup.view.position3d[setup.amap.valid]
                chord = 2.0 * _axis_distance(pts, joint) * math.sin(setup.amap.probe_delta / 2.0)
                lo, hi = chord.min(), chord.max()
                expected = np.ones_like(chord) if hi - lo <= 0 else (chord - lo) / (hi - lo)
                diff = np.abs(setup.amap.scores[setup.amap.valid] - expected)
                assert diff.max() < 1e-6
                checked += 1
        assert checked >= 20
        for category in PRISMATIC_CATEGORIES:
            for seed in (0, 1):
                setup = episodes.prepare_episode(
                    category, np.random.default_rng(seed), resolution=168
                )
                assert np.all(setup.amap.scores[setup.amap.valid] == 1.0)


def test_c2_codec_exhaustive_sweep():
    with _criterion(2, "direction codec sweep", budget_s=1):
        values = np.round(np.arange(-1000, 1001) * 0.001, 3)
        for v in values:
            decoded = dataset.decode_direction(dataset.encode_direction([v, v, v]))
            assert np.all(np.abs(decoded - v) <= 0.01 + 1e-12)


def test_c3_prompt_grammar_roundtrip():
    with _criterion(3, "prompt grammar round trip"):
        rng = np.random.default_rng(0)
        categories = scene.DEFAULT_CATEGORIES
        failures = 0
        count = 0
        for i in range(2500):
            rec = dataset.make_oci(categories[i % len(categories)])
            assert dataset.parse_oci_answer(rec.answer, categories)
            count += 1
        for _ in range(2500):
            pts = rng.integers(0, 336, size=(40, 2))
            sample = affordance.PixelSample(
                positives=tuple(map(tuple, pts[:20])),
                negatives=tuple(map(tuple, pts[20:])), count=20,
            )
            rec = dataset.make_apr(sample)
            labels = dataset.parse_apr_answer(rec.answer)
            assert labels.count(True) == 20 and labels.count(False) == 20
            assert len(dataset.parse_apr_prompt(rec.prompt)) == 40
            count += 1
        for _ in range(2500):
            fwd = rng.normal(size=3)
            fwd = dataset.quantize_direction(fwd / np.linalg.norm(fwd))
            up = dataset.quantize_direction(dataset.orthogonal_up(fwd))
            pose = dataset.ManipPose(
                contact_px=(int(rng.integers(336)), int(rng.integers(336))),
                contact_3d=np.zeros(3), up_dir=up, forward_dir=fwd,
            )
            parsed = dataset.parse_ft_answer(dataset.make_ft(pose).answer)
            assert parsed.contact_px == pose.contact_px
            assert np.array_equal(parsed.forward_dir, pose.forward_dir)
            rec = dataset.make_mlm(pose, mask_seed=int(rng.integers(2**31)))
            assert dataset.parse_mlm_answer(rec.answer)
            assert dataset.MASK_TOKEN in rec.prompt
            count += 2
        assert failures == 0
        assert count >= 10_000


def _door_off_tangent_pose(door, degrees):
    joint = door.joints[0]
    panel = door.parts[door.part_of_joint(0)]
    verts = panel.triangles.reshape(-1, 3)
    side = math.copysign(1.0, joint.axis_origin[1])
    point = np.array([verts[:, 0].max(),
                      joint.axis_origin[1] - side * 0.54, 0.0])
    state = control.ContactState(obj=door, target_joint=0, q=0.0, contact_local=point)
    jac = control.contact_jacobian(state)
    tangent = jac / np.linalg.norm(jac)
    # rotate against the swing sense so the fixed direction lags the tangent
    off = scene.rotation_about_axis(-joint.axis_direction, math.radians(degrees)) @ tangent
    return dataset.ManipPose(contact_px=(0, 0), contact_3d=point,
                             up_dir=dataset.orthogonal_up(-off), forward_dir=-off)


def test_c4_aia_dominance_and_improvement():
    with _criterion(4, "AIA dominance and off-tangent gain", budget_s=120):
        rng = np.random.default_rng(1)
        cfg = control.AiaConfig()
        steps = 0
        while steps < 500:
            category = ("door", "drawer")[steps % 2]
            obj = scene.build_object(category, int(rng.integers(1000)))
            part = obj.parts[obj.part_of_joint(0)]
            tri = part.triangles[int(rng.integers(len(part.triangles)))]
            w = rng.dirichlet([1.0, 1.0, 1.0])
            contact = w @ tri
            lo, hi = obj.joints[0].limits
            state = control.ContactState(
                obj=obj, target_joint=0,
                q=float(rng.uniform(lo, lo + 0.5 * (hi - lo))),
                contact_local=contact,
            )
            jac = control.contact_jacobian(state)
            norm = np.linalg.norm(jac)
            if norm < 1e-6:
                continue
            d_i = jac / norm + rng.normal(scale=0.25, size=3)
            d_i /= np.linalg.norm(d_i)
            seed = int(rng.integers(2**31))
            try:
                d_opt, _ = control.aia_step(state, d_i, cfg, seed)
            except control.StallError:
                continue
            delta_opt = control.apply_probe(state, d_opt, cfg.probe_force,
                                            cfg.joint_compliance)
            delta_base = control.apply_probe(state, d_i, cfg.probe_force,
                                             cfg.joint_compliance)
            assert delta_opt >= delta_base - 1e-15
            steps += 1

        door = scene.build_object("door", 3)
        pose = _door_off_tangent_pose(door, 20.0)
        means = {}
        for n in (16, 0):
            run_cfg = control.AiaConfig(num_perturbations=n, max_steps=100,
                                        target_displacement=1.5)
            disp = [control.run_manipulation(door, pose, run_cfg, seed).displacement
                    for seed in range(100)]
            means[n] = float(np.mean(disp))
        assert means[16] >= 1.2 * means[0], means


def test_c5_oracle_success_calibration():
    with _criterion(5, "oracle success calibration", budget_s=600):
        report = harness.evaluate(
            policy_name="oracle", categories=["drawer", "door"],
            episodes_per_category=200, seed=0,
        )
        drawer_rate = report.per_category["drawer"].initial_rate
        door_rate = report.per_category["door"].initial_rate
        print(f"\n  drawer initial rate {drawer_rate:.3f}, door {door_rate:.3f}")
        assert drawer_rate >= 0.90
        assert door_rate >= 0.80


def test_c6_tta_improvement():
    with _criterion(6, "test-time adaptation improvement", budget_s=600):
        scenario = harness.TtaScenario()
        shifted = harness.run_tta_experiment(
            scenario=scenario, episodes_count=300, seed=0, resolution=224,
        )
        gain = shifted.last_window_rate - shifted.first_window_rate
        print(f"\n  first-50 {shifted.first_window_rate:.3f}, "
              f"last-50 {shifted.last_window_rate:.3f}, gain {gain:+.3f}")
        assert gain >= 0.10

        import dataclasses

        calm = dataclasses.replace(scenario, forbidden_region=False)
        adapted = harness.run_tta_experiment(scenario=calm, episodes_count=200,
                                             seed=0, resolution=224, adapt=True)
        frozen = harness.run_tta_experiment(scenario=calm, episodes_count=200,
                                            seed=0, resolution=224, adapt=False)
        drift = abs(adapted.overall_rate - frozen.overall_rate)
        print(f"  shift disabled: adapt {adapted.overall_rate:.3f} vs "
              f"frozen {frozen.overall_rate:.3f} (|diff| {drift:.3f})")
        assert drift < 0.05


def test_c7_run_eval_determinism(tmp_path):
    with _criterion(7, "report determinism"):
        args = ["run-eval", "--policy", "oracle", "--categories", "drawer", "door",
                "--episodes", "5", "--seed", "9", "--resolution", "128"]
        dir_a = tmp_path / "a"
        dir_b = tmp_path / "b"
        assert cli.main(args + ["--out-dir", str(dir_a)]) == 0
        assert cli.main(args + ["--out-dir", str(dir_b)]) == 0
        assert (dir_a / "report.json").read_bytes() == (dir_b / "report.json").read_bytes()


def test_c8_dataset_replay(tmp_path):
    with _criterion(8, "dataset replay"):
        out = tmp_path / "dataset.jsonl"
        stats = dataset.collect_dataset(
            categories=["drawer", "door", "lid-box", "kettle-lid"],
            episodes_per_category=125,
            seed=0,
            out_path=out,
            image_dir=None,
            resolution=224,
        )
        records = [dataset.PromptRecord.from_json(line)
                   for line in out.read_text().splitlines()]
        ft_records = [r for r in records if r.task == dataset.TASK_FT]
        assert stats["successes"] == 500
        assert len(ft_records) == 500
        replayed = 0
        for rec in ft_records:
            result = episodes.replay_record(rec)
            assert result.displacement > 0.01, rec.episode_id
            replayed += 1
        print(f"\n  replayed {replayed} FT records, all successful")
