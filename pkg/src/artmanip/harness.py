"""Success metrics, per-category evaluation, and the adaptation experiment.

Success is binary on the achieved joint displacement: initial movement above
0.01 joint units, long-distance movement above 0.1. Per-category rates are
exact success/episode ratios; the overall average is the unweighted mean of
category rates.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import control, episodes, policy
from .errors import ArtmanipError, NoAffordanceError, VisibilityError

log = logging.getLogger(__name__)

INITIAL_THRESHOLD = 0.01
LONG_THRESHOLD = 0.1


@dataclass(frozen=True)
class EpisodeResult:
    episode_id: str
    category: str
    policy: str
    displacement: float
    steps: int
    success_initial: bool
    success_long: bool
    trace_path: str = ""

    @staticmethod
    def from_manipulation(episode_id, category, policy_name,
                          result: control.ManipulationResult,
                          trace_path: str = "") -> "EpisodeResult":
        return EpisodeResult(
            episode_id=episode_id,
            category=category,
            policy=policy_name,
            displacement=result.displacement,
            steps=result.steps,
            success_initial=result.displacement > INITIAL_THRESHOLD,
            success_long=result.displacement > LONG_THRESHOLD,
            trace_path=trace_path,
        )


@dataclass
class CategoryStats:
    episodes: int = 0
    initial_successes: int = 0
    long_successes: int = 0

    @property
    def initial_rate(self) -> float:
        return self.initial_successes / self.episodes if self.episodes else 0.0

    @property
    def long_rate(self) -> float:
        return self.long_successes / self.episodes if self.episodes else 0.0


@dataclass
class EvalReport:
    policy: str
    seed: int
    per_category: dict  # category -> CategoryStats, insertion order preserved
    config: dict = field(default_factory=dict)

    @property
    def overall_initial(self) -> float:
        rates = [s.initial_rate for s in self.per_category.values()]
        return float(np.mean(rates)) if rates else 0.0

    @property
    def overall_long(self) -> float:
        rates = [s.long_rate for s in self.per_category.values()]
        return float(np.mean(rates)) if rates else 0.0

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "seed": self.seed,
            "config": self.config,
            "categories": {
                name: {
                    "episodes": s.episodes,
                    "initial_successes": s.initial_successes,
                    "long_successes": s.long_successes,
                    "initial_rate": s.initial_rate,
                    "long_rate": s.long_rate,
                }
                for name, s in self.per_category.items()
            },
            "overall": {
                "initial_rate": self.overall_initial,
                "long_rate": self.overall_long,
            },
        }

    @staticmethod
    def from_dict(data: dict) -> "EvalReport":
        report = EvalReport(policy=data["policy"], seed=data["seed"],
                            per_category={}, config=data.get("config", {}))
        for name, s in data["categories"].items():
            report.per_category[name] = CategoryStats(
                episodes=s["episodes"],
                initial_successes=s["initial_successes"],
                long_successes=s["long_successes"],
            )
        return report


def _run_policy_episode(setup: episodes.EpisodeSetup, policy_name: str,
                        cfg: control.AiaConfig, policy_seed: int, control_seed: int,
                        scorer: policy.TtaScorer | None = None,
                        candidate_count: int = 8):
    """Returns (proposal or None, ManipulationResult)."""
    try:
        if policy_name in policy.POLICIES:
            proposal = policy.POLICIES[policy_name](
                setup.obj, setup.view, setup.amap, policy_seed
            )
        elif policy_name in policy.TTA_POLICY_NAMES:
            base = policy.POLICIES[policy.TTA_POLICY_NAMES[policy_name]]
            if scorer is None:
                scorer = policy.TtaScorer()
            proposal = policy.propose_with_tta(
                base, scorer, setup.obj, setup.view, setup.amap, policy_seed,
                candidate_count=candidate_count,
            )
        else:
            raise ArtmanipError(f"unknown policy {policy_name!r}")
    except (VisibilityError, NoAffordanceError) as exc:
        log.info("proposal failed: %s", exc)
        return None, control.ManipulationResult(
            displacement=0.0, steps=0, trace=(), reason="no-proposal",
            start_q=0.0, end_q=0.0, target_joint=setup.target_joint,
        )
    result = control.run_manipulation(setup.obj, proposal.pose, cfg, control_seed)
    return proposal, result


def evaluate(
    policy_name: str,
    categories,
    episodes_per_category: int,
    cfg: control.AiaConfig | None = None,
    seed: int = 0,
    resolution: int | None = None,
    trace_dir=None,
    scorer: policy.TtaScorer | None = None,
) -> EvalReport:
    """Run episodes per category with the named policy and aggregate rates.

    `scorer` feeds the +tta policies (e.g. one persisted by a TTA run); it is
    only read here, never updated.
    """
    if cfg is None:
        cfg = control.AiaConfig()
    rng = np.random.default_rng(seed)
    report = EvalReport(
        policy=policy_name,
        seed=seed,
        per_category={},
        config={
            "aia": cfg.to_dict(),
            "episodes_per_category": episodes_per_category,
            "resolution": resolution,
            "categories": list(categories),
        },
    )
    if trace_dir is not None:
        os.makedirs(trace_dir, exist_ok=True)
    for category in categories:
        stats = CategoryStats()
        report.per_category[category] = stats
        for index in range(episodes_per_category):
            policy_seed = int(rng.integers(0, 2**31 - 1))
            control_seed = int(rng.integers(0, 2**31 - 1))
            episode_id = f"{category}-{index:05d}"
            try:
                setup = episodes.prepare_episode(category, rng, resolution=resolution)
            except VisibilityError as exc:
                log.info("episode %s: %s", episode_id, exc)
                stats.episodes += 1
                continue
            proposal, result = _run_policy_episode(
                setup, policy_name, cfg, policy_seed, control_seed, scorer=scorer
            )
            trace_path = ""
            if trace_dir is not None:
                trace_path = os.path.join(trace_dir, f"{episode_id}.json")
                payload = {
                    "episode_id": episode_id,
                    "policy": policy_name,
                    "meta": episodes.episode_meta(setup, control_seed),
                    "pose": None if proposal is None else {
                        "contact_px": list(proposal.pose.contact_px),
                        "answer": next(
                            (a for p, a in proposal.cot_trace if p.startswith("Specify")),
                            "",
                        ),
                    },
                    "result": result.to_dict(),
                }
                with open(trace_path, "w", encoding="utf-8") as fh:
                    json.dump(payload, fh, indent=2, sort_keys=True)
            episode = EpisodeResult.from_manipulation(
                episode_id, category, policy_name, result, trace_path
            )
            stats.episodes += 1
            stats.initial_successes += int(episode.success_initial)
            stats.long_successes += int(episode.success_long)
    return report


# ---------------------------------------------------------------------------
# Test-time adaptation experiment
# ---------------------------------------------------------------------------

@dataclass
class TtaScenario:
    """Domain shift for the adaptation run: contacts near the part's
    handle-analog marker force failure regardless of physics.

    The scorer starts from a confident prior that trusts high-affordance
    pixels (the pre-adaptation policy's belief); outcomes must erode that
    prior before the re-ranking changes, so improvement is gradual rather
    than a one-shot flip.
    """

    category: str = "pliers"
    forbidden_region: bool = True
    forbidden_radius_px: float = 15.0
    window: int = 50
    candidate_count: int = 8
    learning_rate: float = 0.5
    base_policy: str = "oracle"
    prior_strength: float = 2.0  # initial weight on the affordance-score feature


@dataclass
class TtaReport:
    scenario: dict
    episodes: int
    outcomes: list
    overall_rate: float
    first_window_rate: float
    last_window_rate: float
    update_count: int

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "episodes": self.episodes,
            "outcomes": [int(o) for o in self.outcomes],
            "overall_rate": self.overall_rate,
            "first_window_rate": self.first_window_rate,
            "last_window_rate": self.last_window_rate,
            "update_count": self.update_count,
        }


def marker_pixel(setup: episodes.EpisodeSetup) -> tuple[float, float] | None:
    """Projection of the target part's handle anchor, if it has one."""
    obj = setup.obj
    part_index = None
    for i, part in enumerate(obj.parts):
        if part.attached_joint == setup.target_joint:
            part_index = i
            break
    part = obj.parts[part_index]
    if part.handle_point is None:
        return None
    from . import scene

    rot, trans = scene.part_transform(obj, obj.joint_values(), part_index)
    world = rot @ part.handle_point + trans
    try:
        return setup.view.project(world)
    except ArtmanipError:
        return None


def in_forbidden_region(setup, pixel, scenario: TtaScenario) -> bool:
    if not scenario.forbidden_region:
        return False
    marker = marker_pixel(setup)
    if marker is None:
        return False
    dx = pixel[0] + 0.5 - marker[0]
    dy = pixel[1] + 0.5 - marker[1]
    return math.hypot(dx, dy) <= scenario.forbidden_radius_px


def run_tta_experiment(
    base_policy: str | None = None,
    scenario: TtaScenario | None = None,
    episodes_count: int = 300,
    seed: int = 0,
    cfg: control.AiaConfig | None = None,
    resolution: int | None = None,
    adapt: bool = True,
    scorer_path=None,
) -> TtaReport:
    """Sequential episodes with an online scorer updated from each outcome.

    With `adapt` false the scorer never updates, which gives the no-adaptation
    baseline under the same episode stream.
    """
    if scenario is None:
        scenario = TtaScenario()
    if base_policy is None:
        base_policy = scenario.base_policy
    if base_policy not in policy.POLICIES:
        raise ArtmanipError(f"TTA base policy must be one of {tuple(policy.POLICIES)}")
    if cfg is None:
        cfg = control.AiaConfig()
    rng = np.random.default_rng(seed)
    init = np.zeros(policy.FEATURE_DIM)
    init[2] = scenario.prior_strength  # trust high-affordance pixels at first
    scorer = policy.TtaScorer(weights=init, learning_rate=scenario.learning_rate)
    outcomes: list[bool] = []
    base_fn = policy.POLICIES[base_policy]
    for _ in range(episodes_count):
        policy_seed = int(rng.integers(0, 2**31 - 1))
        control_seed = int(rng.integers(0, 2**31 - 1))
        try:
            setup = episodes.prepare_episode(scenario.category, rng, resolution=resolution)
            proposal = policy.propose_with_tta(
                base_fn, scorer, setup.obj, setup.view, setup.amap, policy_seed,
                candidate_count=scenario.candidate_count,
            )
        except (VisibilityError, NoAffordanceError):
            outcomes.append(False)
            continue
        pixel = proposal.pose.contact_px
        if in_forbidden_region(setup, pixel, scenario):
            success = False  # collision-analog: forced failure at the marker
        else:
            result = control.run_manipulation(setup.obj, proposal.pose, cfg, control_seed)
            success = result.displacement > INITIAL_THRESHOLD
        outcomes.append(success)
        if adapt:
            features = policy.pixel_features(setup.view, setup.amap, pixel)
            policy.tta_update(scorer, features, success)
    if scorer_path is not None:
        with open(scorer_path, "w", encoding="utf-8") as fh:
            fh.write(scorer.to_json())
    window = min(scenario.window, len(outcomes)) or 1
    first = float(np.mean(outcomes[:window])) if outcomes else 0.0
    last = float(np.mean(outcomes[-window:])) if outcomes else 0.0
    return TtaReport(
        scenario={
            "category": scenario.category,
            "forbidden_region": scenario.forbidden_region,
            "forbidden_radius_px": scenario.forbidden_radius_px,
            "window": scenario.window,
            "candidate_count": scenario.candidate_count,
            "learning_rate": scenario.learning_rate,
            "base_policy": base_policy,
            "adapt": adapt,
        },
        episodes=len(outcomes),
        outcomes=outcomes,
        overall_rate=float(np.mean(outcomes)) if outcomes else 0.0,
        first_window_rate=first,
        last_window_rate=last,
        update_count=scorer.update_count,
    )


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def emit_report(report: EvalReport, fmt: str, path) -> None:
    """Write an evaluation report as json (lossless), csv, or a markdown table."""
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    elif fmt == "csv":
        lines = ["category,episodes,initial_rate,long_rate"]
        for name, s in report.per_category.items():
            lines.append(f"{name},{s.episodes},{s.initial_rate!r},{s.long_rate!r}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    elif fmt == "markdown-table":
        lines = [
            "| category | episodes | initial rate | long rate |",
            "| --- | --- | --- | --- |",
        ]
        for name, s in report.per_category.items():
            lines.append(
                f"| {name} | {s.episodes} | {s.initial_rate:.4f} | {s.long_rate:.4f} |"
            )
        lines.append(
            f"| AVG | | {report.overall_initial:.4f} | {report.overall_long:.4f} |"
        )
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def load_report(path) -> EvalReport:
    with open(path, "r", encoding="utf-8") as fh:
        return EvalReport.from_dict(json.load(fh))
