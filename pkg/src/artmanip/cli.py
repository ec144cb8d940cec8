"""Command-line entry point.

Subcommands: gen-dataset, render-affordance, run-eval, run-tta, replay, and
export-scene. A config file (JSON, or TOML when tomllib/tomli is available)
can preset the control parameters, policy, categories, and seed; flags
override it. The ARTMANIP_OUT_DIR environment variable overrides the output
directory.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import affordance, control, dataset, episodes, harness, render, scene
from .errors import ArtmanipError
from .policy import policy_names

log = logging.getLogger(__name__)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    if path.endswith(".toml"):
        try:
            import tomllib  # py311+
        except ImportError:
            try:
                import tomli as tomllib  # type: ignore[no-redef]
            except ImportError:
                raise ArtmanipError(
                    "TOML config needs Python 3.11+ or the tomli package; "
                    "use a .json config instead"
                )
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _out_dir(args_dir: str) -> str:
    out = os.environ.get("ARTMANIP_OUT_DIR", args_dir)
    os.makedirs(out, exist_ok=True)
    return out


def _resolution_pair(spec: str) -> tuple[int, int]:
    # accepts "336" or "448x336"
    if "x" in spec:
        w, h = spec.lower().split("x")
        return int(w), int(h)
    return int(spec), int(spec)


def _resolution(spec: str) -> int:
    # episode pipelines render square images
    w, h = _resolution_pair(spec)
    if w != h:
        raise argparse.ArgumentTypeError("this command renders square images; use NxN")
    return w


def _aia_config(cfg: dict) -> control.AiaConfig:
    aia = cfg.get("aia", {})
    return control.AiaConfig(**aia) if aia else control.AiaConfig()


def cmd_gen_dataset(args) -> int:
    cfg = _load_config(args.config)
    out_dir = _out_dir(args.out_dir)
    out_path = os.path.join(out_dir, args.out)
    image_dir = None if args.no_images else os.path.join(out_dir, "images")
    categories = args.categories or cfg.get("categories") or list(scene.DEFAULT_CATEGORIES)
    stats = dataset.collect_dataset(
        categories=categories,
        episodes_per_category=args.per_category,
        seed=args.seed if args.seed is not None else cfg.get("seed", 0),
        out_path=out_path,
        image_dir=image_dir,
        resolution=args.resolution,
        cfg=_aia_config(cfg) if "aia" in cfg else None,
    )
    print(json.dumps({"out": out_path, **stats}, indent=2))
    return 0


def cmd_render_affordance(args) -> int:
    out_dir = _out_dir(args.out_dir)
    if args.scene:
        obj = scene.load_object(args.scene)
    else:
        obj = scene.build_object(args.category, args.seed)
    cam = render.sample_camera(args.camera_seed)
    width, height = args.resolution
    intr = render.make_intrinsics(width=width, height=height)
    view = render.render(obj, cam=cam, intrinsics=intr)
    amap = affordance.affordance_map(
        obj, obj.joint_values(), view, args.joint, args.probe_delta
    )
    base = os.path.join(out_dir, f"{obj.category}-{args.seed}-j{args.joint}")
    render.save_heatmap_png(amap.scores, amap.valid, base + "-affordance.png")
    render.save_pgm16(amap.scores, base + "-affordance.pgm", max_value=1.0)
    render.save_pgm16(view.depth, base + "-depth.pgm")
    render.save_png16(view.depth, base + "-depth.png")
    part_buffer = (view.part_id + 1).astype(float)
    render.save_pgm16(part_buffer, base + "-part-id.pgm")
    render.save_png16(part_buffer, base + "-part-id.png")
    render.save_shaded_png(view, base + "-shade.png")
    print(f"wrote {base}-{{affordance,depth,part-id}}.{{png,pgm}} and {base}-shade.png")
    return 0


def cmd_run_eval(args) -> int:
    cfg = _load_config(args.config)
    out_dir = _out_dir(args.out_dir)
    categories = args.categories or cfg.get("categories") or list(scene.DEFAULT_CATEGORIES)
    scorer = None
    if args.scorer:
        from .policy import TtaScorer

        with open(args.scorer, "r", encoding="utf-8") as fh:
            scorer = TtaScorer.from_json(fh.read())
    report = harness.evaluate(
        policy_name=args.policy or cfg.get("policy", "oracle"),
        categories=categories,
        episodes_per_category=args.episodes if args.episodes is not None
        else cfg.get("episodes_per_category", 100),
        cfg=_aia_config(cfg),
        seed=args.seed if args.seed is not None else cfg.get("seed", 0),
        resolution=args.resolution,
        trace_dir=os.path.join(out_dir, "traces") if args.traces else None,
        scorer=scorer,
    )
    out_path = os.path.join(out_dir, args.out)
    harness.emit_report(report, args.format, out_path)
    print(f"wrote {out_path}")
    for name, s in report.per_category.items():
        print(f"  {name:14s} initial {s.initial_rate:.3f}  long {s.long_rate:.3f}")
    print(f"  {'AVG':14s} initial {report.overall_initial:.3f}  long {report.overall_long:.3f}")
    return 0


def cmd_run_tta(args) -> int:
    cfg = _load_config(args.config)
    out_dir = _out_dir(args.out_dir)
    scenario = harness.TtaScenario(
        forbidden_region=not args.no_shift,
        forbidden_radius_px=args.radius,
    )
    if args.category or cfg.get("tta_category"):
        scenario.category = args.category or cfg["tta_category"]
    report = harness.run_tta_experiment(
        base_policy=args.policy or cfg.get("tta_base_policy", "oracle"),
        scenario=scenario,
        episodes_count=args.episodes,
        seed=args.seed if args.seed is not None else cfg.get("seed", 0),
        cfg=_aia_config(cfg),
        resolution=args.resolution,
        adapt=not args.no_adapt,
        scorer_path=os.path.join(out_dir, "scorer.json"),
    )
    out_path = os.path.join(out_dir, args.out)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out_path}")
    print(f"  overall {report.overall_rate:.3f}  first-{scenario.window} "
          f"{report.first_window_rate:.3f}  last-{scenario.window} {report.last_window_rate:.3f}")
    return 0


def cmd_replay(args) -> int:
    with open(args.trace, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if "result" in payload:  # an evaluation trace file
        meta = payload["meta"]
        setup = episodes.rebuild_episode(meta)
        answer = payload.get("pose", {}).get("answer", "")
        if not answer:
            print("trace has no pose answer; nothing to replay", file=sys.stderr)
            return 1
        pose = dataset.pose_from_answer(answer, setup.view)
        cfg = control.AiaConfig(**payload.get("config", {})) if payload.get("config") else control.AiaConfig()
        result = control.run_manipulation(setup.obj, pose, cfg, int(meta["control_seed"]))
        recorded = payload["result"]
        match = (
            abs(result.displacement - recorded["displacement"]) < 1e-12
            and result.steps == recorded["steps"]
        )
        print(json.dumps({
            "recorded_displacement": recorded["displacement"],
            "replayed_displacement": result.displacement,
            "recorded_steps": recorded["steps"],
            "replayed_steps": result.steps,
            "match": match,
        }, indent=2))
        return 0 if match else 1
    print("unrecognized trace format", file=sys.stderr)
    return 1


def cmd_export_scene(args) -> int:
    out_dir = _out_dir(args.out_dir)
    obj = scene.build_object(args.category, args.seed)
    path = os.path.join(out_dir, args.out or f"{args.category}-{args.seed}.json")
    scene.save_object(obj, path)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artmanip",
                                     description="Articulated-object manipulation sandbox")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dataset", help="collect prompt/answer records from oracle episodes")
    p.add_argument("--categories", nargs="*", default=None)
    p.add_argument("--per-category", type=int, default=50,
                   help="successful episodes to collect per category")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="dataset.jsonl")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--resolution", type=_resolution, default=None, help="WxH (square)")
    p.add_argument("--no-images", action="store_true")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("render-affordance", help="render one scene's affordance map")
    p.add_argument("--category", default="door")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--camera-seed", type=int, default=0)
    p.add_argument("--joint", type=int, default=0)
    p.add_argument("--probe-delta", type=float, default=None)
    p.add_argument("--resolution", type=_resolution_pair,
                   default=(render.DEFAULT_RESOLUTION, render.DEFAULT_RESOLUTION),
                   help="WxH")
    p.add_argument("--scene", default=None, help="load a scene JSON instead of generating")
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_render_affordance)

    p = sub.add_parser("run-eval", help="evaluate a policy per category")
    p.add_argument("--policy", choices=policy_names(), default=None)
    p.add_argument("--categories", nargs="*", default=None)
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=["json", "csv", "markdown-table"], default="json")
    p.add_argument("--out", default="report.json")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--resolution", type=_resolution, default=None)
    p.add_argument("--traces", action="store_true", help="write per-episode trace JSON")
    p.add_argument("--scorer", default=None,
                   help="scorer JSON (from run-tta) for the +tta policies")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_run_eval)

    p = sub.add_parser("run-tta", help="sequential adaptation experiment")
    p.add_argument("--policy", choices=["oracle", "affordance"], default=None)
    p.add_argument("--category", default=None)
    p.add_argument("--episodes", type=int, default=300)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--radius", type=float, default=15.0,
                   help="forbidden-region radius in pixels")
    p.add_argument("--no-shift", action="store_true", help="disable the domain shift")
    p.add_argument("--no-adapt", action="store_true", help="freeze the scorer (baseline)")
    p.add_argument("--resolution", type=_resolution, default=None)
    p.add_argument("--out", default="tta.json")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_run_tta)

    p = sub.add_parser("replay", help="re-run a recorded episode trace")
    p.add_argument("--trace", required=True)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("export-scene", help="write a procedural scene as JSON")
    p.add_argument("--category", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_export_scene)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ArtmanipError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
