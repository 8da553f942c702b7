"""Command line entry points: synth, sample-poses, eval, refine.

Every command is deterministic given --seed, exits 0 on success and
nonzero with a one-line diagnostic on stderr otherwise.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import batchio
from .batchio import (load_model, load_models_dir, read_pose_bin,
                      read_pose_csv, write_batch, write_pose_bin,
                      write_pose_csv)
from .geometry import Pose
from .icp import IcpSchedule, icp_point_to_point
from .metrics import (CorrectnessPolicy, EvalRecord, add_error, adds_error,
                      pose_correct, summarize)
from .occlusion import OccluderConfig, SynthConfig, synthesize_batch
from .rng import derive_seed, generator
from .sampling import KDE, VERBATIM, draw_poses, fit_pose_sampler


def _parse_pair(text: str, caster, flag: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"{flag} expects LO:HI, got {text!r}")
    return caster(parts[0]), caster(parts[1])


def _read_poses_any(path) -> tuple[np.ndarray, list[Pose]]:
    """Dispatch on the leading magic bytes: binary pool or CSV."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"pose file not found: {path}")
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == batchio.POSE_MAGIC:
        return read_pose_bin(path)
    return read_pose_csv(path)


def _write_poses_any(path, class_ids, poses) -> None:
    if Path(path).suffix.lower() == ".bin":
        write_pose_bin(path, class_ids, poses)
    else:
        write_pose_csv(path, class_ids, poses)


def _parse_policy(text: str) -> CorrectnessPolicy:
    if text.startswith("diameter"):
        pct = text[len("diameter"):]
        return CorrectnessPolicy("diameter_fraction", float(pct) / 100.0)
    if text.startswith("abs:"):
        return CorrectnessPolicy("absolute", float(text[len("abs:"):]))
    raise ValueError(f"policy must be diameterNN or abs:METERS, got {text!r}")


def _read_metric_map(path) -> dict[int, str]:
    """Lines `class_id,add|adds`; unlisted classes default to add."""
    mapping: dict[int, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2 or parts[1] not in ("add", "adds"):
            raise ValueError(f"{path}: line {lineno}: expected `class_id,add|adds`")
        mapping[int(parts[0])] = parts[1]
    return mapping


# ---------------------------------------------------------------------------
# Subcommands

def _cmd_synth(args) -> int:
    models = load_models_dir(args.models, scale=args.scale)
    class_ids, poses = _read_poses_any(args.poses)
    missing = sorted(set(int(c) for c in class_ids) - set(models))
    if missing:
        raise ValueError(f"pose file references class ids without models: {missing}")

    # Pool rows are drawn in the parent so the task list, and therefore the
    # output file, is identical for any --workers value.
    rng = generator(derive_seed(args.seed, 0x9005E))
    rows = rng.integers(0, len(poses), size=args.count)
    tasks = [(int(class_ids[i]), poses[i]) for i in rows]

    lo, hi = _parse_pair(args.occluder_count, int, "--occluder-count")
    rlo, rhi = _parse_pair(args.occluder_radius, float, "--occluder-radius")
    config = SynthConfig(
        occluders=OccluderConfig(count_range=(lo, hi),
                                 sphere_radius_range=(rlo, rhi)),
        noise_sigma=args.sigma,
        output_points=args.points,
        hpr_radius_factor=args.hpr_factor,
    )
    samples = synthesize_batch(models, tasks, args.seed, config,
                               workers=args.workers)
    write_batch(samples, args.out, class_count=max(models) + 1)
    print(f"wrote {len(samples)} samples to {args.out}")
    return 0


def _cmd_sample_poses(args) -> int:
    class_ids, poses = _read_poses_any(args.train)
    mode = {"kde": KDE, "verbatim": VERBATIM}[args.mode]
    out_ids: list[int] = []
    out_poses: list[Pose] = []
    # --count poses per class, mirroring per-object pose pools.
    for cid in sorted(set(int(c) for c in class_ids)):
        train = [p for c, p in zip(class_ids, poses) if int(c) == cid]
        sampler = fit_pose_sampler(train, mode=mode)
        drawn = draw_poses(sampler, derive_seed(args.seed, cid), args.count)
        out_ids.extend([cid] * len(drawn))
        out_poses.extend(drawn)
    _write_poses_any(args.out, out_ids, out_poses)
    print(f"wrote {len(out_poses)} poses ({args.count} per class) to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    models = load_models_dir(args.models, scale=args.scale)
    gt_ids, gt_poses = _read_poses_any(args.gt)
    pred_ids, pred_poses = _read_poses_any(args.pred)
    if len(gt_poses) != len(pred_poses):
        raise ValueError(f"gt has {len(gt_poses)} poses, pred has "
                         f"{len(pred_poses)}")
    if not np.array_equal(gt_ids, pred_ids):
        raise ValueError("gt and pred class ids disagree row-by-row")

    policy = _parse_policy(args.policy)
    metric_map = _read_metric_map(args.metric_map) if args.metric_map else {}
    records = []
    for cid, gt, pred in zip(gt_ids, gt_poses, pred_poses):
        cid = int(cid)
        if cid not in models:
            raise ValueError(f"no model for class id {cid}")
        model = models[cid]
        e_add = add_error(gt, pred, model)
        e_adds = adds_error(gt, pred, model)
        chosen = e_adds if metric_map.get(cid, "add") == "adds" else e_add
        records.append(EvalRecord(class_id=cid, error_add=e_add,
                                  error_adds=e_adds,
                                  correct=pose_correct(chosen, model, policy)))
    report = summarize(records, policy, args.tau_max)
    text = batchio.format_report(report, fmt=args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_refine(args) -> int:
    model = load_model(args.model, scale=args.scale)
    segment = batchio._read_ascii_points(Path(args.segment))
    if len(segment) == 0:
        raise ValueError(f"{args.segment}: no points")
    init_ids, init_poses = _read_poses_any(args.init_pose)
    if len(init_poses) != 1:
        raise ValueError(f"{args.init_pose}: expected exactly one pose, "
                         f"found {len(init_poses)}")
    # --decay is the fractional radius reduction per iteration, so the
    # multiplicative factor applied to the radius is 1 - decay.
    schedule = IcpSchedule(iterations=args.iters,
                           initial_radius=args.radius,
                           decay=1.0 - args.decay)
    result = icp_point_to_point(model.cloud, segment, init_poses[0], schedule)
    write_pose_csv(args.out, [int(init_ids[0])], [result.refined])
    print(f"refined pose written to {args.out} "
          f"(rmse={result.final_rmse:.6g}, "
          f"matched={result.matched_fraction:.3f})")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcpose",
        description="Synthetic occluded-segment generation and 6D pose "
                    "evaluation for point-cloud models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a batch of synthetic segments")
    p.add_argument("--models", required=True, help="directory of model files")
    p.add_argument("--poses", required=True, help="pose pool (CSV or binary)")
    p.add_argument("--out", required=True, help="output batch file")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=256)
    p.add_argument("--sigma", type=float, default=0.0013,
                   help="noise standard deviation in meters")
    p.add_argument("--occluder-count", default="0:3", metavar="LO:HI")
    p.add_argument("--occluder-radius", default="0.01:0.04", metavar="LO:HI")
    p.add_argument("--hpr-factor", type=float, default=100.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--scale", type=float, default=1.0,
                   help="model unit rescale, e.g. 0.001 for millimeters")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("sample-poses", help="draw poses from a training pool")
    p.add_argument("--train", required=True, help="training pose file")
    p.add_argument("--mode", choices=("kde", "verbatim"), default="kde")
    p.add_argument("--count", type=int, required=True,
                   help="poses to draw per class")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True,
                   help="output pose file (.bin selects the binary format)")
    p.set_defaults(func=_cmd_sample_poses)

    p = sub.add_parser("eval", help="score predicted poses against ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--policy", default="diameter10",
                   help="diameterNN (percent of diameter) or abs:METERS")
    p.add_argument("--tau-max", type=float, default=0.1)
    p.add_argument("--metric-map", default=None,
                   help="file of `class_id,add|adds` correctness overrides")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", default=None, help="report path (default stdout)")
    p.add_argument("--scale", type=float, default=1.0)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("refine", help="ICP-refine one pose against a segment")
    p.add_argument("--model", required=True)
    p.add_argument("--segment", required=True, help="segment point file")
    p.add_argument("--init-pose", required=True, help="single-row pose file")
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--radius", type=float, default=0.01)
    p.add_argument("--decay", type=float, default=0.1,
                   help="fractional radius reduction per iteration")
    p.add_argument("--out", required=True, help="refined pose output file")
    p.add_argument("--scale", type=float, default=1.0)
    p.set_defaults(func=_cmd_refine)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
