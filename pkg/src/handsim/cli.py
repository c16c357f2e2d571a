"""Config-driven command-line surface: data generation, training, sampling,
evaluation, and action ranking.

Exit codes: 0 success, 2 config error, 3 data error, 4 training divergence.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .codec import Codec, CodecMode, CodecTrainConfig, train_codec
from .common import TrainingDiverged
from .config import ConfigError, RunConfig, load_config
from .container import ContainerError
from .data import (
    Manifest,
    ManifestError,
    RecordError,
    build_fixedcam_split,
    build_synthetic_split,
    draw_epoch,
    load_record,
    mix_hybrid,
)
from .diffusion import (
    TrainHP,
    finetune_triplet,
    init_train_state,
    load_checkpoint,
    make_finetune_bundle,
    pretrain_i2v,
    pretrain_inpainting,
    sample_batch,
    save_checkpoint,
)
from .eval import (
    EvalContext,
    GoalKind,
    GoalSpec,
    ProbeTrainConfig,
    batch_evaluate,
    load_probe,
    rank_actions,
    save_probe,
    train_probe,
    write_report_csv,
)
from .plots import plot_metric_report, plot_per_frame_psnr, plot_training_curve
from .ppm import read_ppm, write_ppm, write_strip
from .worldsim import (
    InfeasibleTaskError,
    PlacementError,
    Task,
    WorldError,
    sample_action_script,
    sample_scene,
)

_DATA_ERRORS = (RecordError, ManifestError, ContainerError, WorldError,
                FileNotFoundError, KeyError)

# seed offsets keep every split's record seeds disjoint
_SPLIT_BASES = {
    "train_syn": 0, "train_fix": 1, "val_syn": 2, "val_fix": 3,
    "test_syn": 4, "test_fix": 5, "test_holdout": 6,
}


def _data_dir(cfg: RunConfig) -> str:
    return os.path.join(str(cfg["run"]["out_dir"]), "data")


def _seed_base(cfg: RunConfig, name: str) -> int:
    return int(cfg["run"]["seed"]) * 10_000_000 + _SPLIT_BASES[name] * 1_000_000


def cmd_gen_data(cfg: RunConfig) -> int:
    wcfg = cfg.world_config()
    ds = cfg["dataset"]
    out = _data_dir(cfg)
    os.makedirs(out, exist_ok=True)
    cfg.write_resolved(out)

    pieces = {}
    for split, n_key, fixed in [
        ("train", "n_train_syn", False), ("train", "n_train_fix", True),
        ("val", "n_val_syn", False), ("val", "n_val_fix", True),
        ("test", "n_test_syn", False), ("test", "n_test_fix", True),
    ]:
        name = f"{split}_{'fix' if fixed else 'syn'}"
        build = build_fixedcam_split if fixed else build_synthetic_split
        m = build(int(ds[n_key]), _seed_base(cfg, name), wcfg, out_dir=out, split=split)
        m.save(os.path.join(out, f"{name}.manifest"))
        pieces[name] = m
        print(f"built {name}: {len(m.entries)} records")

    holdout = build_synthetic_split(int(ds["n_test_holdout"]), _seed_base(cfg, "test_holdout"),
                                    wcfg, out_dir=out, split="test_holdout")
    holdout.save(os.path.join(out, "test_holdout.manifest"))
    print(f"built test_holdout: {len(holdout.entries)} records")

    hybrid = mix_hybrid(pieces["train_syn"], pieces["train_fix"], float(ds["mix_weight"]))
    hybrid.save(os.path.join(out, "train.manifest"))

    test = Manifest(root=out, entries=pieces["test_syn"].entries
                    + pieces["test_fix"].entries + holdout.entries)
    test.save(os.path.join(out, "test.manifest"))
    val = Manifest(root=out, entries=pieces["val_syn"].entries + pieces["val_fix"].entries)
    val.save(os.path.join(out, "val.manifest"))
    print(f"manifests written under {out}")
    return 0


def _load_train_records(cfg: RunConfig, n_draw: int | None = None):
    out = _data_dir(cfg)
    manifest = Manifest.load(os.path.join(out, "train.manifest"))
    entries = manifest.select(split="train")
    if n_draw is not None:
        entries = draw_epoch(manifest, int(cfg["run"]["seed"]), n_draw)
    return [load_record(manifest.record_path(e)) for e in entries]


def _codec_for_diffusion(cfg: RunConfig) -> Codec:
    ccfg = cfg.codec_config()
    if ccfg.mode is CodecMode.PATCHIFY:
        return Codec(ccfg)
    path = os.path.join(str(cfg["run"]["out_dir"]), "codec.ckpt")
    return Codec.load(path)


def cmd_train(cfg: RunConfig, stage: str, from_scratch: bool = False,
              init: str | None = None, resume: str | None = None) -> int:
    out = str(cfg["run"]["out_dir"])
    os.makedirs(out, exist_ok=True)
    cfg.write_resolved(out)
    d = cfg["diffusion"]
    log_path = os.path.join(out, f"train_{stage}.csv")

    if stage == "codec":
        records = _load_train_records(cfg)
        videos = [r.interaction for r in records]
        c = cfg["codec"]
        ccfg = cfg.codec_config()
        if ccfg.mode is not CodecMode.LEARNED:
            raise ConfigError("stage=codec requires codec.mode=learned")
        codec, _ = train_codec(videos, ccfg, CodecTrainConfig(
            steps=int(c["train_steps"]), batch_size=int(c["batch_size"]),
            lr=float(c["lr"]), seed=int(cfg["run"]["seed"]), log_path=log_path))
        codec.save(os.path.join(out, "codec.ckpt"))
    elif stage == "probe":
        records = _load_train_records(cfg)
        e = cfg["evaluator"]
        probe, _ = train_probe([r.interaction for r in records],
                               [r.label for r in records], label_vocab=4,
                               hp=ProbeTrainConfig(steps=int(e["probe_steps"]),
                                                   lr=float(e["probe_lr"]),
                                                   seed=int(cfg["run"]["seed"]),
                                                   log_path=log_path))
        save_probe(probe, os.path.join(out, "probe.ckpt"))
    else:
        codec = _codec_for_diffusion(cfg)
        hp = TrainHP(steps=int(d["train_steps"]), batch_size=int(d["batch_size"]),
                     lr=float(d["lr"]), log_path=log_path)
        if resume:
            state = load_checkpoint(resume)
        elif stage == "finetune":
            init_path = init or os.path.join(out, "ckpt_pretrain_inpaint.ckpt")
            if from_scratch:
                state = init_train_state(cfg.denoiser_config(), cfg.schedule(),
                                         seed=int(cfg["run"]["seed"]), lr=hp.lr)
            elif os.path.exists(init_path):
                state = load_checkpoint(init_path)
            else:
                raise ConfigError(
                    f"finetune needs a pretraining checkpoint at {init_path} "
                    "(or pass --init / --from-scratch)")
        else:
            state = init_train_state(cfg.denoiser_config(), cfg.schedule(),
                                     seed=int(cfg["run"]["seed"]), lr=hp.lr)

        if stage == "pretrain_inpaint":
            videos = [r.interaction for r in _load_train_records(cfg)]
            pretrain_inpainting(state, videos, codec, hp)
            ckpt = "ckpt_pretrain_inpaint.ckpt"
        elif stage == "pretrain_i2v":
            videos = [r.interaction for r in _load_train_records(cfg)]
            pretrain_i2v(state, videos, codec, hp)
            ckpt = "ckpt_pretrain_i2v.ckpt"
        elif stage == "finetune":
            manifest = Manifest.load(os.path.join(_data_dir(cfg), "train.manifest"))
            entries = draw_epoch(manifest, int(cfg["run"]["seed"]),
                                 len(manifest.select(split="train")))
            records = [load_record(manifest.record_path(e)) for e in entries]
            finetune_triplet(state, records, codec, hp)
            ckpt = "ckpt_finetune.ckpt"
        else:
            raise ConfigError(f"unknown training stage '{stage}'")
        save_checkpoint(state, os.path.join(out, ckpt))

    plot_training_curve(log_path, os.path.join(out, f"train_{stage}.png"))
    print(f"stage {stage} complete; artifacts under {out}")
    return 0


def _eval_context(cfg: RunConfig, checkpoint: str, codec_ckpt: str | None,
                  probe_ckpt: str | None) -> tuple[EvalContext, "TrainState"]:
    state = load_checkpoint(checkpoint)
    ctx = EvalContext(
        model=state.model,
        codec=_codec_for_diffusion(cfg),
        schedule=state.schedule,
        world_cfg=cfg.world_config(),
        perceptual_codec=Codec.load(codec_ckpt) if codec_ckpt else None,
        probe=load_probe(probe_ckpt) if probe_ckpt else None,
        sample_steps=int(cfg["diffusion"]["sample_steps"]),
        guidance_scale=float(cfg["diffusion"]["guidance_scale"]),
    )
    return ctx, state


def cmd_sample(cfg: RunConfig, checkpoint: str, out: str,
               record_id: str | None = None, manifest_path: str | None = None,
               scene_seed: int | None = None, task: str | None = None,
               seed: int = 0) -> int:
    os.makedirs(out, exist_ok=True)
    cfg.write_resolved(out)
    ctx, _ = _eval_context(cfg, checkpoint, None, None)
    wcfg = cfg.world_config()

    if record_id is not None:
        manifest = Manifest.load(manifest_path or os.path.join(_data_dir(cfg), "test.manifest"))
        matches = [e for e in manifest.entries if e.record_id == record_id]
        if not matches:
            raise KeyError(f"record id {record_id} not in manifest")
        record = load_record(manifest.record_path(matches[0]))
    else:
        scene = sample_scene(int(scene_seed), wcfg)
        script = sample_action_script(scene, int(scene_seed), Task[task.upper().replace("-", "_")], wcfg)
        from .worldsim import rollout_triplet

        record = rollout_triplet(scene, script, wcfg, seed=int(scene_seed))

    _, bundle = make_finetune_bundle(record, ctx.codec, ctx.model.cfg.conditioning_mode)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5A11]))
    z = sample_batch(ctx.model, [bundle], ctx.schedule, steps=ctx.sample_steps,
                     guidance_scale=ctx.guidance_scale, rng=rng)[0]
    video = np.clip(ctx.codec.decode(z), 0.0, 1.0)

    for t in range(video.shape[0]):
        write_ppm(video[t], os.path.join(out, f"frame_{t:03d}.ppm"))
    stride = max(1, video.shape[0] // 4)
    write_strip([video[t] for t in range(0, video.shape[0], stride)],
                os.path.join(out, "generated_strip.ppm"))
    from .data import TripletRecord, serialize_record
    from dataclasses import replace

    serialize_record(replace(record, interaction=video), os.path.join(out, "generated.dwt"))
    print(f"wrote {video.shape[0]} frames to {out}")
    return 0


def cmd_eval(cfg: RunConfig, checkpoint: str, manifest_path: str,
             codec_ckpt: str | None, probe_ckpt: str | None,
             dump_strips: int = 0) -> int:
    out = str(cfg["run"]["out_dir"])
    os.makedirs(out, exist_ok=True)
    cfg.write_resolved(out)
    ctx, _ = _eval_context(cfg, checkpoint, codec_ckpt, probe_ckpt)
    manifest = Manifest.load(manifest_path)
    seeds = tuple(range(int(cfg["evaluator"]["eval_seeds"])))

    reports = []
    for split in sorted({e.split for e in manifest.entries}):
        reports.extend(batch_evaluate(ctx, manifest, seeds=seeds, split=split))
    write_report_csv(reports, os.path.join(out, "eval_report.csv"))
    plot_metric_report(reports, os.path.join(out, "eval_metrics.png"))
    plot_per_frame_psnr(reports, os.path.join(out, "eval_per_frame_psnr.png"))

    if dump_strips:
        from .eval.batch import model_sampler

        sampler = model_sampler(ctx)
        for entry in manifest.entries[:dump_strips]:
            record = load_record(manifest.record_path(entry))
            video = sampler(record, 0)
            mid = record.shape[0] // 2
            write_strip([record.static[mid], record.hand[mid], video[mid],
                         record.interaction[mid]],
                        os.path.join(out, f"strip_{entry.record_id}.ppm"))

    for r in reports:
        print(r.as_row())
    print(f"report written to {os.path.join(out, 'eval_report.csv')}")
    return 0


def _parse_goal(spec: str) -> GoalSpec:
    kind, _, payload = spec.partition(":")
    if kind == "label":
        return GoalSpec(GoalKind.TEXT_LABEL, label=int(payload))
    if kind == "image":
        return GoalSpec(GoalKind.IMAGE, goal_frame=read_ppm(payload))
    raise ConfigError(f"goal must be label:<int> or image:<path>, got {spec}")


def cmd_rank(cfg: RunConfig, checkpoint: str, scene_seed: int, candidates_file: str,
             goal: str, codec_ckpt: str | None, probe_ckpt: str | None,
             oracle: bool = False) -> int:
    ctx, _ = _eval_context(cfg, checkpoint, codec_ckpt, probe_ckpt)
    wcfg = cfg.world_config()
    scene = sample_scene(scene_seed, wcfg)

    candidates = []
    with open(candidates_file) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            kv = dict(item.split("=") for item in line.split())
            task = Task[kv["task"].upper().replace("-", "_")]
            candidates.append(sample_action_script(scene, int(kv.get("seed", 0)), task, wcfg))

    result = rank_actions(ctx, scene, candidates, _parse_goal(goal), oracle=oracle)
    out = cfg["run"]["out_dir"]
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "rank_result.csv"), "w") as f:
        f.write("candidate,score,best\n")
        for i, s in enumerate(result.scores):
            f.write(f"{i},{s!r},{int(i == result.best_index)}\n")
    for i, s in enumerate(result.scores):
        marker = " <= best" if i == result.best_index else ""
        print(f"candidate {i}: score {s:.6f}{marker}")
    print(f"best_index {result.best_index}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a config key (repeatable; wins over the file)")
    p = argparse.ArgumentParser(prog="handsim")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("gen-data", parents=[common],
                   help="build dataset splits and manifests")

    t = sub.add_parser("train", parents=[common], help="run a training stage")
    t.add_argument("stage", choices=["codec", "probe", "pretrain_inpaint",
                                     "pretrain_i2v", "finetune"])
    t.add_argument("--from-scratch", action="store_true")
    t.add_argument("--init", help="initialization checkpoint for finetune")
    t.add_argument("--resume", help="resume from a mid-run checkpoint")

    s = sub.add_parser("sample", parents=[common], help="generate one video")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--record-id")
    s.add_argument("--manifest")
    s.add_argument("--scene-seed", type=int)
    s.add_argument("--task", choices=["noop", "nav-only", "pick-place", "open-articulated"])
    s.add_argument("--seed", type=int, default=0)

    e = sub.add_parser("eval", parents=[common], help="run the benchmark evaluation")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--manifest", required=True)
    e.add_argument("--codec", help="LEARNED codec checkpoint for the perceptual metric")
    e.add_argument("--probe", help="probe checkpoint for the semantic metric")
    e.add_argument("--dump-strips", type=int, default=0)

    r = sub.add_parser("rank", parents=[common], help="rank candidate actions against a goal")
    r.add_argument("--checkpoint", required=True)
    r.add_argument("--scene-seed", type=int, required=True)
    r.add_argument("--candidates-file", required=True)
    r.add_argument("--goal", required=True, help="label:<int> or image:<path.ppm>")
    r.add_argument("--codec")
    r.add_argument("--probe")
    r.add_argument("--oracle", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set)
        if args.command == "gen-data":
            return cmd_gen_data(cfg)
        if args.command == "train":
            return cmd_train(cfg, args.stage, args.from_scratch, args.init, args.resume)
        if args.command == "sample":
            if args.record_id is None and args.scene_seed is None:
                raise ConfigError("sample needs --record-id or --scene-seed with --task")
            if args.scene_seed is not None and args.task is None:
                raise ConfigError("--scene-seed requires --task")
            return cmd_sample(cfg, args.checkpoint, args.out, args.record_id,
                              args.manifest, args.scene_seed, args.task, args.seed)
        if args.command == "eval":
            return cmd_eval(cfg, args.checkpoint, args.manifest, args.codec,
                            args.probe, args.dump_strips)
        if args.command == "rank":
            return cmd_rank(cfg, args.checkpoint, args.scene_seed, args.candidates_file,
                            args.goal, args.codec, args.probe, args.oracle)
        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as err:
        print(f"data error: {err}", file=sys.stderr)
        return 3
    except TrainingDiverged as err:
        print(f"training diverged: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
