"""Command-line operator interface.

Each subcommand drives exactly one pipeline stage; every run writes an
effective-config snapshot next to its outputs, all randomness hangs off
--seed, and failures exit nonzero with a single parseable line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .corrector import (CorrectorTrainSpec, fit_residual_profile,
                        flag_and_correct, forecaster_mse, inject_deviation,
                        injection_sites, to_correction_space, train_forecaster)
from .dataio import (DEFAULT_FPS, SyntheticSpec, generate_synthetic,
                     load_angle_sequence, load_keypoints, load_manifest,
                     load_sequences, save_angle_sequence, save_keypoints,
                     split, synth_keypoint_frames)
from .keyframe import DEFAULT_K, DEFAULT_WINDOW, rolling_stats, select_keyframes
from .kinematics import build_default_basis, extract_features
from .neural import TrainConfig
from .quantize import accuracy_delta, bench, quantize_model
from .recognizer import (RecognizerTrainSpec, classify, evaluate,
                         train_recognizer)
from .registry import ModelRegistry
from .sequence import PoseSequence
from .standardize import standardize, target_length


def _snapshot(args: argparse.Namespace, out_dir: Path) -> None:
    doc = {k: (str(v) if isinstance(v, Path) else v)
           for k, v in vars(args).items() if k != "func"}
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "effective_config.json").write_text(
        json.dumps(doc, sort_keys=True, indent=1) + "\n")


# ------------------------------------------------------------ subcommands

def cmd_synth(args) -> int:
    out = Path(args.out)
    _snapshot(args, out)
    if args.kind == "angles":
        spec = SyntheticSpec(
            num_classes=args.classes, sequences_per_class=args.per_class,
            frames_mean=args.frames_mean, frames_jitter=args.frames_jitter,
            num_angles=args.num_angles, noise_std=args.noise_std,
            seed=args.seed, offset_spread=args.offset_spread)
        manifest = generate_synthetic(spec, out)
        print(f"wrote {len(manifest.entries)} sequences in "
              f"{len(manifest.classes)} classes to {out}")
    else:
        for i in range(args.per_class):
            frames = synth_keypoint_frames(args.frames_mean,
                                           seed=args.seed + i, style=i)
            save_keypoints(frames, out / f"kp_{i:03d}.jsonl")
        print(f"wrote {args.per_class} keypoint clips to {out}")
    return 0


def cmd_extract(args) -> int:
    basis = build_default_basis()
    frames = load_keypoints(args.keypoints)
    if not frames:
        raise ValueError(f"{args.keypoints} holds no frames")
    values = np.stack([extract_features(f, basis).values for f in frames])
    seq = PoseSequence(values=values,
                       times=np.array([f.t for f in frames]),
                       pose_class=args.pose_class, subject_id=args.subject,
                       fps=args.fps, sequence_id=Path(args.keypoints).stem,
                       basis_id=basis.basis_id)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_angle_sequence(seq, out)
    _snapshot(args, out.parent)
    print(f"extracted {values.shape[0]} frames x {values.shape[1]} angles "
          f"-> {out}")
    return 0


def cmd_keyframes(args) -> int:
    seq = load_angle_sequence(args.angles)
    stats = rolling_stats(seq, args.window)
    kfs = select_keyframes(stats, args.k)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w") as fh:
            fh.write("t,E,selected\n")
            chosen = set(kfs.indices.tolist())
            for t, e in enumerate(stats.aggregated):
                fh.write(f"{t},{repr(float(e))},{int(t in chosen)}\n")
    print("key frames:", " ".join(map(str, kfs.indices.tolist())))
    return 0


def cmd_standardize(args) -> int:
    manifest = load_manifest(Path(args.data) / "manifest.json")
    sequences = load_sequences(manifest, args.data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _snapshot(args, out)
    from .dataio import DatasetManifest, ManifestEntry, sha256_file
    entries, checksums = [], {}
    for entry, seq in zip(manifest.entries, sequences):
        if args.pose_class and entry.pose_class != args.pose_class:
            continue
        std = standardize(seq, sequences, entry.pose_class, args.window)
        (out / entry.pose_class).mkdir(exist_ok=True)
        save_angle_sequence(std, out / entry.file_path)
        entries.append(entry)
        checksums[entry.file_path] = sha256_file(out / entry.file_path)
        t = target_length(sequences, entry.pose_class)
        print(f"{entry.sequence_id}: {len(seq)} -> {len(std)} (target {t})")
    DatasetManifest(entries=entries, checksums=checksums).save(
        out / "manifest.json")
    return 0


def _load_dataset(data_dir) -> list[PoseSequence]:
    manifest = load_manifest(Path(data_dir) / "manifest.json")
    return load_sequences(manifest, data_dir)


def cmd_train_recognizer(args) -> int:
    sequences = _load_dataset(args.data)
    labels = [s.pose_class for s in sequences]
    from .dataio import split_indices
    train_idx, test_idx = split_indices(labels, args.split, args.seed)
    train_seqs = [sequences[i] for i in train_idx]
    test_seqs = [sequences[i] for i in test_idx]
    spec = RecognizerTrainSpec(
        hidden=args.hidden, heads=args.heads, attention=not args.no_attention,
        k=args.k, window=args.window, noise_copies=args.noise_copies,
        noise_scale=args.noise_scale,
        train=TrainConfig(learning_rate=args.lr, batch_size=args.batch_size,
                          epochs=args.epochs, seed=args.seed))
    model, history = train_recognizer(train_seqs, spec)
    out = Path(args.out)
    reg = ModelRegistry(recognizer=model)
    reg.save(out)
    _snapshot(args, out)
    metrics = evaluate(model, test_seqs) if test_seqs else None
    doc = {"loss_first": history[0], "loss_last": history[-1],
           "test": metrics.to_dict() if metrics else None}
    (out / "recognizer_eval.json").write_text(json.dumps(doc, indent=1) + "\n")
    if metrics:
        print(f"test accuracy {metrics.accuracy:.4f}  macro F1 "
              f"{metrics.macro_f1:.4f}")
    return 0


def cmd_train_corrector(args) -> int:
    sequences = _load_dataset(args.data)
    basis = build_default_basis()
    out = Path(args.out)
    reg = ModelRegistry.load(out) if (out / "recognizer.fcm").exists() \
        else ModelRegistry()
    classes = args.pose_class or sorted({s.pose_class for s in sequences})
    _snapshot(args, out)
    for cls in classes:
        clips = [s for s in sequences if s.pose_class == cls]
        if not clips:
            raise ValueError(f"no sequences of class {cls!r} in {args.data}")
        std = [standardize(s, clips, cls, args.window) for s in clips]
        if clips[0].num_angles != 9:
            std = [to_correction_space(s, basis) for s in std]
        n_fit = max(2, int(round(args.profile_frac * len(std))))
        if len(std) - n_fit < 1:
            raise ValueError(f"class {cls!r} too small to hold out a "
                             f"profile-fit set")
        fit_set, train_set = std[:n_fit], std[n_fit:]
        spec = CorrectorTrainSpec(
            context=args.context, hidden=args.hidden,
            train=TrainConfig(learning_rate=args.lr, batch_size=args.batch_size,
                              epochs=args.epochs, seed=args.seed))
        model, history = train_forecaster(train_set, spec)
        profile = fit_residual_profile(model, fit_set)
        reg.correctors[cls] = model
        reg.profiles[cls] = profile
        print(f"{cls}: loss {history[0]:.2e} -> {history[-1]:.2e}, "
              f"sigma mean {profile.per_angle_std.mean():.2e}")
    reg.save(out)
    return 0


def cmd_evaluate(args) -> int:
    sequences = _load_dataset(args.data)
    reg = ModelRegistry.load(args.models)
    basis = build_default_basis()
    report: dict = {}
    if reg.recognizer is not None:
        metrics = evaluate(reg.recognizer, sequences)
        report["recognition"] = metrics.to_dict()
        print(f"recognition accuracy {metrics.accuracy:.4f}  macro F1 "
              f"{metrics.macro_f1:.4f}")
    for cls in reg.classes:
        clips = [s for s in sequences if s.pose_class == cls]
        if not clips:
            continue
        if clips[0].num_angles != 9:
            clips = [to_correction_space(s, basis) for s in clips]
        m = forecaster_mse(reg.correctors[cls], clips)
        report.setdefault("forecast_mse", {})[cls] = m
        print(f"forecast MSE [{cls}]: {m:.6f}")
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=1) + "\n")
    return 0


def _parse_injection(text: str, angle_names: list[str], profile):
    token, _, mag = text.partition(":")
    matches = [j for j, n in enumerate(angle_names) if token in n]
    if not matches:
        raise ValueError(f"--inject {text!r}: no angle matches {token!r}; "
                         f"angles are {angle_names}")
    if not mag:
        raise ValueError(f"--inject {text!r}: missing magnitude "
                         f"(e.g. knee:3sigma or knee:0.2rad)")
    def magnitude(j: int) -> float:
        if mag.endswith("sigma"):
            return float(mag[:-5]) * profile.per_angle_std[j] * np.pi
        if mag.endswith("deg"):
            return float(mag[:-3]) * np.pi / 180.0
        return float(mag[:-3]) if mag.endswith("rad") else float(mag)
    return [(j, magnitude(j)) for j in matches]


def cmd_correct(args) -> int:
    seq = load_angle_sequence(args.angles)
    reg = ModelRegistry.load(args.models)
    basis = build_default_basis()
    cls = args.pose_class
    if cls is None:
        if reg.recognizer is None:
            raise ValueError("no recognizer in the registry; pass --pose-class")
        cls, _probs = classify(seq, reg.recognizer)
        print(f"recognized pose: {cls}")
    model, profile = reg.corrector_for(cls)
    reduced = seq if seq.num_angles == 9 else to_correction_space(seq, basis)
    if reduced.pose_class is None:
        reduced = PoseSequence(values=reduced.values, times=reduced.times,
                               pose_class=cls, subject_id=reduced.subject_id,
                               fps=reduced.fps, sequence_id=reduced.sequence_id,
                               basis_id=reduced.basis_id)
    if args.inject:
        names = model.config["angle_names"]
        sites = injection_sites(len(reduced), model.config["context"])
        for j, mag in _parse_injection(args.inject, names, profile):
            reduced = inject_deviation(reduced, j, mag, sites)
            print(f"injected {mag:.4f} rad into {names[j]} at frames "
                  f"{sites.tolist()}")
    report = flag_and_correct(model, profile, reduced)
    print(f"frames {len(report.frames)}, flagged angle-points "
          f"{report.flagged_count}, worst angle {report.worst_angle}")
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(report.to_dict(), indent=1) + "\n")
    if args.plot_csv:
        report.write_plot_csv(args.plot_csv)
    return 0


def cmd_quantize(args) -> int:
    reg = ModelRegistry.load(args.models)
    out = Path(args.out)
    qreg = ModelRegistry(profiles=dict(reg.profiles))
    if reg.recognizer is not None:
        qreg.recognizer = quantize_model(reg.recognizer)
    for cls, model in reg.correctors.items():
        qreg.correctors[cls] = quantize_model(model)
    qreg.save(out)
    _snapshot(args, out)
    print(f"quantized registry -> {out}")
    if args.data:
        sequences = _load_dataset(args.data)
        basis = build_default_basis()
        if reg.recognizer is not None:
            d = accuracy_delta(reg.recognizer, qreg.recognizer, sequences)
            print(f"recognizer accuracy {d['before']:.4f} -> {d['after']:.4f} "
                  f"(drop {d['delta_points']:.2f} points)")
        for cls in reg.classes:
            clips = [s for s in sequences if s.pose_class == cls]
            if not clips:
                continue
            if clips[0].num_angles != 9:
                clips = [to_correction_space(s, basis) for s in clips]
            d = accuracy_delta(reg.correctors[cls], qreg.correctors[cls], clips)
            print(f"forecaster[{cls}] MSE {d['before']:.6f} -> "
                  f"{d['after']:.6f} (x{d['ratio']:.3f})")
    return 0


def cmd_bench(args) -> int:
    reg = ModelRegistry.load(args.models)
    results = {}
    if reg.recognizer is not None:
        shape = (1, reg.recognizer.config["k"], reg.recognizer.input_dim)
        results["recognizer"] = bench(reg.recognizer, shape, args.iterations)
    for cls, model in reg.correctors.items():
        shape = (1, model.config["context"], model.input_dim)
        results[f"corrector_{cls}"] = bench(model, shape, args.iterations)
        break  # correctors share an architecture; one is representative
    for name, r in results.items():
        print(f"{name}: {r['throughput_per_s']:.1f} inferences/s "
              f"(mean {r['mean_latency_s']*1e3:.2f} ms, "
              f"p95 {r['p95_latency_s']*1e3:.2f} ms)")
    if args.out:
        Path(args.out).write_text(json.dumps(results, indent=1) + "\n")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import SessionService, create_app
    reg = ModelRegistry.load(args.models)
    service = SessionService(reg, log_dir=args.log_dir)
    app = create_app(service)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="formcoach",
        description="Exercise-pose recognition and correction pipeline")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=fn)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads where supported (default 1, "
                            "which also guarantees determinism)")
        return p

    p = add("synth", cmd_synth, "generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=["angles", "keypoints"], default="angles")
    p.add_argument("--classes", type=int, default=6)
    p.add_argument("--per-class", type=int, default=40)
    p.add_argument("--frames-mean", type=int, default=60)
    p.add_argument("--frames-jitter", type=int, default=8)
    p.add_argument("--num-angles", type=int, default=680)
    p.add_argument("--noise-std", type=float, default=0.0)
    p.add_argument("--offset-spread", type=float, default=2 * np.pi)

    p = add("extract", cmd_extract, "keypoint JSONL -> angle CSV")
    p.add_argument("--keypoints", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pose-class", default=None)
    p.add_argument("--subject", default=None)
    p.add_argument("--fps", type=float, default=DEFAULT_FPS)

    p = add("keyframes", cmd_keyframes, "aggregated deviation + key frames")
    p.add_argument("--angles", required=True)
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--out", default=None, help="CSV of t,E,selected")

    p = add("standardize", cmd_standardize, "equalize clip lengths per class")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pose-class", default=None)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)

    p = add("train-recognizer", cmd_train_recognizer, "fit the classifier")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", type=float, default=0.8)
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--hidden", type=int, default=128)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--noise-copies", type=int, default=2)
    p.add_argument("--noise-scale", type=float, default=0.1)
    p.add_argument("--no-attention", action="store_true")

    p = add("train-corrector", cmd_train_corrector, "fit per-class forecasters")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pose-class", action="append", default=None,
                   help="restrict to a class (repeatable); default all")
    p.add_argument("--context", type=int, default=10)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=3e-3)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--profile-frac", type=float, default=0.2,
                   help="fraction of clips held out for the residual profile")

    p = add("evaluate", cmd_evaluate, "metrics report on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--out", default=None)

    p = add("correct", cmd_correct, "correction report for one clip")
    p.add_argument("--angles", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--pose-class", default=None)
    p.add_argument("--inject", default=None,
                   help="perturb an angle first, e.g. knee:3sigma or "
                        "elbow:10deg")
    p.add_argument("--out", default=None, help="report JSON path")
    p.add_argument("--plot-csv", default=None)

    p = add("quantize", cmd_quantize, "INT8-quantize a model registry")
    p.add_argument("--models", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--data", default=None,
                   help="dataset for before/after metrics")

    p = add("bench", cmd_bench, "inference throughput")
    p.add_argument("--models", required=True)
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--out", default=None)

    p = add("serve", cmd_serve, "run the session service")
    p.add_argument("--models", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--log-dir", default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
