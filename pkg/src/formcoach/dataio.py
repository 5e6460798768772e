"""Dataset files, manifests, splits, and synthetic motion generation.

On-disk formats:

* Keypoint JSONL: one frame per line,
  ``{"t": seconds, "landmarks": {"name": [x, y, z, visibility], ...}}``;
  3-vectors with an optional separate ``"visibility": {"name": v, ...}``
  map are accepted on read.
* Angle CSV: two comment lines (format tag, metadata), a header row
  ``t,a000,...``, then one row per frame with %.17g floats so values
  round-trip exactly.
* Manifest: JSON listing sequence files with class/subject metadata and
  sha256 checksums.

The synthetic generator stands in for a motion-capture corpus: each class
is a family of per-angle sinusoids, sequences within a class differing by
a shared phase offset, a length jitter, and optional Gaussian noise.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .kinematics import Keypoint, KeypointFrame
from .sequence import PoseSequence

DEFAULT_FPS = 30.0
_ID_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


# ---------------------------------------------------------------- keypoints

def landmark_parts(p, fallback_vis: float = 1.0):
    """Split a landmark entry into (position, visibility).

    Entries are [x, y, z, visibility] or a bare 3-vector whose visibility
    comes from the frame's separate map (fallback_vis). Anything else is
    left for Keypoint's shape check to reject.
    """
    arr = np.asarray(p, dtype=float)
    if arr.shape == (4,):
        return arr[:3], float(arr[3])
    return arr, float(fallback_vis)


def save_keypoints(frames: list[KeypointFrame], path) -> None:
    with open(path, "w") as fh:
        for frame in frames:
            rec = {
                "t": frame.t,
                "landmarks": {name: [*kp.position.tolist(), kp.visibility]
                              for name, kp in frame.keypoints.items()},
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_keypoints(path) -> list[KeypointFrame]:
    frames = []
    last_t = -np.inf
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                t = float(rec["t"])
                vis = rec.get("visibility", {})
                keypoints = {}
                for name, p in rec["landmarks"].items():
                    pos, v = landmark_parts(p, vis.get(name, 1.0))
                    keypoints[name] = Keypoint(name, pos, v)
            except (KeyError, TypeError, ValueError, IndexError,
                    json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed frame: {exc}") from exc
            if t < last_t:
                raise ValueError(f"{path}:{lineno}: timestamp {t} goes backward")
            last_t = t
            frames.append(KeypointFrame(t, keypoints))
    return frames


# --------------------------------------------------------------- angle CSV

def save_angle_sequence(seq: PoseSequence, path) -> None:
    meta = {
        "pose_class": seq.pose_class or "",
        "subject": seq.subject_id or "",
        "fps": "" if seq.fps is None else repr(float(seq.fps)),
        "sequence": seq.sequence_id or "",
        "basis": seq.basis_id or "",
    }
    for key, value in meta.items():
        if value and not _ID_RE.match(value):
            raise ValueError(f"{key}={value!r} has characters unsafe for the "
                             f"metadata line")
    header = ["t"] + [f"a{j:03d}" for j in range(seq.num_angles)]
    data = np.column_stack([seq.times, seq.values])
    with open(path, "w") as fh:
        fh.write("# formcoach-angles v1\n")
        fh.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",")


def load_angle_sequence(path) -> PoseSequence:
    with open(path) as fh:
        tag = fh.readline().strip()
        if tag != "# formcoach-angles v1":
            raise ValueError(f"{path}:1: not an angle CSV (tag {tag!r})")
        meta_line = fh.readline().strip()
        meta = dict(part.split("=", 1)
                    for part in meta_line.lstrip("# ").split(" ") if "=" in part)
        fh.readline()  # column header
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        raise ValueError(f"{path}: no frames")
    return PoseSequence(
        values=data[:, 1:], times=data[:, 0],
        pose_class=meta.get("pose_class") or None,
        subject_id=meta.get("subject") or None,
        fps=float(meta["fps"]) if meta.get("fps") else None,
        sequence_id=meta.get("sequence") or None,
        basis_id=meta.get("basis", ""))


# ---------------------------------------------------------------- manifest

@dataclass(frozen=True)
class ManifestEntry:
    sequence_id: str
    file_path: str           # relative to the manifest's directory
    pose_class: str
    subject_id: str
    camera_angle: str = "front"
    fps: float = DEFAULT_FPS


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry] = field(default_factory=list)
    checksums: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        ids = [e.sequence_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate sequence ids in manifest")
        if self.entries and not all(e.pose_class for e in self.entries):
            raise ValueError("every entry needs a pose class")

    @property
    def classes(self) -> list[str]:
        return sorted({e.pose_class for e in self.entries})

    def save(self, path) -> None:
        doc = {
            "checksums": self.checksums,
            "entries": [vars(e) for e in self.entries],
        }
        Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_manifest(path, verify: bool = True) -> DatasetManifest:
    path = Path(path)
    doc = json.loads(path.read_text())
    manifest = DatasetManifest(
        entries=[ManifestEntry(**e) for e in doc["entries"]],
        checksums=doc.get("checksums", {}))
    root = path.parent
    for entry in manifest.entries:
        fp = root / entry.file_path
        if not fp.exists():
            raise FileNotFoundError(f"manifest references missing file {fp}")
        if verify and entry.file_path in manifest.checksums:
            actual = sha256_file(fp)
            if actual != manifest.checksums[entry.file_path]:
                raise ValueError(f"checksum mismatch for {fp}")
    return manifest


def load_sequences(manifest: DatasetManifest, root) -> list[PoseSequence]:
    root = Path(root)
    return [load_angle_sequence(root / e.file_path) for e in manifest.entries]


# ------------------------------------------------------------------ splits

def split_indices(labels: list[str], ratio: float, seed: int,
                  subjects: list[str] | None = None):
    """Stratified (train, test) index arrays; optionally subject-grouped."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    labels = np.asarray(labels)
    n = len(labels)
    rng = np.random.default_rng(seed)
    if subjects is not None:
        subjects = np.asarray(subjects)
        uniq = sorted(set(subjects.tolist()))
        order = rng.permutation(len(uniq))
        quota = ratio * n
        train_mask = np.zeros(n, dtype=bool)
        taken = 0
        for si in order:
            members = subjects == uniq[si]
            if taken < quota:
                train_mask[members] = True
                taken += int(members.sum())
        if taken == n:  # keep the test side nonempty when >1 subject exists
            last = uniq[order[-1]]
            train_mask[subjects == last] = False
        train = np.where(train_mask)[0]
        test = np.where(~train_mask)[0]
        if len(train) == 0 or len(test) == 0:
            raise ValueError("subject grouping left one side empty")
        return train, test

    train_parts, test_parts = [], []
    for cls in sorted(set(labels.tolist())):
        idx = np.where(labels == cls)[0]
        k = int(round(ratio * len(idx)))
        if k == 0 or k == len(idx):
            raise ValueError(f"class {cls!r} too small to stratify at {ratio}")
        perm = rng.permutation(len(idx))
        train_parts.append(idx[perm[:k]])
        test_parts.append(idx[perm[k:]])
    return (np.sort(np.concatenate(train_parts)),
            np.sort(np.concatenate(test_parts)))


def split(manifest: DatasetManifest, ratio: float, seed: int,
          group_by_subject: bool = False):
    labels = [e.pose_class for e in manifest.entries]
    subjects = [e.subject_id for e in manifest.entries] if group_by_subject else None
    train_idx, test_idx = split_indices(labels, ratio, seed, subjects)
    pick = lambda idx: DatasetManifest(
        entries=[manifest.entries[i] for i in idx],
        checksums={manifest.entries[i].file_path:
                   manifest.checksums[manifest.entries[i].file_path]
                   for i in idx
                   if manifest.entries[i].file_path in manifest.checksums})
    return pick(train_idx), pick(test_idx)


# -------------------------------------------------------------- synthetics

@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for the sinusoid-family stand-in dataset.

    Per class c and angle j the clean trajectory is

        theta(t) = base[c, j] + amp[c, j] * sin(2*pi*freq[c]*t
                                                + phase[c, j] + offset)

    with one phase offset drawn per sequence and shared by all angles, so
    a class is a one-parameter family plus length jitter and noise.
    Explicit parameter arrays override the seeded derivation; they must
    keep base +/- amp inside [0, pi].
    """
    num_classes: int = 6
    sequences_per_class: int = 40
    frames_mean: int = 60
    frames_jitter: int = 8
    num_angles: int = 680
    noise_std: float = 0.0
    seed: int = 0
    fps: float = DEFAULT_FPS
    offset_spread: float = 2 * np.pi  # per-sequence phase offset ~ U[0, spread)
    bases: np.ndarray | None = None   # (classes, angles)
    amps: np.ndarray | None = None    # (classes, angles)
    freqs: np.ndarray | None = None   # (classes,) Hz
    phases: np.ndarray | None = None  # (classes, angles)

    def __post_init__(self):
        if min(self.num_classes, self.sequences_per_class,
               self.frames_mean, self.num_angles) < 1:
            raise ValueError("counts must be positive")
        if self.frames_jitter < 0 or self.noise_std < 0 or self.offset_spread < 0:
            raise ValueError("jitter, noise, and spread must be nonnegative")
        if self.frames_mean - self.frames_jitter < 1:
            raise ValueError("jitter larger than mean length")


def class_params(spec: SyntheticSpec):
    """The class trajectory families a spec implies: bases, amps, freqs,
    phases (explicit arrays pass through; otherwise derived from the seed).

    Exposed so a noisy training set and a clean evaluation set can share
    one family: feed the returned arrays back into another spec.
    """
    bases, amps, freqs, phases, _ = _class_params(spec)
    return bases, amps, freqs, phases


def _class_params(spec: SyntheticSpec):
    rng = np.random.default_rng(spec.seed)
    shape = (spec.num_classes, spec.num_angles)
    bases = spec.bases if spec.bases is not None else rng.uniform(1.0, 2.1, shape)
    if spec.amps is not None:
        amps = spec.amps
    else:
        room = np.minimum(bases, np.pi - bases)
        amps = rng.uniform(0.1, 0.7, shape) * room
    freqs = spec.freqs if spec.freqs is not None else rng.uniform(0.15, 0.45, spec.num_classes)
    phases = spec.phases if spec.phases is not None else rng.uniform(0.0, 2 * np.pi, shape)
    bases = np.broadcast_to(np.asarray(bases, dtype=float), shape)
    amps = np.broadcast_to(np.asarray(amps, dtype=float), shape)
    phases = np.broadcast_to(np.asarray(phases, dtype=float), shape)
    freqs = np.broadcast_to(np.asarray(freqs, dtype=float), (spec.num_classes,))
    if np.any(bases - np.abs(amps) < -1e-12) or np.any(bases + np.abs(amps) > np.pi + 1e-12):
        raise ValueError("base +/- amplitude escapes [0, pi]")
    return bases, amps, freqs, phases, rng


def class_label(c: int) -> str:
    return f"pose_{chr(ord('a') + c)}"


def synth_sequences(spec: SyntheticSpec) -> list[PoseSequence]:
    """Deterministic in-memory dataset; classes labeled pose_a, pose_b, ..."""
    bases, amps, freqs, phases, rng = _class_params(spec)
    out = []
    for c in range(spec.num_classes):
        for s in range(spec.sequences_per_class):
            if spec.frames_jitter:
                T = spec.frames_mean + int(rng.integers(-spec.frames_jitter,
                                                        spec.frames_jitter + 1))
            else:
                T = spec.frames_mean
            offset = rng.uniform(0.0, spec.offset_spread) if spec.offset_spread else 0.0
            times = np.arange(T) / spec.fps
            angle_arg = (2 * np.pi * freqs[c] * times[:, None]
                         + phases[c][None, :] + offset)
            values = bases[c][None, :] + amps[c][None, :] * np.sin(angle_arg)
            if spec.noise_std > 0:
                values = values + rng.normal(0.0, spec.noise_std, values.shape)
            values = np.clip(values, 0.0, np.pi)
            out.append(PoseSequence(
                values=values, times=times, pose_class=class_label(c),
                subject_id=f"subj_{c}_{s:03d}", fps=spec.fps,
                sequence_id=f"{class_label(c)}_{s:03d}"))
    return out


# Rough upright skeleton in meters, x right / y up / z toward camera.
_BASE_SKELETON = {
    "nose": (0.0, 1.62, 0.10),
    "left_shoulder": (0.20, 1.40, 0.0), "right_shoulder": (-0.20, 1.40, 0.0),
    "left_elbow": (0.45, 1.35, 0.02), "right_elbow": (-0.45, 1.35, 0.02),
    "left_wrist": (0.68, 1.32, 0.05), "right_wrist": (-0.68, 1.32, 0.05),
    "left_hip": (0.12, 0.95, 0.0), "right_hip": (-0.12, 0.95, 0.0),
    "left_knee": (0.14, 0.52, 0.02), "right_knee": (-0.14, 0.52, 0.02),
    "left_ankle": (0.15, 0.09, 0.0), "right_ankle": (-0.15, 0.09, 0.0),
    "left_heel": (0.15, 0.03, -0.04), "right_heel": (-0.15, 0.03, -0.04),
    "left_foot_index": (0.16, 0.02, 0.12), "right_foot_index": (-0.16, 0.02, 0.12),
}
# joints that swing during a synthetic movement, with motion amplitude
_MOBILE = {"left_wrist": 0.25, "right_wrist": 0.25, "left_elbow": 0.15,
           "right_elbow": 0.15, "left_knee": 0.08, "right_knee": 0.08,
           "left_ankle": 0.10, "right_ankle": 0.10, "nose": 0.05}


def synth_keypoint_frames(num_frames: int, seed: int = 0,
                          fps: float = DEFAULT_FPS,
                          style: int = 0) -> list[KeypointFrame]:
    """A plausible moving skeleton for exercising the extraction path.

    Mobile joints oscillate around a fixed upright pose; `style` varies
    frequency/axis mixes so different calls look like different movements.
    """
    if num_frames < 1:
        raise ValueError("need at least one frame")
    rng = np.random.default_rng(seed)
    freq = 0.25 + 0.1 * (style % 4)
    axis_mix = rng.uniform(0.2, 1.0, size=(len(_MOBILE), 3))
    phase = rng.uniform(0, 2 * np.pi, size=len(_MOBILE))
    frames = []
    for i in range(num_frames):
        t = i / fps
        pts = {}
        for name, pos in _BASE_SKELETON.items():
            pts[name] = Keypoint(name, np.asarray(pos, dtype=float))
        for m, (name, amp) in enumerate(sorted(_MOBILE.items())):
            base = np.asarray(_BASE_SKELETON[name], dtype=float)
            wob = amp * np.sin(2 * np.pi * freq * t + phase[m]) * axis_mix[m]
            pts[name] = Keypoint(name, base + wob)
        frames.append(KeypointFrame(t, pts))
    return frames


def generate_synthetic(spec: SyntheticSpec, out_dir) -> DatasetManifest:
    """Write the synthetic dataset as angle CSVs plus manifest.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries, checksums = [], {}
    for seq in synth_sequences(spec):
        cls_dir = out_dir / seq.pose_class
        cls_dir.mkdir(exist_ok=True)
        rel = f"{seq.pose_class}/{seq.sequence_id}.csv"
        save_angle_sequence(seq, out_dir / rel)
        entries.append(ManifestEntry(
            sequence_id=seq.sequence_id, file_path=rel,
            pose_class=seq.pose_class, subject_id=seq.subject_id,
            fps=seq.fps))
        checksums[rel] = sha256_file(out_dir / rel)
    manifest = DatasetManifest(entries=entries, checksums=checksums)
    manifest.save(out_dir / "manifest.json")
    return manifest
