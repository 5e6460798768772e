"""Joint-angle features from body keypoints.

Every angle is the interior angle at a vertex landmark between the two
vectors pointing from the vertex to the other two landmarks of a triple:

    theta = arccos( x . y / (|x| |y|) )

The full feature basis enumerates all unordered 3-combinations of the
landmark subset (680 triples for the default 17 landmarks). The vertex of
each triple is the middle landmark by canonical index; this rule is
recorded in the basis id so models trained under one rule are never fed
features built under another.

Degenerate triples (an arm vector shorter than ``DEGENERATE_NORM``) yield
NaN, the explicit missing marker, never a silent 0.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .landmarks import LANDMARK_INDEX, LandmarkSubset, default_subset

DEGENERATE_NORM = 1e-9
VERTEX_RULE = "middle-canonical-index"

CANONICAL_BY_INDEX = {i: n for n, i in LANDMARK_INDEX.items()}


@dataclass(frozen=True)
class Keypoint:
    """One named landmark with normalized 3D position and visibility."""

    name: str
    position: np.ndarray  # shape (3,)
    visibility: float = 1.0

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        if pos.shape != (3,):
            raise ValueError(f"position must be a 3-vector, got shape {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ValueError(f"non-finite position for landmark {self.name!r}")
        if not (0.0 <= self.visibility <= 1.0):
            raise ValueError(f"visibility out of [0, 1] for landmark {self.name!r}")
        object.__setattr__(self, "position", pos)


@dataclass(frozen=True)
class KeypointFrame:
    """One timestamped set of landmarks."""

    t: float
    keypoints: dict[str, Keypoint]

    @classmethod
    def from_positions(cls, t: float, positions: dict[str, np.ndarray],
                       visibility: float = 1.0) -> "KeypointFrame":
        return cls(t, {n: Keypoint(n, np.asarray(p, dtype=float), visibility)
                       for n, p in positions.items()})

    def position_array(self, names) -> np.ndarray:
        """Stack positions for the given landmark names into an (n, 3) array."""
        missing = [n for n in names if n not in self.keypoints]
        if missing:
            raise KeyError(f"frame at t={self.t} is missing landmarks: {missing}")
        return np.stack([self.keypoints[n].position for n in names])


@dataclass(frozen=True)
class AngleBasis:
    """Ordered triples (vertex, arm_a, arm_b) defining one angle each."""

    triples: tuple[tuple[str, str, str], ...]
    basis_id: str = field(default="")

    def __post_init__(self):
        for v, a, b in self.triples:
            if len({v, a, b}) != 3:
                raise ValueError(f"triple ({v}, {a}, {b}) has repeated landmarks")
        if not self.basis_id:
            object.__setattr__(self, "basis_id", _basis_id(self.triples))

    def __len__(self) -> int:
        return len(self.triples)

    def landmark_names(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for triple in self.triples:
            for n in triple:
                seen.setdefault(n)
        return tuple(seen)

    def index_of(self, triple: tuple[str, str, str]) -> int:
        """Position of a (vertex, arm_a, arm_b) triple; arms order-insensitive."""
        for i, (v, a, b) in enumerate(self.triples):
            if v == triple[0] and {a, b} == {triple[1], triple[2]}:
                return i
        raise KeyError(f"triple {triple} not in basis")


def _basis_id(triples) -> str:
    payload = VERTEX_RULE + ";" + ";".join(",".join(t) for t in triples)
    return hashlib.sha1(payload.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class AngleVector:
    """Per-frame angle features in radians; NaN marks degenerate entries."""

    values: np.ndarray
    basis_id: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        defined = vals[np.isfinite(vals)]
        if defined.size and (defined.min() < -1e-12 or defined.max() > np.pi + 1e-12):
            raise ValueError("defined angles must lie in [0, pi]")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)


def compute_angle(vertex, arm_a, arm_b) -> float:
    """Interior angle in radians at `vertex` between `arm_a` and `arm_b`.

    Returns NaN when either arm vector is shorter than DEGENERATE_NORM.
    The cosine is clamped to [-1, 1] before arccos.
    """
    vertex = np.asarray(vertex, dtype=float)
    x = np.asarray(arm_a, dtype=float) - vertex
    y = np.asarray(arm_b, dtype=float) - vertex
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx < DEGENERATE_NORM or ny < DEGENERATE_NORM:
        return float("nan")
    cos = np.dot(x, y) / (nx * ny)
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


def build_default_basis(subset: LandmarkSubset | None = None) -> AngleBasis:
    """One angle per unordered landmark triple, vertex = middle canonical index.

    Triples are ordered lexicographically by their sorted canonical indices,
    so the basis layout is deterministic for a given subset.
    """
    subset = subset or default_subset()
    idx = sorted(subset.indices)
    triples = []
    for i, j, k in combinations(idx, 3):
        names = (CANONICAL_BY_INDEX[j], CANONICAL_BY_INDEX[i], CANONICAL_BY_INDEX[k])
        triples.append(names)
    return AngleBasis(tuple(triples))


def extract_features(frame: KeypointFrame, basis: AngleBasis) -> AngleVector:
    """Angle vector for one frame; NaN propagated per degenerate triple."""
    names = basis.landmark_names()
    pos = frame.position_array(names)  # raises naming absent landmarks
    local = {n: i for i, n in enumerate(names)}
    vi = np.fromiter((local[v] for v, _, _ in basis.triples), dtype=int, count=len(basis))
    ai = np.fromiter((local[a] for _, a, _ in basis.triples), dtype=int, count=len(basis))
    bi = np.fromiter((local[b] for _, _, b in basis.triples), dtype=int, count=len(basis))

    x = pos[ai] - pos[vi]
    y = pos[bi] - pos[vi]
    nx = np.linalg.norm(x, axis=1)
    ny = np.linalg.norm(y, axis=1)
    ok = (nx >= DEGENERATE_NORM) & (ny >= DEGENERATE_NORM)
    values = np.full(len(basis), np.nan)
    dot = np.einsum("ij,ij->i", x[ok], y[ok])
    cos = np.clip(dot / (nx[ok] * ny[ok]), -1.0, 1.0)
    values[ok] = np.arccos(cos)
    return AngleVector(values, basis.basis_id)


# Named correction angles, each a fixed landmark triple of the default
# basis. The vertex (middle canonical index, marked as the middle element)
# is the joint the angle is named after, except the neck proxy whose
# vertex is the left shoulder (angle between the nose and the opposite
# shoulder, tracking head-to-shoulder-line alignment).
CORRECTION_ANGLE_NAMES: tuple[str, ...] = (
    "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",
    "left_hip", "right_hip",
    "left_knee", "right_knee",
    "neck",
)

CORRECTION_ANGLE_TRIPLES: dict[str, tuple[str, str, str]] = {
    "left_shoulder": ("left_shoulder", "nose", "left_elbow"),
    "right_shoulder": ("right_shoulder", "nose", "right_elbow"),
    "left_elbow": ("left_elbow", "left_shoulder", "left_wrist"),
    "right_elbow": ("right_elbow", "right_shoulder", "right_wrist"),
    "left_hip": ("left_hip", "left_shoulder", "left_knee"),
    "right_hip": ("right_hip", "right_shoulder", "right_knee"),
    "left_knee": ("left_knee", "left_hip", "left_ankle"),
    "right_knee": ("right_knee", "right_hip", "right_ankle"),
    "neck": ("left_shoulder", "nose", "right_shoulder"),
}


def correction_indices(basis: AngleBasis) -> np.ndarray:
    """Basis positions of the nine named correction angles, in canonical order."""
    return np.array([basis.index_of(CORRECTION_ANGLE_TRIPLES[name])
                     for name in CORRECTION_ANGLE_NAMES])


def reduce_to_correction_angles(v: AngleVector, basis: AngleBasis) -> AngleVector:
    """Select the nine named correction angles out of a full feature vector."""
    if v.basis_id != basis.basis_id:
        raise ValueError("angle vector was built under a different basis")
    if len(v) != len(basis):
        raise ValueError("angle vector length does not match basis")
    return AngleVector(v.values[correction_indices(basis)], basis.basis_id + ":corr9")
