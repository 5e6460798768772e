"""Model directory layout: one recognizer, per-class forecasters+profiles.

    <dir>/recognizer.fcm
    <dir>/corrector_<class>.fcm
    <dir>/profile_<class>.json

The service and CLI load a whole directory as a ModelRegistry and treat
it as shared read-only state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .corrector import ResidualProfile
from .neural import SequenceModel, load_model, save_model

RECOGNIZER_FILE = "recognizer.fcm"


@dataclass
class ModelRegistry:
    recognizer: SequenceModel | None = None
    correctors: dict[str, SequenceModel] = field(default_factory=dict)
    profiles: dict[str, ResidualProfile] = field(default_factory=dict)

    @property
    def classes(self) -> list[str]:
        return sorted(self.correctors)

    def corrector_for(self, pose_class: str):
        if pose_class not in self.correctors:
            raise KeyError(f"no corrector trained for class {pose_class!r}; "
                           f"have {self.classes}")
        if pose_class not in self.profiles:
            raise KeyError(f"no residual profile for class {pose_class!r}")
        return self.correctors[pose_class], self.profiles[pose_class]

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        if self.recognizer is not None:
            save_model(self.recognizer, directory / RECOGNIZER_FILE)
        for cls, model in self.correctors.items():
            save_model(model, directory / f"corrector_{cls}.fcm")
        for cls, profile in self.profiles.items():
            (directory / f"profile_{cls}.json").write_text(
                json.dumps(profile.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, directory) -> "ModelRegistry":
        directory = Path(directory)
        if not directory.is_dir():
            raise FileNotFoundError(f"model directory {directory} not found")
        reg = cls()
        rec = directory / RECOGNIZER_FILE
        if rec.exists():
            reg.recognizer = load_model(rec)
        for path in sorted(directory.glob("corrector_*.fcm")):
            label = path.stem[len("corrector_"):]
            reg.correctors[label] = load_model(path)
        for path in sorted(directory.glob("profile_*.json")):
            label = path.stem[len("profile_"):]
            reg.profiles[label] = ResidualProfile.from_dict(
                json.loads(path.read_text()))
        if reg.recognizer is None and not reg.correctors:
            raise ValueError(f"{directory} holds no models")
        return reg
