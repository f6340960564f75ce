"""Training configuration."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from pathlib import Path

TINY_RANDOM_ENCODER = "tiny-random"


@dataclass
class TrainConfig:
    manifest: Path
    corpus_files: list[Path]
    out_dir: Path
    learning_rate: float = 1e-5
    batch_size: int = 8
    epochs: int = 7
    seed: int = 40
    encoder: str = TINY_RANDOM_ENCODER
    max_length: int = 128
    num_threads: int = 1  # single-threaded CPU keeps runs bit-reproducible

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 1:
            raise ValueError("hyperparameters must be positive")
        self.manifest = Path(self.manifest)
        self.corpus_files = [Path(p) for p in self.corpus_files]
        self.out_dir = Path(self.out_dir)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["manifest"] = str(self.manifest)
        out["corpus_files"] = [str(p) for p in self.corpus_files]
        out["out_dir"] = str(self.out_dir)
        return out
