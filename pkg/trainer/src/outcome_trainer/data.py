"""Resolution of split manifests against corpus JSON-lines files.

The upstream pipeline's interchange formats are the only contract: corpus
rows are {"trial_id", "text", "label", ...} and split manifests are
{"name", "train", "val", "test", ...} with id lists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class DataError(Exception):
    pass


@dataclass(frozen=True)
class Example:
    item_id: str
    text: str
    label: int


def load_text_rows(path: str | Path) -> list[tuple[str, str, int | None]]:
    """Read (id, text, label) rows from a corpus or synthetic JSON-lines file."""
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            label = obj.get("label")
            rows.append((str(obj["trial_id"]), obj["text"], None if label is None else int(label)))
    if not rows:
        raise DataError(f"no rows in {path}")
    return rows


def load_manifest(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as handle:
        manifest = json.load(handle)
    for key in ("train", "val", "test"):
        if key not in manifest:
            raise DataError(f"split manifest {path} is missing {key!r}")
    return manifest


def resolve_split(
    manifest: dict, corpus_files: list[Path]
) -> tuple[list[Example], list[Example], list[Example]]:
    """Materialize the manifest's id lists against the corpus files."""
    by_id: dict[str, tuple[str, int | None]] = {}
    for path in corpus_files:
        for item_id, text, label in load_text_rows(path):
            by_id[item_id] = (text, label)

    def materialize(ids) -> list[Example]:
        examples = []
        for item_id in ids:
            if item_id not in by_id:
                raise DataError(f"id {item_id!r} not found in any corpus file")
            text, label = by_id[item_id]
            if label is None:
                raise DataError(f"id {item_id!r} has no label")
            examples.append(Example(item_id=item_id, text=text, label=label))
        return examples

    return (
        materialize(manifest["train"]),
        materialize(manifest["val"]),
        materialize(manifest["test"]),
    )
