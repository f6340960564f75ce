"""Trial corpus construction: registry XML -> serialized, scrubbed, labeled texts.

A trial record is flattened to one "tag-path: text" line per XML leaf field,
in document order. Outcome-revealing content (overall status, termination
reason, explicit success/failure words) is scrubbed before anything downstream
sees the text.
"""

from __future__ import annotations

import csv
import json
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

logger = logging.getLogger(__name__)


class CorpusError(Exception):
    """Base class for corpus construction failures."""


class MalformedXml(CorpusError):
    pass


class MissingTrialId(CorpusError):
    pass


class BadLabelValue(CorpusError):
    pass


class DuplicateTrialId(CorpusError):
    pass


class EmptyCorpus(CorpusError):
    pass


# Tag names whose content leaks the outcome label. "why_stopped" is the
# registry spelling; "why_stop" is accepted as an alias.
LEAKY_TAGS = frozenset({"overall_status", "why_stop", "why_stopped"})

# Whole words removed from synthetic texts (LLMs hallucinate label terms).
LABEL_WORDS = ("successful", "success", "failed", "failure")

_LABEL_WORD_RE = re.compile(r"\b(?:" + "|".join(LABEL_WORDS) + r")\b", re.IGNORECASE)
_SERIALIZED_LINE_RE = re.compile(r"^([A-Za-z0-9_./-]+):\s")
_WS_RUN_RE = re.compile(r"[ \t]+")


def canonical_name(name: str) -> str:
    """Lowercase, trim, and collapse internal whitespace."""
    return " ".join(name.split()).lower()


@dataclass(frozen=True)
class TrialRecord:
    """One parsed registry record."""

    trial_id: str
    raw_xml: str
    fields: tuple[tuple[str, str], ...]
    intervention_names: tuple[str, ...]
    overall_status: str | None = None
    why_stop: str | None = None


@dataclass(frozen=True)
class LabeledTrial:
    """A trial with its serialized scrubbed text and binary outcome."""

    record: TrialRecord
    text: str
    label: int

    @property
    def trial_id(self) -> str:
        return self.record.trial_id

    @property
    def intervention_names(self) -> tuple[str, ...]:
        return self.record.intervention_names


@dataclass
class LabeledCorpus:
    trials: list[LabeledTrial]
    id_index: dict[str, int] = field(init=False)

    def __post_init__(self) -> None:
        index: dict[str, int] = {}
        for pos, trial in enumerate(self.trials):
            if trial.trial_id in index:
                raise DuplicateTrialId(f"duplicate trial_id {trial.trial_id!r} in corpus")
            index[trial.trial_id] = pos
        self.id_index = index

    def __len__(self) -> int:
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)

    def get(self, trial_id: str) -> LabeledTrial:
        return self.trials[self.id_index[trial_id]]


def _clean_text(value: str | None) -> str:
    # Collapse all whitespace (incl. newlines) so every field stays a single line
    return " ".join(value.split()) if value else ""


def _walk_leaves(elem: ET.Element, prefix: str, out: list[tuple[str, str]]) -> None:
    for child in elem:
        path = f"{prefix}/{child.tag}" if prefix else child.tag
        if len(child):
            _walk_leaves(child, path, out)
        else:
            text = _clean_text(child.text)
            if text:
                out.append((path, text))


def parse_trial_xml(xml_text: str) -> TrialRecord:
    """Parse one registry XML document into a TrialRecord.

    The trial id is taken from the first nct_id element (id_info/nct_id in
    registry exports). Intervention names are canonicalized and deduplicated
    in document order.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise MalformedXml(f"unparseable XML: {exc}") from exc

    trial_id = None
    for tag in ("id_info/nct_id", ".//nct_id", ".//trial_id"):
        node = root.find(tag)
        if node is not None and node.text and node.text.strip():
            trial_id = node.text.strip()
            break
    if trial_id is None:
        raise MissingTrialId("no registry-id element (nct_id) found")

    fields: list[tuple[str, str]] = []
    _walk_leaves(root, "", fields)

    names: list[str] = []
    seen: set[str] = set()
    for node in root.iter("intervention_name"):
        name = canonical_name(node.text or "")
        if name and name not in seen:
            seen.add(name)
            names.append(name)

    status = root.findtext(".//overall_status")
    why = root.findtext(".//why_stopped") or root.findtext(".//why_stop")

    return TrialRecord(
        trial_id=trial_id,
        raw_xml=xml_text,
        fields=tuple(fields),
        intervention_names=tuple(names),
        overall_status=_clean_text(status) or None,
        why_stop=_clean_text(why) or None,
    )


def serialize_trial(record: TrialRecord) -> str:
    """Flatten a record to "tag-path: text" lines in document order."""
    return "".join(f"{path}: {text}\n" for path, text in record.fields)


def _is_leaky_line(line: str) -> bool:
    match = _SERIALIZED_LINE_RE.match(line)
    if not match:
        return False
    return match.group(1).rsplit("/", 1)[-1] in LEAKY_TAGS


def scrub_leakage(text: str, mode: str = "real") -> str:
    """Remove label-leaking content from trial text.

    mode="real" drops serialized lines whose tag is overall_status / why_stop.
    mode="synthetic" additionally removes the whole words "successful",
    "success", "failed", "failure" (case-insensitive) and normalizes the
    horizontal whitespace left behind. Both modes are idempotent.
    """
    if mode not in ("real", "synthetic"):
        raise ValueError(f"unknown scrub mode {mode!r}")
    had_trailing_newline = text.endswith("\n")
    if mode == "synthetic":
        # normalize before the line check so stripping can't expose a leaky
        # line that only the next pass would catch
        lines = []
        for line in text.split("\n"):
            line = _LABEL_WORD_RE.sub("", line)
            line = _WS_RUN_RE.sub(" ", line).strip()
            if _is_leaky_line(line):
                continue
            lines.append(line)
    else:
        lines = [line for line in text.split("\n") if not _is_leaky_line(line)]
    out = "\n".join(lines)
    if had_trailing_newline and out and not out.endswith("\n"):
        out += "\n"
    return out


def load_labels(label_file: str | Path) -> dict[str, int]:
    """Read the outcome-label CSV (header: trial_id,label) into a map."""
    labels: dict[str, int] = {}
    with open(label_file, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["trial_id", "label"]:
            raise BadLabelValue(f"expected header 'trial_id,label', got {header!r}")
        for row in reader:
            if not row or not "".join(row).strip():
                continue
            trial_id = row[0].strip()
            raw = row[1].strip() if len(row) > 1 else ""
            if raw not in ("0", "1"):
                raise BadLabelValue(f"label for {trial_id!r} must be 0 or 1, got {raw!r}")
            if trial_id in labels:
                raise DuplicateTrialId(f"trial_id {trial_id!r} listed twice in label file")
            labels[trial_id] = int(raw)
    return labels


def build_labeled_corpus(records: Iterable[TrialRecord], labels: dict[str, int]) -> LabeledCorpus:
    """Join parsed records with labels; serialize and scrub each retained trial."""
    trials = []
    for record in records:
        label = labels.get(record.trial_id)
        if label is None:
            continue
        text = scrub_leakage(serialize_trial(record), mode="real")
        trials.append(LabeledTrial(record=record, text=text, label=label))
    if not trials:
        raise EmptyCorpus("no record matched any labeled trial_id")
    return LabeledCorpus(trials=trials)


def write_corpus_jsonl(corpus: LabeledCorpus, path: str | Path) -> None:
    """Write the corpus interchange file: one JSON object per trial."""
    with open(path, "w", encoding="utf-8") as handle:
        for trial in corpus:
            obj = {
                "trial_id": trial.trial_id,
                "text": trial.text,
                "label": trial.label,
                "interventions": list(trial.intervention_names),
            }
            handle.write(json.dumps(obj, ensure_ascii=False))
            handle.write("\n")


def load_corpus_jsonl(path: str | Path) -> LabeledCorpus:
    """Load a corpus interchange file written by write_corpus_jsonl.

    Raw XML and per-field structure are not retained in the interchange
    format; reloaded records carry only id, interventions, and text.
    """
    trials = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            record = TrialRecord(
                trial_id=obj["trial_id"],
                raw_xml="",
                fields=(),
                intervention_names=tuple(obj.get("interventions", ())),
            )
            trials.append(LabeledTrial(record=record, text=obj["text"], label=int(obj["label"])))
    if not trials:
        raise EmptyCorpus(f"no trials in {path}")
    return LabeledCorpus(trials=trials)
