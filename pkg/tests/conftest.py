"""Shared fixture builders for the test suite."""

from pathlib import Path

import pytest

from trialgen.corpus import LabeledCorpus, LabeledTrial, TrialRecord

FIXTURES = Path(__file__).parent / "fixtures"


def make_trial_xml(
    trial_id: str,
    interventions: tuple[str, ...] = ("aspirin",),
    title: str = "Example Study",
    condition: str = "Hypertension",
    status: str | None = None,
    why_stopped: str | None = None,
    summary: str | None = None,
) -> str:
    parts = [
        "<clinical_study>",
        f"  <id_info><nct_id>{trial_id}</nct_id></id_info>",
        f"  <brief_title>{title}</brief_title>",
    ]
    if status is not None:
        parts.append(f"  <overall_status>{status}</overall_status>")
    if why_stopped is not None:
        parts.append(f"  <why_stopped>{why_stopped}</why_stopped>")
    parts.append(f"  <condition>{condition}</condition>")
    for name in interventions:
        parts.append(
            "  <intervention>"
            f"<intervention_type>Drug</intervention_type>"
            f"<intervention_name>{name}</intervention_name>"
            "</intervention>"
        )
    if summary is not None:
        parts.append(f"  <brief_summary><textblock>{summary}</textblock></brief_summary>")
    parts.append("</clinical_study>")
    return "\n".join(parts)


def make_labeled_trial(
    trial_id: str,
    label: int,
    interventions: tuple[str, ...] = ("aspirin",),
    text: str | None = None,
) -> LabeledTrial:
    record = TrialRecord(
        trial_id=trial_id,
        raw_xml="",
        fields=(),
        intervention_names=tuple(interventions),
    )
    if text is None:
        text = (
            f"brief_title: Study {trial_id}\n"
            f"condition: Hypertension\n"
            + "".join(f"intervention/intervention_name: {n}\n" for n in interventions)
        )
    return LabeledTrial(record=record, text=text, label=label)


def make_eligible_corpus(
    drug: str = "aspirin",
    n_pos: int = 3,
    n_neg: int = 3,
    extra: list[LabeledTrial] | None = None,
) -> LabeledCorpus:
    """Corpus with n_pos successes and n_neg failures for one drug."""
    trials = []
    for i in range(n_pos):
        trials.append(make_labeled_trial(f"NCT{i + 1:08d}", 1, (drug,)))
    for i in range(n_neg):
        trials.append(make_labeled_trial(f"NCT{i + 101:08d}", 0, (drug,)))
    if extra:
        trials.extend(extra)
    return LabeledCorpus(trials=trials)


@pytest.fixture
def eligible_corpus() -> LabeledCorpus:
    return make_eligible_corpus()
