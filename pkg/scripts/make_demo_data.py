#!/usr/bin/env python3
"""Build a small demo workspace: registry-style XML files, a label CSV, a drug
vocabulary, and a scripted mock-response fixture sized to the demo plan.

Everything is deterministic, so the downstream mock pipeline run is
reproducible byte-for-byte.
"""

from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

DRUGS = ["aspirin", "metformin", "lisinopril"]
# labeled but absent from the vocabulary, so their trials stay out of the
# synthetic intervention list and populate set B for generalization splits
EXTRA_DRUGS = ["ibuprofen", "omeprazole"]
CONDITIONS = ["Hypertension", "Type 2 Diabetes", "Atrial Fibrillation", "Osteoarthritis"]
PHASES = ["Phase 1", "Phase 2", "Phase 3"]


def trial_xml(trial_id: str, drug: str, rng: random.Random, label: int) -> str:
    condition = rng.choice(CONDITIONS)
    phase = rng.choice(PHASES)
    enrollment = rng.randint(40, 900)
    status = "Completed" if label == 1 else "Terminated"
    why = "" if label == 1 else "\n  <why_stopped>insufficient enrollment</why_stopped>"
    return f"""<clinical_study>
  <id_info><nct_id>{trial_id}</nct_id></id_info>
  <brief_title>{drug.title()} in {condition}</brief_title>
  <overall_status>{status}</overall_status>{why}
  <phase>{phase}</phase>
  <condition>{condition}</condition>
  <enrollment>{enrollment}</enrollment>
  <intervention>
    <intervention_type>Drug</intervention_type>
    <intervention_name>{drug}</intervention_name>
  </intervention>
  <eligibility>
    <gender>All</gender>
    <minimum_age>18 Years</minimum_age>
  </eligibility>
</clinical_study>
"""


def synthetic_report(drug: str, label: int, index: int) -> str:
    outcome = (
        "the primary endpoint was met with a favorable safety profile"
        if label == 1
        else "the primary endpoint was not met and enrollment lagged"
    )
    return (
        f"<clinical_study><brief_title>Simulated {drug.title()} Study {index}</brief_title>"
        f"<condition>Hypertension</condition>"
        f"<intervention_name>{drug}</intervention_name>"
        f"<results>{outcome}</results></clinical_study>"
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("demo_data"))
    parser.add_argument("--per-side", type=int, default=5,
                        help="successes and failures per drug (default 5)")
    parser.add_argument("--total-synthetic", type=int, default=6,
                        help="mock responses sized for this many generated trials")
    parser.add_argument("--seed", type=int, default=40)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    xml_dir = args.out / "xml"
    xml_dir.mkdir(parents=True, exist_ok=True)

    label_rows = ["trial_id,label"]
    counter = 1
    for drug in DRUGS + EXTRA_DRUGS:
        for label in (1, 0):
            for _ in range(args.per_side):
                trial_id = f"NCT{counter:08d}"
                counter += 1
                xml_dir.joinpath(f"{trial_id}.xml").write_text(
                    trial_xml(trial_id, drug, rng, label)
                )
                label_rows.append(f"{trial_id},{label}")
    (args.out / "labels.csv").write_text("\n".join(label_rows) + "\n")
    (args.out / "vocab.txt").write_text("\n".join(DRUGS) + "\n")

    # scripted responses in schedule order: round-robin drugs, alternate labels
    responses = []
    seen_pairs = set()
    per_drug = {d: 0 for d in DRUGS}
    for i in range(args.total_synthetic):
        drug = sorted(DRUGS)[i % len(DRUGS)]
        label = 1 if per_drug[drug] % 2 == 0 else 0
        per_drug[drug] += 1
        pair = (drug, label)
        if pair not in seen_pairs:
            seen_pairs.add(pair)
            outcome = "respond favorably" if label == 1 else "discontinue early"
            responses.append(
                " ".join(f"{k}. Reason {k}: participants {outcome} in scenario {k}."
                         for k in range(1, 6))
            )
        responses.append(synthetic_report(drug, label, i + 1))
    (args.out / "mock_responses.json").write_text(
        json.dumps({"responses": responses}, indent=2) + "\n"
    )
    print(f"demo data written under {args.out}/")


if __name__ == "__main__":
    main()
