"""End-to-end subcommand tests driven through the CLI entry point."""

import json

import numpy as np
import pytest

from trialgen.cli import main

from conftest import make_trial_xml


@pytest.fixture
def workspace(tmp_path):
    """XML dir + labels + vocab for one eligible drug (3 successes, 3 failures)."""
    xml_dir = tmp_path / "xml"
    xml_dir.mkdir()
    for i in range(3):
        xml_dir.joinpath(f"pos{i}.xml").write_text(
            make_trial_xml(f"NCT{i + 1:08d}", ("aspirin",), title=f"Positive {i}",
                           status="Completed")
        )
        xml_dir.joinpath(f"neg{i}.xml").write_text(
            make_trial_xml(f"NCT{i + 101:08d}", ("aspirin",), title=f"Negative {i}",
                           status="Terminated", why_stopped="futility")
        )
    labels = tmp_path / "labels.csv"
    rows = ["trial_id,label"]
    rows += [f"NCT{i + 1:08d},1" for i in range(3)]
    rows += [f"NCT{i + 101:08d},0" for i in range(3)]
    labels.write_text("\n".join(rows) + "\n")
    vocab = tmp_path / "vocab.txt"
    vocab.write_text("Aspirin\n")
    return tmp_path


def run_cli(*argv) -> int:
    return main([str(a) for a in argv])


REASONS_OK = "1. r1 2. r2 3. r3 4. r4 5. r5"
REPORT_POS = (
    "<clinical_study><intervention_name>aspirin</intervention_name>"
    "<outcome>met primary endpoint</outcome></clinical_study>"
)
REPORT_NEG = (
    "<clinical_study><intervention_name>aspirin</intervention_name>"
    "<outcome>did not meet endpoint</outcome></clinical_study>"
)


def ingest(workspace):
    corpus = workspace / "corpus.jsonl"
    code = run_cli(
        "ingest", "--xml", workspace / "xml", "--labels", workspace / "labels.csv",
        "--out", corpus,
    )
    assert code == 0
    return corpus


class TestIngest:
    def test_line_count(self, workspace):
        corpus = ingest(workspace)
        lines = corpus.read_text().strip().split("\n")
        assert len(lines) == 6

    def test_scrubbed(self, workspace):
        corpus = ingest(workspace)
        assert "overall_status" not in corpus.read_text()

    def test_rerun_byte_identical(self, workspace):
        first = ingest(workspace).read_bytes()
        second = ingest(workspace).read_bytes()
        assert first == second

    def test_zip_archive_input(self, workspace):
        import zipfile

        archive = workspace / "trials.zip"
        with zipfile.ZipFile(archive, "w") as zf:
            for path in sorted((workspace / "xml").glob("*.xml")):
                zf.write(path, path.name)
        out = workspace / "corpus_from_zip.jsonl"
        code = run_cli("ingest", "--xml", archive, "--labels", workspace / "labels.csv",
                       "--out", out)
        assert code == 0
        assert out.read_bytes() == ingest(workspace).read_bytes()


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        main(["bogus"])
    assert excinfo.value.code == 2


class TestRetrieve:
    def test_report(self, workspace):
        corpus = ingest(workspace)
        out = workspace / "eligible.csv"
        code = run_cli("retrieve", "--corpus", corpus, "--vocab", workspace / "vocab.txt",
                       "--out", out)
        assert code == 0
        assert out.read_text() == "intervention,success_count,failure_count\naspirin,3,3\n"

    def test_boundary_excluded(self, workspace):
        corpus = ingest(workspace)
        out = workspace / "eligible.csv"
        code = run_cli("retrieve", "--corpus", corpus, "--vocab", workspace / "vocab.txt",
                       "--out", out, "--min-pos", "4")
        assert code == 0
        assert out.read_text().strip().split("\n") == [
            "intervention,success_count,failure_count"
        ]


class TestGenerate:
    def write_mock(self, workspace, responses):
        fixture = workspace / "mock.json"
        fixture.write_text(json.dumps({"responses": responses}))
        return fixture

    def test_mock_run(self, workspace):
        corpus = ingest(workspace)
        fixture = self.write_mock(
            workspace, [REASONS_OK, REPORT_POS, REASONS_OK, REPORT_NEG]
        )
        out_dir = workspace / "run"
        code = run_cli(
            "generate", "--corpus", corpus, "--vocab", workspace / "vocab.txt",
            "--out-dir", out_dir, "--mock-fixture", fixture, "--total", "2",
            "--seed", "40",
        )
        assert code == 0
        synthetic = (out_dir / "synthetic.jsonl").read_text().strip().split("\n")
        assert len(synthetic) == 2
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["counts"] == {"scheduled": 2, "generated": 2, "failed": 0}
        assert manifest["plan"]["seed"] == 40
        assert all(unit["status"] == "ok" for unit in manifest["units"])

    def test_rerun_byte_identical(self, workspace):
        corpus = ingest(workspace)
        outputs = []
        for name in ("run1", "run2"):
            fixture = self.write_mock(
                workspace, [REASONS_OK, REPORT_POS, REASONS_OK, REPORT_NEG]
            )
            out_dir = workspace / name
            code = run_cli(
                "generate", "--corpus", corpus, "--vocab", workspace / "vocab.txt",
                "--out-dir", out_dir, "--mock-fixture", fixture, "--total", "2",
                "--seed", "40",
            )
            assert code == 0
            outputs.append((out_dir / "synthetic.jsonl").read_bytes())
        assert outputs[0] == outputs[1]

    def test_domain_error_exit_1(self, workspace):
        corpus = ingest(workspace)
        fixture = self.write_mock(workspace, ["1. a 2. b"])  # malformed reasons
        code = run_cli(
            "generate", "--corpus", corpus, "--vocab", workspace / "vocab.txt",
            "--out-dir", workspace / "bad", "--mock-fixture", fixture, "--total", "1",
        )
        assert code == 1


class TestSplit:
    def prepare(self, workspace):
        corpus = ingest(workspace)
        fixture = workspace / "mock.json"
        # alternate-label plan: one reasons response per (intervention, label) pair
        fixture.write_text(
            json.dumps({"responses": [REASONS_OK, REPORT_POS, REASONS_OK, REPORT_NEG]})
        )
        out_dir = workspace / "gen"
        run_cli(
            "generate", "--corpus", corpus, "--vocab", workspace / "vocab.txt",
            "--out-dir", out_dir, "--mock-fixture", fixture, "--total", "2",
            "--seed", "40",
        )
        return corpus, out_dir / "synthetic.jsonl"

    def test_in_distribution_manifests(self, workspace):
        corpus, synthetic = self.prepare(workspace)
        out_dir = workspace / "splits"
        code = run_cli(
            "split", "--corpus", corpus, "--synthetic", synthetic,
            "--kind", "in_distribution", "--seed", "40", "--out-dir", out_dir,
        )
        assert code == 0
        names = sorted(p.name for p in out_dir.glob("*.json"))
        assert names == [
            "in_distribution_hybrid.json",
            "in_distribution_real_only.json",
            "in_distribution_synthetic_only.json",
        ]
        hybrid = json.loads((out_dir / "in_distribution_hybrid.json").read_text())
        assert hybrid["seed"] == 40
        assert hybrid["composition"]["synthetic"] == 2
        train_ids = set(hybrid["train"])
        assert train_ids.isdisjoint(hybrid["val"])
        assert train_ids.isdisjoint(hybrid["test"])

    def test_rerun_byte_identical(self, workspace):
        corpus, synthetic = self.prepare(workspace)
        outputs = []
        for name in ("s1", "s2"):
            out_dir = workspace / name
            code = run_cli(
                "split", "--corpus", corpus, "--synthetic", synthetic,
                "--kind", "ratio", "--seed", "41", "--out-dir", out_dir,
                "--train-size", "2", "--eval-size", "2",
            )
            assert code == 0
            outputs.append((out_dir / "ratio_syn100_real0.json").read_bytes())
        assert outputs[0] == outputs[1]


class TestEvaluate:
    def write_preds(self, path, rows):
        path.write_text("item_id,label,score\n" + "\n".join(rows) + "\n")

    def test_three_seed_aggregate(self, tmp_path):
        files = []
        for seed, scores in zip((40, 41, 42), ([0.9, 0.2], [0.8, 0.3], [0.7, 0.4])):
            path = tmp_path / f"preds_{seed}.csv"
            self.write_preds(path, [f"NCT1,1,{scores[0]}", f"NCT2,0,{scores[1]}"])
            files.append(path)
        out = tmp_path / "report.csv"
        code = run_cli(
            "evaluate", "--pred", *files, "--out", out, "--name", "hybrid",
            "--seeds", "40,41,42",
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 2
        row = lines[1].split(",")
        assert row[0] == "hybrid"
        assert float(row[1]) == pytest.approx(1.0)  # accuracy mean
        assert float(row[2]) == pytest.approx(0.0)  # accuracy std

    def test_domain_error_exit_1(self, tmp_path):
        path = tmp_path / "preds.csv"
        self.write_preds(path, ["NCT1,0,0.1", "NCT2,0,0.2"])  # no positives
        code = run_cli("evaluate", "--pred", path, "--out", tmp_path / "r.csv")
        assert code == 1


class TestAnalyze:
    def write_embeddings(self, path, prefix, n, dim=4, seed=0):
        rng = np.random.RandomState(seed)
        with open(path, "w") as handle:
            for i in range(n):
                vec = rng.randn(dim).tolist()
                handle.write(json.dumps({"id": f"{prefix}{i}", "vector": vec}) + "\n")

    def test_outputs(self, tmp_path):
        real, syn = tmp_path / "real.jsonl", tmp_path / "syn.jsonl"
        self.write_embeddings(real, "NCT", 6, seed=1)
        self.write_embeddings(syn, "SYN", 5, seed=2)
        out_dir = tmp_path / "analysis"
        code = run_cli(
            "analyze", "--real", real, "--synthetic", syn, "--out-dir", out_dir,
            "--pairs", "200", "--bins", "10", "--seed", "0",
        )
        assert code == 0
        for mode in ("real_real", "syn_syn", "real_syn"):
            pairs = (out_dir / f"pairs_{mode}.csv").read_text().strip().split("\n")
            assert len(pairs) == 201
            hist = (out_dir / f"hist_{mode}.csv").read_text().strip().split("\n")
            total = sum(int(line.split(",")[2]) for line in hist[1:])
            assert total == 200

    def test_rerun_byte_identical(self, tmp_path):
        real, syn = tmp_path / "real.jsonl", tmp_path / "syn.jsonl"
        self.write_embeddings(real, "NCT", 5, seed=3)
        self.write_embeddings(syn, "SYN", 5, seed=4)
        outputs = []
        for name in ("a1", "a2"):
            out_dir = tmp_path / name
            run_cli(
                "analyze", "--real", real, "--synthetic", syn, "--out-dir", out_dir,
                "--pairs", "100", "--seed", "9",
            )
            outputs.append((out_dir / "pairs_real_syn.csv").read_bytes())
        assert outputs[0] == outputs[1]
