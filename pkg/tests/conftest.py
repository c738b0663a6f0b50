from __future__ import annotations

import sys
from pathlib import Path

import pytest

from tweetcascade import cli
from tweetcascade.config import default_config
from tweetcascade.pipeline import Resources

ROOT = Path(__file__).resolve().parents[1]
SAMPLE = ROOT / "sample"
GOLDEN = Path(__file__).resolve().parent / "golden"

sys.path.insert(0, str(Path(__file__).resolve().parent))


@pytest.fixture(scope="session")
def resources() -> Resources:
    return Resources.from_config(default_config(0))


def run_sample_pipeline(out: Path, config: Path = SAMPLE / "config.json") -> Path:
    """Run every stage on the shipped sample corpus; returns the directory of output CSVs."""
    out.mkdir(parents=True, exist_ok=True)
    c = ["--config", str(config)]
    steps = [
        ["ingest", *c, "--input", str(SAMPLE / "archive.jsonl"), "--out", str(out / "corpus.jsonl")],
        ["vote", *c, "--ballots", str(SAMPLE / "ballots.csv"), "--out", str(out / "gold.csv")],
        ["train", *c, "--corpus", str(out / "corpus.jsonl"), "--gold", str(out / "gold.csv"),
         "--out", str(out / "bundle.json")],
        ["evaluate", *c, "--corpus", str(out / "corpus.jsonl"), "--gold", str(out / "gold.csv"),
         "--bundle", str(out / "bundle.json"), "--out", str(out / "evaluation.txt"), "--quiet"],
        ["classify", *c, "--corpus", str(out / "corpus.jsonl"), "--bundle", str(out / "bundle.json"),
         "--out", str(out / "classified.jsonl")],
        ["aggregate", *c, "--classified", str(out / "classified.jsonl"), "--out-dir", str(out / "csv")],
        ["report", *c, "--ballots", str(SAMPLE / "ballots.csv"), "--corpus", str(out / "corpus.jsonl"),
         "--labeler", "2", "--out-dir", str(out / "reports")],
    ]
    for argv in steps:
        code = cli.main(argv)
        assert code == 0, f"{argv[0]} exited {code}"
    (out / "csv" / "gold.csv").write_bytes((out / "gold.csv").read_bytes())
    return out / "csv"


@pytest.fixture(scope="session")
def sample_run(tmp_path_factory) -> Path:
    return run_sample_pipeline(tmp_path_factory.mktemp("sample_run"))


@pytest.fixture(scope="session")
def synthetic_corpus():
    """(corpus, true gold) for 3,000 generated tweets."""
    from tweetcascade.ingest import HashtagSet, ingest_stream
    from tweetcascade.synth import gold_from_truth, synth_archive

    lines, truth = synth_archive(3000, seed=5, noise_lines=False, p_chinese=0.35)
    corpus, _ = ingest_stream(lines, HashtagSet.default())
    return corpus, gold_from_truth(truth)


@pytest.fixture(scope="session")
def trained_bundle(synthetic_corpus, resources):
    from tweetcascade.pipeline import train_bundle

    corpus, gold = synthetic_corpus
    return train_bundle(corpus, gold, resources, default_config(0))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
