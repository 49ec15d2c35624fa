"""modelforge test fixtures.

The corpus comes from the detection pipeline's own fixture generator,
invoked through its CLI: the two packages share only files and command
lines, never code. Requires the phishguard package on PATH.
"""

import subprocess
from pathlib import Path

import pytest


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("forge-corpus")
    subprocess.run(
        [
            "phishguard",
            "gen-fixtures",
            "--out", str(root),
            "--pages", "600",
            "--seed", "404",
            "--features",
        ],
        check=True,
        capture_output=True,
    )
    return root


@pytest.fixture(scope="session")
def stage_a(corpus_dir, tmp_path_factory) -> Path:
    from modelforge.training import prepare_stage_a

    marker = tmp_path_factory.mktemp("stage") / "stage_a.json"
    prepare_stage_a(corpus_dir / "features.pgwt", corpus_dir / "manifest.jsonl", marker)
    return marker


@pytest.fixture(scope="session")
def corpus(corpus_dir):
    from modelforge.training import load_corpus

    return load_corpus(corpus_dir / "features.pgwt", corpus_dir / "manifest.jsonl")


# acceptance-criterion lines accumulate here; shown in the run summary so the
# canonical `pytest -v` log always carries one line per criterion
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)
