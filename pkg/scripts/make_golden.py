"""Regenerate tests/golden from a fresh run over the shipped sample corpus.

Review the diff before committing: golden files are the reference outputs.
"""

from __future__ import annotations

import shutil
import sys
import tempfile
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent / "tests"))

from conftest import GOLDEN, run_sample_pipeline  # noqa: E402


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        csv_dir = run_sample_pipeline(Path(tmp))
        if GOLDEN.exists():
            shutil.rmtree(GOLDEN)
        GOLDEN.mkdir(parents=True)
        for p in sorted(csv_dir.glob("*.csv")):
            shutil.copy(p, GOLDEN / p.name)
            print(p.name)


if __name__ == "__main__":
    main()
