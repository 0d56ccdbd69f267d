import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tagrec.data import SplitSpec
from tagrec.pipeline import prepare
from tagrec.synthetic import planted_preference_events


def write_synthetic_csvs(tmp_path, seed=0, **kwargs):
    events, metadata = planted_preference_events(seed=seed, **kwargs)
    inter = tmp_path / "interactions.csv"
    meta = tmp_path / "metadata.csv"
    inter.write_text(
        "user_id,item_id\n" + "\n".join(f"{u},{i}" for u, i in events) + "\n",
        encoding="utf-8",
    )
    meta.write_text(
        "item_id,category,value\n"
        + "\n".join(f"{i},{c},{v}" for i, c, v in metadata)
        + "\n",
        encoding="utf-8",
    )
    return inter, meta


@pytest.fixture(scope="session")
def synthetic_data(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("synth")
    inter, meta = write_synthetic_csvs(tmp)
    return prepare(inter, meta, split=SplitSpec(seed=0))


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance-criteria checklist after the test summary."""
    lines = sys.modules.get("test_acceptance")
    lines = getattr(lines, "RESULT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
