import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tristat.config import RunConfig  # noqa: E402
from tristat.training import prepare  # noqa: E402

TINY = dict(synthetic_rows=700, lookback=48, horizon=24, d_model=16, heads=2, patch_len=8, stride=4,
            top_k=3, bank_capacity=32, embed_dim=16, max_epochs=2, batch_size=32, codebook_windows=64,
            eval_batch_size=64)


@pytest.fixture(scope="session")
def tiny_cfg():
    return RunConfig(**TINY)


@pytest.fixture(scope="session")
def tiny_prepared(tiny_cfg):
    return prepare(tiny_cfg)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
