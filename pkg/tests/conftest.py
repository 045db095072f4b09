import numpy as np
import pytest

from lowlight_har.frame_store import save_clip, save_mask
from lowlight_har.synthgen import gen_dataset

ACCEPTANCE_RESULTS = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """2 classes x 3 short clips written to disk, plus their gt masks."""
    root = tmp_path_factory.mktemp("small")
    data = gen_dataset(["wave", "bend"], per_class=3, base_seed=1, frames=12)
    for clip, masks in data:
        save_clip(clip, root / clip.id)
        for name, m in zip(clip.names, masks):
            (root / "gt" / clip.id).mkdir(parents=True, exist_ok=True)
            save_mask(m, root / "gt" / clip.id / name)
    return root


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
