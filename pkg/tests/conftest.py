import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from secure_swipt import ProblemInstance, ScenarioConfig, generate_scenario, solve_instance

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("repo", max_examples=60, deadline=None, derandomize=True)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def default_cfg():
    return ScenarioConfig()


@pytest.fixture(scope="session")
def inst0(default_cfg):
    return ProblemInstance(generate_scenario(default_cfg, 0), default_cfg)


@pytest.fixture(scope="session")
def solved0(inst0):
    return solve_instance(inst0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# ------------------------------------------------------------ acceptance lines

_VERDICTS: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def verdict():
    """Record one sub-check of a numbered criterion for the end-of-run summary."""
    def record(criterion: int, name: str, ok: bool, detail: str) -> bool:
        _VERDICTS.setdefault(criterion, []).append((name, bool(ok), detail))
        return bool(ok)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in sorted(_VERDICTS):
        subs = _VERDICTS[c]
        failed = [name for name, ok, _ in subs if not ok]
        tag = "FAIL" if failed else "PASS"
        head = f"{tag} criterion {c}"
        if failed:
            head += f" (failing: {', '.join(failed)})"
        tr.write_line(head)
        for name, ok, detail in subs:
            tr.write_line(f"    {'ok  ' if ok else 'FAIL'} {name}: {detail}")
