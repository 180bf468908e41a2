from __future__ import annotations

import numpy as np
import pytest

from parsimony_threshold import trees

# one pass/fail line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def record_criterion(label: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES.append(f"{status}  {label}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria", sep="=")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cherry_tree() -> trees.WeightedTree:
    return trees.build_tree(trees.Fixed(0.75), 1)


@pytest.fixture(scope="session")
def small_iid_tree() -> trees.WeightedTree:
    return trees.build_tree(trees.IID(trees.Uniform(0.3, 1.0)), 3, seed=17)


@pytest.fixture(scope="session")
def service_client():
    import warnings

    with warnings.catch_warnings():
        # the sandboxed starlette build deprecates its httpx-based test
        # client in favor of a package that is not on the mirror
        warnings.filterwarnings(
            "ignore", message=r"Using `httpx` with `starlette\.testclient`"
        )
        from starlette.testclient import TestClient

    from parsimony_threshold.service import create_app

    return TestClient(create_app(), raise_server_exceptions=False)


def random_irregular_cutset(tree: trees.WeightedTree, seed: int) -> trees.Cutset:
    """A valid irregular cutset by random refinement: start at {root},
    repeatedly replace a random vertex above the last level by its
    children."""
    gen = np.random.Generator(np.random.Philox(key=seed))
    frontier = [0]
    steps = int(gen.integers(1, 2 ** tree.depth_bound))
    for _ in range(steps):
        splittable = [v for v in frontier if trees.level(v) < tree.depth_bound]
        if not splittable:
            break
        v = splittable[int(gen.integers(len(splittable)))]
        frontier.remove(v)
        frontier.extend(trees.children(v))
    return trees.validate_cutset(tree, frontier)
