import numpy as np
import pytest

from momo.body_model import BodySpec, PartProperties, default_body


@pytest.fixture(scope="session")
def body():
    return default_body()


def make_dumbbell(r=0.3, I=(0.002, 0.002, 0.001)):
    """Two identical parts on the x axis sharing a pivot at the origin."""
    inertia = np.diag(I)
    a = PartProperties(0.5, (-r, 0.0, 1.0), inertia, joint=(0.0, 0.0, 1.0), name="a")
    b = PartProperties(0.5, (r, 0.0, 1.0), inertia, joint=(0.0, 0.0, 1.0), name="b")
    return BodySpec((a, b), (-1, 0))


def make_point_body(centroids, masses=None, parents=None):
    """Parts with (numerically) zero inertia: momentum is purely orbital."""
    centroids = np.asarray(centroids, dtype=float)
    P = len(centroids)
    masses = np.full(P, 1.0 / P) if masses is None else np.asarray(masses, dtype=float)
    parents = [-1] + [0] * (P - 1) if parents is None else parents
    parts = tuple(PartProperties(m, c, np.zeros((3, 3)), name=f"p{i}") for i, (m, c) in enumerate(zip(masses, centroids)))
    return BodySpec(parts, tuple(parents))


@pytest.fixture
def dumbbell():
    return make_dumbbell()


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))


ACCEPTANCE: list[str] = []


def record(criterion: int, title: str, ok: bool, detail: str) -> None:
    """Log one acceptance line; all lines are repeated in the terminal summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {title}: {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
