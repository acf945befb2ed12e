import numpy as np
import pytest

from ldpdist import Graph


def floyd_warshall(g: Graph) -> np.ndarray:
    """Brute-force all-pairs oracle, independent of BFS."""
    n = g.n
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for u, v in g.edges():
        d[u, v] = d[v, u] = 1.0
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(0, i) for i in range(1, n)])


def random_small_graphs(count: int, seed: int, max_n: int = 64):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        gamma = float(rng.uniform(0.0, 0.3))
        iu = np.triu_indices(n, 1)
        keep = rng.random(len(iu[0])) < gamma
        yield Graph.from_edges(n, zip(iu[0][keep].tolist(), iu[1][keep].tolist()))


def within_3se(samples, expected) -> bool:
    samples = np.asarray(samples, dtype=float)
    se = samples.std(ddof=1) / np.sqrt(samples.size)
    return abs(samples.mean() - expected) <= 3 * se


@pytest.fixture
def path3():
    return path_graph(3)


# Acceptance criteria append (name, passed, detail) here; the summary hook
# prints one line per criterion after the run.
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
