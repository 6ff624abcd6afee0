import numpy as np
import pytest
from scipy.sparse import csgraph, csr_matrix

from pacman_ce.engine import load_maze


def random_maze(rng: np.random.Generator, width: int, height: int, wall_frac: float = 0.35):
    """Random maze whose walkable cells form one component (the largest of
    a random wall mask); P and G on two distinct cells of it."""
    while True:
        walls = rng.random((height, width)) < wall_frac
        n = width * height
        idx = np.arange(n).reshape(height, width)
        a, b = [], []
        for y in range(height):
            for x in range(width):
                if walls[y, x]:
                    continue
                if x + 1 < width and not walls[y, x + 1]:
                    a.append(idx[y, x]); b.append(idx[y, x + 1])
                if y + 1 < height and not walls[y + 1, x]:
                    a.append(idx[y, x]); b.append(idx[y + 1, x])
        g = csr_matrix((np.ones(len(a)), (a, b)), shape=(n, n))
        _, labels = csgraph.connected_components(g, directed=False)
        open_cells = np.flatnonzero(~walls.ravel())
        if open_cells.size < 2:
            continue
        big = np.bincount(labels[open_cells]).argmax()
        keep = open_cells[labels[open_cells] == big]
        if keep.size < 2:
            continue
        chars = np.full(n, "#")
        chars[keep] = "."
        p, gh = rng.choice(keep, 2, replace=False)
        chars[p], chars[gh] = "P", "G"
        rows = ["".join(chars[r * width:(r + 1) * width]) for r in range(height)]
        return load_maze("\n".join(rows), "random")


def floyd_warshall_distances(maze):
    """All-pairs step distances on the corridor graph via scipy."""
    n = maze.n_cells
    a, b = [], []
    for c in maze.walkable_cells:
        for nb in maze.neighbors[c]:
            if nb >= 0:
                a.append(c); b.append(nb)
    g = csr_matrix((np.ones(len(a)), (a, b)), shape=(n, n))
    return csgraph.floyd_warshall(g, directed=True, unweighted=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
