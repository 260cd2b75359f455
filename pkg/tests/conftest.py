import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from guillotine.tensor import GuillotineTensor, StateSpaces

settings.register_profile(
    "default",
    max_examples=30,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# Lines printed by the acceptance suite, shown in the terminal summary.
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sp22():
    return StateSpaces(2, 2)


def random_tensor(spaces, p, q, rng, low=0.1):
    s1, s2 = spaces.s1, spaces.s2
    if p > 0 and q > 0:
        n = s1 ** (2 * p) * s2 ** (2 * q)
    elif p > 0:
        n = s1**p
    elif q > 0:
        n = s2**q
    else:
        n = 1
    return GuillotineTensor(spaces, (p, q), low + rng.random(n))


def loop_partition(W, p, q):
    """Partition tensor by explicit Python loops over every edge configuration.

    Independent of the package's enumeration engine; only for tiny shapes.
    ``W`` is an ``(s1, s1, s2, s2)`` array.
    """
    s1, s2 = W.shape[0], W.shape[2]
    # Horizontal edge (i, r), vertical edge (c, j).
    H = [(i, r) for r in range(q + 1) for i in range(p)]
    V = [(c, j) for c in range(p + 1) for j in range(q)]
    out = np.zeros((s1**p, s1**p, s2**q, s2**q))
    for hv in itertools.product(range(s1), repeat=len(H)):
        h = dict(zip(H, hv))
        for vv in itertools.product(range(s2), repeat=len(V)):
            v = dict(zip(V, vv))
            val = 1.0
            for j in range(q):
                for i in range(p):
                    val *= W[h[(i, j)], h[(i, j + 1)], v[(i, j)], v[(i + 1, j)]]
            x = sum(h[(i, 0)] * s1 ** (p - 1 - i) for i in range(p))
            y = sum(h[(i, q)] * s1 ** (p - 1 - i) for i in range(p))
            w = sum(v[(0, j)] * s2 ** (q - 1 - j) for j in range(q))
            z = sum(v[(p, j)] * s2 ** (q - 1 - j) for j in range(q))
            out[x, y, w, z] += val
    return out


def rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), np.finfo(float).tiny)))
