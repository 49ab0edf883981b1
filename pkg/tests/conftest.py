import itertools
import math

import numpy as np
import pytest

from simshap import TabulatedGame, all_coalitions

# worked d=3 game, index order (bit i <-> feature i+1)
WORKED_VALUES = [0.0, 1.0, 2.0, 4.0, 3.0, 5.0, 6.0, 9.0]


@pytest.fixture
def worked_game():
    return TabulatedGame(WORKED_VALUES)


def random_table(d, rng, scale=1.0):
    """Random game: additive part plus pairwise and noise interactions."""
    Z = all_coalitions(d).astype(float)
    w = rng.normal(size=d)
    pair = np.triu(rng.normal(scale=0.3, size=(d, d)), 1)
    values = Z @ w + np.einsum("ni,ij,nj->n", Z, pair, Z) + 0.2 * rng.normal(size=1 << d)
    values[0] = rng.normal()
    return TabulatedGame(scale * values)


def permutation_shapley(game):
    """Independent oracle: average marginal contribution over all orderings."""
    d = game.d
    phi = np.zeros(d)
    perms = list(itertools.permutations(range(d)))
    for order in perms:
        z = np.zeros(d, dtype=np.int8)
        prev = game.boundary.v_empty
        for i in order:
            z[i] = 1
            cur = game.evaluate(z) if z.sum() < d else game.boundary.v_full
            phi[i] += cur - prev
            prev = cur
    return phi / math.factorial(d)


def kkt_oracle(A, q, c):
    """Minimize b'Ab/2 - q'b s.t. 1'b = c through the dense bordered KKT system."""
    d = A.shape[0]
    K = np.zeros((d + 1, d + 1))
    K[:d, :d] = A
    K[:d, d] = 1.0
    K[d, :d] = 1.0
    rhs = np.concatenate([q, [c]])
    return np.linalg.solve(K, rhs)[:d]


# ---- acceptance summary

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion; the test itself asserts afterwards."""

    def record(key, passed, detail=""):
        ACCEPTANCE_RESULTS[key] = (bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")

    def order(key):
        head = key.split(maxsplit=1)[0]
        return (int("".join(ch for ch in head if ch.isdigit())), head)

    for key in sorted(ACCEPTANCE_RESULTS, key=order):
        passed, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {key}: {detail}")
