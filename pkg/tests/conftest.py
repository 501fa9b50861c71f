"""Shared helpers for the test suite."""

import numpy as np
import pytest


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_complex(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_rank_matrix(rng: np.random.Generator, n: int,
                       rank: int) -> np.ndarray:
    """n x n complex matrix of the requested rank."""
    if rank == 0:
        return np.zeros((n, n), dtype=complex)
    X = random_complex(rng, n, rank)
    Y = random_complex(rng, rank, n)
    return X @ Y


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(20250822)
