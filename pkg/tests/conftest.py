import numpy as np
import pytest

from wishartmix import RngStream, SpdMat


def random_spd(dim: int, gen: np.random.Generator, jitter: float = 0.5) -> SpdMat:
    g = gen.standard_normal((dim, dim))
    return SpdMat(g @ g.T / dim + jitter * np.eye(dim))


def random_psd(dim: int, gen: np.random.Generator) -> SpdMat:
    g = gen.standard_normal((dim, dim))
    return SpdMat(g @ g.T / dim)


@pytest.fixture
def gen() -> np.random.Generator:
    return RngStream(20260809).generator()
