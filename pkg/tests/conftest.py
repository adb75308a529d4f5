import numpy as np
import pytest

from f2c.env import alphabet
from f2c.pauli import PauliString

LETTERS = "IXYZ"


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)


def random_string(rng, n) -> PauliString:
    return PauliString.from_text(
        "".join(LETTERS[i] for i in rng.integers(0, 4, size=n))
    )


def random_actions(rng, n, count):
    acts = alphabet(n)
    return [acts[i] for i in rng.integers(0, len(acts), size=count)]
