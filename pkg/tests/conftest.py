import numpy as np
import pytest
from hypothesis import strategies as st

from beliefcrowd.evidential import Frame, MassFunction, SimpleSupport, combine_conjunctive

LABELS4 = ("a", "b", "c", "d")


def to_sets(m: MassFunction) -> dict:
    return {frozenset(m.frame.labels_of(x)): v for x, v in m.items()}


def from_sets(frame: Frame, d: dict) -> MassFunction:
    return MassFunction(frame, {frame.subset(s): v for s, v in d.items()})


def random_mass(rng: np.random.Generator, frame: Frame, n_focal: int | None = None, allow_empty=False) -> MassFunction:
    lo = 0 if allow_empty else 1
    n_focal = n_focal or int(rng.integers(1, 5))
    focal = rng.choice(np.arange(lo, frame.full + 1), size=min(n_focal, frame.full + 1 - lo), replace=False)
    w = rng.dirichlet(np.ones(len(focal)))
    return MassFunction(frame, {int(x): float(v) for x, v in zip(focal, w)})


def random_separable(rng: np.random.Generator, frame: Frame, n_factors: int = 3) -> MassFunction:
    factors = []
    for _ in range(n_factors):
        focal = int(rng.integers(1, frame.full))
        factors.append(SimpleSupport(frame, focal, float(rng.uniform(0.05, 0.95))).mass())
    return combine_conjunctive(factors)


@st.composite
def masses(draw, frame: Frame, allow_empty=False):
    lo = 0 if allow_empty else 1
    focal = draw(st.lists(st.integers(lo, frame.full), min_size=1, max_size=5, unique=True))
    weights = draw(st.lists(st.floats(0.01, 1.0), min_size=len(focal), max_size=len(focal)))
    total = sum(weights)
    return MassFunction(frame, {x: w / total for x, w in zip(focal, weights)})


@pytest.fixture
def frame3():
    return Frame(("a", "b", "c"))


@pytest.fixture
def frame4():
    return Frame(LABELS4)


@pytest.fixture
def birds():
    return Frame(("crow", "raven", "eagle"))
