import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from valgraph import Literal, build_model  # noqa: E402
from valgraph.scenarios import builtin_scenario, random_scenario  # noqa: E402
from valgraph.world import tabular_cpt  # noqa: E402


def lit(text):
    return Literal.parse(text)


def chain_model(pa=0.5, pb=(0.9, 0.1), pc=(0.8, 0.2)):
    return build_model({
        "variables": [
            {"name": "A", "cpt": tabular_cpt([], [pa])},
            {"name": "B", "parents": ["A"], "cpt": tabular_cpt(["A"], list(pb))},
            {"name": "C", "parents": ["B"], "cpt": tabular_cpt(["B"], list(pc))},
        ],
        "controllable": ["A"],
    })


def random_models(n, max_k=6):
    """n seeded random scenarios of 1..max_k variables."""
    return [random_scenario(1 + i % max_k, seed=i) for i in range(n)]


@pytest.fixture
def miriam():
    return builtin_scenario("miriam")


@pytest.fixture
def immune():
    return builtin_scenario("immune")


@pytest.fixture
def chain():
    return builtin_scenario("chain")


@pytest.fixture
def generalize():
    return builtin_scenario("generalize")
