import functools

import pytest

from ramtel.hyperterm import parse_term
from ramtel.prover import example_tasks, series_catalog
from ramtel.telescope import find_telescoper

BINOMIAL = "poch(-k,n)*(-1)^n/poch(1,n)"


@functools.lru_cache(maxsize=None)
def telescoper_for(task_id: str, side: str):
    task = example_tasks()[task_id]
    return find_telescoper(task.left if side == "left" else task.right)


@pytest.fixture(scope="session")
def tasks():
    return example_tasks()


@pytest.fixture(scope="session")
def catalog():
    return series_catalog()


@pytest.fixture(scope="session")
def binomial():
    return parse_term(BINOMIAL)


@pytest.fixture(scope="session")
def ex1_telescopers():
    return telescoper_for("1", "left"), telescoper_for("1", "right")
