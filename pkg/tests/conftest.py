"""Shared fixtures and independent label predicates used across test modules."""
from __future__ import annotations

import pytest
from hypothesis import settings

from ppda import reduction

settings.register_profile("det", derandomize=True, deadline=None)
settings.load_profile("det")

SIGMA = ("A", "B", "_")


# Until-operand predicates over label sets, written directly against the
# proposition names so they stay independent of the formula evaluator.
def phi1_left(labels) -> bool:
    if "S" in labels:
        return False
    return not any(f"X({x},{z})" in labels for x in "AB" for z in SIGMA)


def phi1_right(labels) -> bool:
    return any(f"X(A,{z})" in labels for z in SIGMA)


def phi2_left(labels) -> bool:
    if "F" in labels:
        return False
    return not any(f"X({z},{y})" in labels for y in "AB" for z in SIGMA)


def phi2_right(labels) -> bool:
    return any(f"X({z},B)" in labels for z in SIGMA)


@pytest.fixture(scope="session")
def p1() -> reduction.PcpInstance:
    return reduction.PcpInstance((("AB", "A"), ("B", "BB")))


@pytest.fixture(scope="session")
def p1_artifact(p1) -> reduction.ReductionArtifact:
    return reduction.compile_instance(p1)


@pytest.fixture(scope="session")
def unsolvable() -> reduction.PcpInstance:
    return reduction.PcpInstance((("A", "B"),))
