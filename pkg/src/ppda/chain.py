"""Lazily-unfolded Markov chains with exact rational transition probabilities.

States are opaque canonical strings: equal strings denote equal states, and
successor lists are kept in lexicographic order of the successor encoding so
that every traversal in the package is deterministic.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from .rationals import require_fraction

ChainState = str

ONE = Fraction(1)


class InvalidPathError(ValueError):
    """A state sequence contains an adjacent pair that is not a transition."""


@dataclass(frozen=True)
class Budget:
    """Exploration limits: how many states may be expanded and how deep."""

    max_states: int
    max_depth: int

    def __post_init__(self) -> None:
        if self.max_states < 1 or self.max_depth < 1:
            raise ValueError("budget limits must be positive")


@dataclass(frozen=True)
class FinitePath:
    states: tuple[ChainState, ...]

    def __post_init__(self) -> None:
        if not self.states:
            raise ValueError("a path has at least one state")


@dataclass(frozen=True)
class Violation:
    state: ChainState
    reason: str


@dataclass(frozen=True)
class ExploreResult:
    settled: frozenset[ChainState]
    frontier: frozenset[ChainState]


class ChainGenerator:
    """A (possibly infinite) Markov chain given by successor and label functions.

    The successor function must be pure; results are cached, normalized to
    Fractions, and sorted by successor encoding. Labeling returns the set of
    atomic propositions holding at a state.
    """

    def __init__(
        self,
        initial: ChainState,
        successors: Callable[[ChainState], Iterable[tuple[ChainState, Fraction]]],
        labels: Callable[[ChainState], Iterable[str]],
    ) -> None:
        self.initial = initial
        self._successors = successors
        self._labels = labels
        self._succ_cache: dict[ChainState, list[tuple[ChainState, Fraction]]] = {}
        self._label_cache: dict[ChainState, frozenset[str]] = {}

    def successors(self, state: ChainState) -> list[tuple[ChainState, Fraction]]:
        cached = self._succ_cache.get(state)
        if cached is None:
            raw = [(t, require_fraction(p)) for t, p in self._successors(state)]
            raw.sort(key=lambda tp: tp[0])
            cached = raw
            self._succ_cache[state] = cached
        return cached

    def labels(self, state: ChainState) -> frozenset[str]:
        cached = self._label_cache.get(state)
        if cached is None:
            cached = frozenset(self._labels(state))
            self._label_cache[state] = cached
        return cached

    def transition_probability(self, src: ChainState, dst: ChainState) -> Fraction | None:
        for t, p in self.successors(src):
            if t == dst:
                return p
        return None


def validate_distribution(gen: ChainGenerator, state: ChainState) -> list[Violation]:
    """Check one state's outgoing distribution; empty list means ok."""
    succ = gen.successors(state)
    out: list[Violation] = []
    if not succ:
        out.append(Violation(state, "no successors (transition relation not total)"))
        return out
    seen: set[ChainState] = set()
    total = Fraction(0)
    for target, prob in succ:
        if target in seen:
            out.append(Violation(state, f"duplicate successor {target!r}"))
        seen.add(target)
        if not 0 < prob <= 1:
            out.append(Violation(state, f"probability {prob} to {target!r} outside (0,1]"))
        total += prob
    if total != 1:
        out.append(Violation(state, f"successor probabilities sum to {total}, not 1"))
    return out


def path_probability(gen: ChainGenerator, path: FinitePath) -> Fraction:
    """Probability of the cylinder of runs extending ``path``.

    The product of transition probabilities along the path; 1 for a
    single-state path.
    """
    prob = ONE
    for src, dst in zip(path.states, path.states[1:]):
        p = gen.transition_probability(src, dst)
        if p is None:
            raise InvalidPathError(f"no transition {src!r} -> {dst!r}")
        prob *= p
    return prob


def explore(gen: ChainGenerator, start: ChainState, budget: Budget) -> ExploreResult:
    """Breadth-first closure from ``start`` under the given limits.

    A discovered state is expanded while fewer than ``max_states`` states
    have been expanded and its depth is below ``max_depth``; everything
    discovered but not expanded is reported as frontier. Deterministic for
    fixed limits, and enlarging limits never removes settled states.
    """
    settled: set[ChainState] = set()
    frontier: set[ChainState] = set()
    depth = {start: 0}
    queue: deque[ChainState] = deque([start])
    while queue:
        state = queue.popleft()
        if depth[state] >= budget.max_depth or len(settled) >= budget.max_states:
            frontier.add(state)
            continue
        settled.add(state)
        for target, _ in gen.successors(state):
            if target not in depth:
                depth[target] = depth[state] + 1
                queue.append(target)
    return ExploreResult(frozenset(settled), frozenset(frontier))
