"""Discrete Bayesian networks over a Dag, with exact inference by enumeration.

Enumeration is deliberately the only inference route: at desk scale it is
the simplest computation that can serve as a trusted reference for every
faster path built on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import prod
from typing import Mapping

from .graph import Dag

ROW_SUM_TOL = 1e-9

Assignment = dict[str, int]


class ZeroProbabilityError(ValueError):
    """Conditioning event has probability zero."""


@dataclass(frozen=True)
class Cpd:
    """Conditional probability table for one node.

    ``rows`` holds one distribution over the owner's values per parent
    configuration, indexed row-major over ``parents`` (last parent varies
    fastest).  Cardinalities are at least two everywhere.
    """

    owner: str
    parents: tuple[str, ...]
    parent_cards: tuple[int, ...]
    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "parent_cards", tuple(int(c) for c in self.parent_cards))
        object.__setattr__(
            self, "rows", tuple(tuple(float(p) for p in row) for row in self.rows)
        )
        if not isinstance(self.owner, str) or not self.owner:
            raise ValueError("cpd owner must be a non-empty string")
        if len(self.parents) != len(set(self.parents)):
            raise ValueError(f"cpd for {self.owner!r} repeats a parent")
        if self.owner in self.parents:
            raise ValueError(f"cpd for {self.owner!r} lists itself as a parent")
        if len(self.parent_cards) != len(self.parents):
            raise ValueError(f"cpd for {self.owner!r}: one cardinality per parent required")
        for name, card in zip(self.parents, self.parent_cards):
            if card < 2:
                raise ValueError(f"cpd for {self.owner!r}: parent {name!r} cardinality {card} < 2")
        expected = prod(self.parent_cards)
        if len(self.rows) != expected:
            raise ValueError(
                f"cpd for {self.owner!r}: {len(self.rows)} rows, expected {expected}"
            )
        if not self.rows:
            raise ValueError(f"cpd for {self.owner!r} has no rows")
        card = len(self.rows[0])
        if card < 2:
            raise ValueError(f"cpd for {self.owner!r}: cardinality {card} < 2")
        for i, row in enumerate(self.rows):
            if len(row) != card:
                raise ValueError(f"cpd for {self.owner!r}: row {i} has length {len(row)} != {card}")
            for p in row:
                if not (0.0 <= p <= 1.0):
                    raise ValueError(f"cpd for {self.owner!r}: row {i} entry {p} outside [0, 1]")
            if abs(sum(row) - 1.0) > ROW_SUM_TOL:
                raise ValueError(
                    f"cpd for {self.owner!r}: row {i} sums to {sum(row)!r}, not 1"
                )

    @property
    def card(self) -> int:
        return len(self.rows[0])

    def row_index(self, assignment: Mapping[str, int]) -> int:
        idx = 0
        for name, card in zip(self.parents, self.parent_cards):
            value = assignment[name]
            if not 0 <= value < card:
                raise ValueError(f"value {value} out of range for {name!r} (card {card})")
            idx = idx * card + value
        return idx

    def prob(self, value: int, assignment: Mapping[str, int]) -> float:
        if not 0 <= value < self.card:
            raise ValueError(f"value {value} out of range for {self.owner!r} (card {self.card})")
        return self.rows[self.row_index(assignment)][value]

    @classmethod
    def delta(cls, owner: str, value: int, card: int) -> "Cpd":
        """Parentless table putting all mass on ``value``."""
        if not 0 <= value < card:
            raise ValueError(f"value {value} out of range for {owner!r} (card {card})")
        row = tuple(1.0 if i == value else 0.0 for i in range(card))
        return cls(owner, (), (), (row,))


class Cbn:
    """A Dag plus per-node cardinalities and CPDs.

    :param dag: network structure.
    :param cards: cardinality (>= 2) for every node.
    :param cpds: one Cpd per node whose parent set matches the dag.
    """

    def __init__(self, dag: Dag, cards: Mapping[str, int], cpds: Mapping[str, Cpd]):
        self._dag = dag
        if set(cards) != set(dag.nodes):
            raise ValueError("cards must cover exactly the dag nodes")
        self._cards = {name: int(cards[name]) for name in dag.nodes}
        for name, card in self._cards.items():
            if card < 2:
                raise ValueError(f"cardinality of {name!r} is {card}, must be >= 2")
        if set(cpds) != set(dag.nodes):
            raise ValueError("cpds must cover exactly the dag nodes")
        self._cpds: dict[str, Cpd] = {}
        for name in dag.nodes:
            cpd = cpds[name]
            if cpd.owner != name:
                raise ValueError(f"cpd stored under {name!r} is owned by {cpd.owner!r}")
            if set(cpd.parents) != set(dag.parents(name)):
                raise ValueError(
                    f"cpd for {name!r} conditions on {list(cpd.parents)}, "
                    f"dag parents are {list(dag.parents(name))}"
                )
            if cpd.card != self._cards[name]:
                raise ValueError(f"cpd for {name!r} has cardinality {cpd.card}, expected {self._cards[name]}")
            for pname, pcard in zip(cpd.parents, cpd.parent_cards):
                if pcard != self._cards[pname]:
                    raise ValueError(
                        f"cpd for {name!r}: parent {pname!r} cardinality {pcard}, expected {self._cards[pname]}"
                    )
            self._cpds[name] = cpd

    @property
    def dag(self) -> Dag:
        return self._dag

    @property
    def cards(self) -> dict[str, int]:
        return dict(self._cards)

    @property
    def cpds(self) -> dict[str, Cpd]:
        return dict(self._cpds)

    def cpd(self, name: str) -> Cpd:
        if name not in self._cpds:
            raise ValueError(f"unknown node {name!r}")
        return self._cpds[name]

    def state_space_size(self) -> int:
        return prod(self._cards.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cbn):
            return NotImplemented
        return (
            self._dag == other._dag
            and self._cards == other._cards
            and self._cpds == other._cpds
        )

    def _check_assignment(self, assignment: Mapping[str, int], *, full: bool) -> None:
        for name, value in assignment.items():
            if name not in self._cards:
                raise ValueError(f"unknown node {name!r} in assignment")
            if not 0 <= value < self._cards[name]:
                raise ValueError(
                    f"value {value} out of range for {name!r} (card {self._cards[name]})"
                )
        if full and len(assignment) != len(self._cards):
            missing = [n for n in self._dag.nodes if n not in assignment]
            raise ValueError(f"full assignment required, missing {missing}")

    def joint_prob(self, assignment: Mapping[str, int]) -> float:
        """Probability of one full assignment: the product of CPD entries."""
        self._check_assignment(assignment, full=True)
        p = 1.0
        for name in self._dag.nodes:
            p *= self._cpds[name].prob(assignment[name], assignment)
        return p

    def marginal_prob(self, event: Mapping[str, int]) -> float:
        """Probability of a partial assignment, by summing over completions."""
        self._check_assignment(event, full=False)
        free = [n for n in self._dag.nodes if n not in event]
        total = 0.0
        scratch = dict(event)
        for values in product(*(range(self._cards[n]) for n in free)):
            for name, value in zip(free, values):
                scratch[name] = value
            total += self.joint_prob(scratch)
        return total

    def conditional_prob(self, event: Mapping[str, int], given: Mapping[str, int]) -> float:
        """P(event | given); raises ZeroProbabilityError when P(given) = 0."""
        overlap = set(event) & set(given)
        if overlap:
            raise ValueError(f"event and given overlap on {sorted(overlap)}")
        self._check_assignment(event, full=False)
        self._check_assignment(given, full=False)
        denom = self.marginal_prob(given)
        if denom == 0.0:
            raise ZeroProbabilityError(f"conditioning event {dict(given)} has probability zero")
        joint = dict(event)
        joint.update(given)
        return self.marginal_prob(joint) / denom
