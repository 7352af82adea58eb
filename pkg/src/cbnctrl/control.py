"""Driver-set identification and exact optimization of intervention policies.

The optimizer searches deterministic policies only.  The probability of any
event is affine in each policy row, so some extreme point of the policy
simplex attains every optimum; forcing one value per scope configuration
loses nothing.  That choice is what keeps exact search tractable at desk
scale, and `oracle.grid_policy_search` exists to double-check it against
stochastic tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import product
from math import prod

import numpy as np

from .cbn import Cbn, Cpd
from .graph import Dag
from .intervention import (
    CLASS_INF,
    InterventionPair,
    IpClass,
    atomic_policy,
    interventional_prob,
    scope_for_class,
    table_from_choices,
)


class Direction(Enum):
    MAX = "max"
    MIN = "min"


class Objective(Enum):
    MIN_MIN = "min-min"
    MAX_MAX = "max-max"
    MIN_MAX = "min-max"
    MAX_MIN = "max-min"

    @classmethod
    def parse(cls, text: str) -> "Objective":
        for member in cls:
            if member.value == text.strip().lower():
                return member
        raise ValueError(f"unknown objective {text!r}")


class Provenance(Enum):
    C_STAR = "c-star"
    EXHAUSTIVE_ORACLE = "exhaustive-oracle"
    SHORTCUT = "shortcut"


class BudgetExceededError(RuntimeError):
    """An exhaustive computation would exceed the configured budget."""

    def __init__(self, message: str, estimate: int | None = None, limit: int | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.limit = limit


@dataclass(frozen=True)
class Budget:
    """Caps for exhaustive searches; exceeding one raises, never subsamples."""

    max_state_space: int = 2 ** 14
    max_set_size: int = 10
    max_work: int = 50_000_000

    def check_state_space(self, size: int) -> None:
        if size > self.max_state_space:
            raise BudgetExceededError(
                f"state space of {size} configurations exceeds the cap of "
                f"{self.max_state_space}",
                estimate=size,
                limit=self.max_state_space,
            )

    def check_set_size(self, size: int) -> None:
        if size > self.max_set_size:
            raise BudgetExceededError(
                f"subset search over {size} candidates exceeds the cap of "
                f"{self.max_set_size}",
                estimate=size,
                limit=self.max_set_size,
            )

    def check_work(self, estimate: int) -> None:
        if estimate > self.max_work:
            raise BudgetExceededError(
                f"estimated {estimate} elementary operations exceed the budget of "
                f"{self.max_work}; raise the budget to at least {estimate} to run this",
                estimate=estimate,
                limit=self.max_work,
            )


DEFAULT_BUDGET = Budget()


@dataclass(frozen=True)
class ControlProblem:
    """What to steer: a structure, who may act, and where to aim.

    ``desired`` holds one value index per entry of ``targets``.
    ``objective`` may be left unset for structural-only queries.
    """

    dag: Dag
    intervenable: tuple[str, ...]
    targets: tuple[str, ...]
    desired: tuple[int, ...]
    objective: Objective | None = None

    def __post_init__(self):
        object.__setattr__(self, "intervenable", tuple(self.intervenable))
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "desired", tuple(int(v) for v in self.desired))
        if not self.targets:
            raise ValueError("targets must be non-empty")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("duplicate target")
        if len(set(self.intervenable)) != len(self.intervenable):
            raise ValueError("duplicate intervenable node")
        for name in self.targets + self.intervenable:
            self.dag.index(name)
        if len(self.desired) != len(self.targets):
            raise ValueError("one desired value per target required")
        for name, value in zip(self.targets, self.desired):
            if value < 0:
                raise ValueError(f"desired value for {name!r} must be non-negative")

    @property
    def desired_map(self) -> dict[str, int]:
        return dict(zip(self.targets, self.desired))


@dataclass(frozen=True)
class DriverSet:
    members: tuple[str, ...]
    provenance: Provenance

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))


@dataclass(frozen=True)
class SolveResult:
    """Drivers plus, when a parametrized network was supplied, the achieved
    probability and the witness policies; ``value`` is None for
    structural-only results."""

    drivers: DriverSet
    value: float | None
    pair: InterventionPair | None


def c_star(problem: ControlProblem) -> DriverSet:
    """Driver set: terminals of backward chaining from the targets into the
    intervenable set."""
    bc = problem.dag.backward_chain(problem.targets, problem.intervenable)
    return DriverSet(bc.terminals, Provenance.C_STAR)


class _Space:
    """Axis bookkeeping for full-joint tensors over a network's nodes."""

    def __init__(self, cbn: Cbn):
        self.nodes = cbn.dag.nodes
        self.axis = {n: i for i, n in enumerate(self.nodes)}
        cards = cbn.cards
        self.cards = tuple(cards[n] for n in self.nodes)
        self.size = prod(self.cards)

    def expand(self, arr: np.ndarray, involved: list[str]) -> np.ndarray:
        """Permute ``arr`` (axes = ``involved``) into global axis order and
        reshape with singleton axes so it broadcasts over the full joint."""
        order = sorted(range(len(involved)), key=lambda i: self.axis[involved[i]])
        arr = np.transpose(arr, order)
        shape = [1] * len(self.nodes)
        for name in involved:
            shape[self.axis[name]] = self.cards[self.axis[name]]
        return arr.reshape(shape)

    def factor(self, cpd: Cpd) -> np.ndarray:
        arr = np.asarray(cpd.rows, dtype=float).reshape(*cpd.parent_cards, cpd.card)
        return self.expand(arr, list(cpd.parents) + [cpd.owner])

    def indicator(self, node: str, value: int) -> np.ndarray:
        card = self.cards[self.axis[node]]
        arr = np.zeros(card)
        arr[value] = 1.0
        return self.expand(arr, [node])


def _check_event(cbn: Cbn, event) -> dict[str, int]:
    cards = cbn.cards
    out: dict[str, int] = {}
    for name, value in event.items():
        if name not in cards:
            raise ValueError(f"unknown node {name!r} in event")
        if not 0 <= value < cards[name]:
            raise ValueError(f"value {value} out of range for {name!r} (card {cards[name]})")
        out[name] = int(value)
    return out


def _decode_choices(idx: int, cells: int, card: int) -> tuple[int, ...]:
    # big-endian digits: increasing idx enumerates choice tuples in
    # lexicographic order
    out = []
    for pos in range(cells - 1, -1, -1):
        out.append((idx // card ** pos) % card)
    return tuple(out)


def _is_deterministic(cbn: Cbn) -> bool:
    for cpd in cbn.cpds.values():
        for row in cpd.rows:
            for p in row:
                if p != 0.0 and p != 1.0:
                    return False
    return True


def _pick_chain(
    drivers: tuple[str, ...],
    scope_sets: dict[str, frozenset],
    table_counts: dict[str, int],
    dag: Dag,
) -> tuple[list[str], list[str]]:
    """Split drivers into (chain, enumerated).

    A valid chain is an ordering d1..dm with scope(di) + {di} contained in
    scope(d(i+1)); those drivers are optimized per scope configuration by
    nested reductions, everything else by explicit table enumeration.  The
    split minimizes the number of enumerated table combinations.
    """
    k = len(drivers)
    scan = range(1 << k) if k <= 12 else []
    best_key = None
    best_chain: list[str] = []
    for mask in scan:
        cand = [drivers[i] for i in range(k) if mask >> i & 1]
        cand.sort(key=lambda d: (len(scope_sets[d]), dag.index(d)))
        ok = True
        for a, b in zip(cand, cand[1:]):
            if not (scope_sets[a] | {a}) <= scope_sets[b]:
                ok = False
                break
        if not ok:
            continue
        outer = prod(table_counts[e] for e in drivers if e not in cand)
        key = (outer, k - len(cand), mask)
        if best_key is None or key < best_key:
            best_key = key
            best_chain = cand
    if best_key is None:
        # scan skipped: fall back to the single most expensive driver
        heaviest = max(drivers, key=lambda d: (table_counts[d], -dag.index(d)))
        best_chain = [heaviest]
    chain_set = set(best_chain)
    enumerated = [d for d in drivers if d not in chain_set]
    return best_chain, enumerated


def optimal_policy_value(
    cbn: Cbn,
    drivers,
    ip_class: IpClass,
    desired,
    direction: Direction,
    budget: Budget | None = None,
) -> tuple[float, InterventionPair]:
    """Best achievable probability of ``desired`` over deterministic
    policies of ``ip_class`` on ``drivers``, with the witness pair.

    Ties are resolved deterministically: candidates are scanned in
    lexicographic choice order and only strict improvements replace the
    incumbent, so repeated runs return the identical witness.
    """
    budget = budget or DEFAULT_BUDGET
    dag = cbn.dag
    driver_list = tuple(sorted(set(drivers), key=dag.index))
    for name in driver_list:
        dag.index(name)
    desired = _check_event(cbn, desired)
    if not desired:
        raise ValueError("desired event must be non-empty")
    if not isinstance(direction, Direction):
        raise ValueError(f"direction must be a Direction, got {direction!r}")
    budget.check_state_space(cbn.state_space_size())

    if not driver_list:
        return cbn.marginal_prob(desired), InterventionPair.empty()

    space = _Space(cbn)
    cards = cbn.cards
    scopes = {d: scope_for_class(dag, d, ip_class) for d in driver_list}
    scope_cards = {d: tuple(cards[s] for s in scopes[d]) for d in driver_list}
    cells = {d: prod(scope_cards[d]) for d in driver_list}
    table_counts = {d: cards[d] ** cells[d] for d in driver_list}

    base = np.ones(space.cards)
    for node in space.nodes:
        if node not in scopes:
            base = base * space.factor(cbn.cpd(node))
    for node, value in desired.items():
        base = base * space.indicator(node, value)

    maximize = direction is Direction.MAX

    if _is_deterministic(cbn):
        # A fully deterministic network realizes exactly one world per
        # forced choice of driver values, so each policy table is read at a
        # single scope configuration and constant tables already span every
        # reachable outcome.
        budget.check_work(prod(cards[d] for d in driver_list) * len(driver_list))
        best_value = None
        best_vector = None
        for vector in product(*(range(cards[d]) for d in driver_list)):
            idx: list = [slice(None)] * len(space.nodes)
            for name, value in zip(driver_list, vector):
                idx[space.axis[name]] = value
            value = float(base[tuple(idx)].sum())
            if best_value is None or (value > best_value if maximize else value < best_value):
                best_value = value
                best_vector = vector
        pair = InterventionPair(
            atomic_policy(d, v, cards[d]) for d, v in zip(driver_list, best_vector)
        )
        return best_value, pair

    scope_sets = {d: frozenset(scopes[d]) for d in driver_list}
    chain, enumerated = _pick_chain(driver_list, scope_sets, table_counts, dag)

    outer_total = prod(table_counts[e] for e in enumerated)
    budget.check_work(outer_total * space.size)

    # reduction order: each chain driver sits right after its scope, so the
    # nested optimum at its axis ranges over tables on exactly that scope
    order: list[str] = []
    kinds: list[str | None] = []  # None = summed chance axis, else the driver
    placed: set[str] = set()
    for d in chain:
        for node in space.nodes:
            if node in scope_sets[d] and node not in placed:
                order.append(node)
                kinds.append(None)
                placed.add(node)
        order.append(d)
        kinds.append(d)
        placed.add(d)
    for node in space.nodes:
        if node not in placed:
            order.append(node)
            kinds.append(None)
    perm = [space.axis[n] for n in order]

    reduce_opt = np.maximum.reduce if maximize else np.minimum.reduce

    def chain_value(tensor: np.ndarray) -> float:
        t = np.transpose(tensor, perm)
        for kind in reversed(kinds):
            t = t.sum(axis=-1) if kind is None else reduce_opt(t, axis=-1)
        return float(t)

    def chain_witness(tensor: np.ndarray) -> dict[str, tuple[int, ...]]:
        t = np.transpose(tensor, perm)
        pick = np.argmax if maximize else np.argmin
        tables: dict[str, tuple[int, ...]] = {}
        for pos in range(len(kinds) - 1, -1, -1):
            kind = kinds[pos]
            if kind is None:
                t = t.sum(axis=-1)
                continue
            choice = pick(t, axis=-1)
            prefix = order[:pos]
            scope_order = scopes[kind]
            perm2 = [prefix.index(s) for s in scope_order]
            arranged = np.transpose(choice, perm2)
            tables[kind] = tuple(int(v) for v in np.asarray(arranged).reshape(-1))
            t = reduce_opt(t, axis=-1)
        return tables

    enum_meta = []
    for e in enumerated:
        eye = np.eye(cards[e])
        enum_meta.append((e, cells[e], cards[e], eye))

    def enum_tensor(meta, choices) -> np.ndarray:
        e, _, card, eye = meta
        arr = eye[np.asarray(choices, dtype=int)]
        if scope_cards[e]:
            arr = arr.reshape(*scope_cards[e], card)
        else:
            arr = arr.reshape(card)
        return space.expand(arr, list(scopes[e]) + [e])

    best_value = None
    best_combo = None
    for combo_idx in product(*(range(table_counts[e]) for e in enumerated)):
        combo = tuple(
            _decode_choices(idx, meta[1], meta[2]) for idx, meta in zip(combo_idx, enum_meta)
        )
        tensor = base
        for meta, choices in zip(enum_meta, combo):
            tensor = tensor * enum_tensor(meta, choices)
        value = chain_value(tensor)
        if best_value is None or (value > best_value if maximize else value < best_value):
            best_value = value
            best_combo = combo

    tensor = base
    for meta, choices in zip(enum_meta, best_combo):
        tensor = tensor * enum_tensor(meta, choices)
    chain_tables = chain_witness(tensor)

    policies = {}
    for e, choices in zip(enumerated, best_combo):
        policies[e] = table_from_choices(e, scopes[e], scope_cards[e], cards[e], choices)
    for d, choices in chain_tables.items():
        policies[d] = table_from_choices(d, scopes[d], scope_cards[d], cards[d], choices)
    pair = InterventionPair(policies[d] for d in driver_list)
    return best_value, pair


def solve(
    problem: ControlProblem, cbn: Cbn | None = None, budget: Budget | None = None
) -> SolveResult:
    """Drivers, value and witness for the problem's objective.

    Structural shortcuts apply where the objective admits them: an
    intervenable target pins the min-min value to zero through one atomic
    policy, and the adversarial objectives are settled by the empty set
    (an opponent with full-ancestry policies on any set can always restore
    the un-intervened probability, and intervening nothing concedes no
    more than that).  Without a Cbn the result is structural-only.
    """
    if problem.objective is None:
        raise ValueError("problem has no objective")
    if cbn is not None:
        if cbn.dag != problem.dag:
            raise ValueError("cbn structure differs from the problem dag")
        desired = problem.desired_map
        _check_event(cbn, desired)

    objective = problem.objective
    if objective is Objective.MAX_MAX:
        ds = c_star(problem)
        if cbn is None:
            return SolveResult(ds, None, None)
        value, pair = optimal_policy_value(
            cbn, ds.members, CLASS_INF, problem.desired_map, Direction.MAX, budget
        )
        return SolveResult(ds, value, pair)

    if objective is Objective.MIN_MIN:
        reachable = [t for t in problem.targets if t in set(problem.intervenable)]
        if reachable:
            target = min(reachable, key=problem.dag.index)
            ds = DriverSet((target,), Provenance.SHORTCUT)
            if cbn is None:
                return SolveResult(ds, None, None)
            desired_value = problem.desired_map[target]
            off_value = 1 if desired_value == 0 else 0
            pair = InterventionPair.of(atomic_policy(target, off_value, cbn.cards[target]))
            value = interventional_prob(cbn, pair, problem.desired_map)
            return SolveResult(ds, value, pair)
        ds = c_star(problem)
        if cbn is None:
            return SolveResult(ds, None, None)
        value, pair = optimal_policy_value(
            cbn, ds.members, CLASS_INF, problem.desired_map, Direction.MIN, budget
        )
        return SolveResult(ds, value, pair)

    # min-max and max-min: the empty intervened set is optimal
    ds = DriverSet((), Provenance.SHORTCUT)
    if cbn is None:
        return SolveResult(ds, None, None)
    return SolveResult(ds, cbn.marginal_prob(problem.desired_map), InterventionPair.empty())


def usm_adversarial_cbn(dag: Dag, drivers, targets) -> tuple[Cbn, dict[str, int]]:
    """A binary parametrization under which ``drivers`` is unique and
    minimal for reaching the desired target realization.

    Driver nodes are pinned to value zero; every driver descendant becomes
    a conjunction of its parents that lie in or below the driver set, with
    all other parents ineffective; remaining nodes are pinned to one.  The
    desired realization puts every target at one, so forcing the full
    driver set to one achieves it surely while any proper subset leaves a
    pinned zero in the way.
    """
    driver_list = tuple(sorted(set(drivers), key=dag.index))
    target_list = tuple(targets)
    if not target_list:
        raise ValueError("targets must be non-empty")
    for name in driver_list + target_list:
        dag.index(name)

    driver_set = set(driver_list)
    downstream: set[str] = set()
    for d in driver_list:
        downstream.update(dag.descendants(d))
    effective = driver_set | downstream

    cpds: dict[str, Cpd] = {}
    cards = {name: 2 for name in dag.nodes}
    for node in dag.nodes:
        parents = dag.parents(node)
        parent_cards = tuple(2 for _ in parents)
        n_rows = prod(parent_cards)
        if node in driver_set:
            rows = tuple((1.0, 0.0) for _ in range(n_rows))
        elif node in downstream:
            gate = [i for i, p in enumerate(parents) if p in effective]
            rows = []
            for config in product(range(2), repeat=len(parents)):
                value = 1 if all(config[i] == 1 for i in gate) else 0
                rows.append((1.0, 0.0) if value == 0 else (0.0, 1.0))
            rows = tuple(rows)
        else:
            rows = tuple((0.0, 1.0) for _ in range(n_rows))
        cpds[node] = Cpd(node, parents, parent_cards, rows)

    desired = {t: 1 for t in target_list}
    return Cbn(dag, cards, cpds), desired
