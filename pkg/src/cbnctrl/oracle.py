"""Reference searches and verification suites.

Everything here is written to be slower and more literal than the engine in
`control`, on purpose: these routines re-derive the same answers along an
independent route so the fast paths have something to be checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from math import prod
from typing import Iterable, Iterator, Mapping

import numpy as np

from .cbn import Cbn
from .control import (
    Budget,
    ControlProblem,
    DEFAULT_BUDGET,
    Direction,
    _Space,
    c_star,
    optimal_policy_value,
    usm_adversarial_cbn,
)
from .graph import Dag, INF
from .intervention import (
    CLASS_INF,
    InterventionPair,
    IpClass,
    atomic_policy,
    enumerate_deterministic_tables,
    interventional_prob,
    scope_for_class,
)

BRACKET_TOL = 1e-9

SUITE_NAMES = ("lemma3", "sufficiency", "usm", "extremality")


def iter_subsets(items: Iterable[str]) -> Iterator[tuple[str, ...]]:
    """All subsets, smallest first, lexicographic within a size."""
    pool = tuple(items)
    for size in range(len(pool) + 1):
        yield from combinations(pool, size)


def naive_policy_search(
    cbn: Cbn,
    drivers,
    ip_class: IpClass,
    desired: Mapping[str, int],
    direction: Direction,
    max_combos: int = 250_000,
) -> tuple[float, InterventionPair]:
    """Literal deterministic-policy enumeration via repeated re-inference.

    Builds every policy combination as a full intervened network and asks
    the enumeration engine for the probability; exists purely as a slow
    cross-check for `control.optimal_policy_value`.
    """
    dag = cbn.dag
    driver_list = tuple(sorted(set(drivers), key=dag.index))
    if not driver_list:
        return cbn.marginal_prob(desired), InterventionPair.empty()
    cards = cbn.cards
    table_lists = []
    total = 1
    for d in driver_list:
        scope = scope_for_class(dag, d, ip_class)
        scope_cards = tuple(cards[s] for s in scope)
        count = cards[d] ** prod(scope_cards)
        total *= count
        table_lists.append(list(enumerate_deterministic_tables(d, scope, scope_cards, cards[d])))
    if total > max_combos:
        raise ValueError(f"{total} policy combinations exceed the naive-search cap {max_combos}")
    maximize = direction is Direction.MAX
    best_value = None
    best_pair = None
    for combo in product(*table_lists):
        pair = InterventionPair(combo)
        value = interventional_prob(cbn, pair, desired)
        if best_value is None or (value > best_value if maximize else value < best_value):
            best_value = value
            best_pair = pair
    return best_value, best_pair


def best_over_subsets(
    cbn: Cbn,
    intervenable,
    ip_class: IpClass,
    desired: Mapping[str, int],
    direction: Direction,
    budget: Budget | None = None,
) -> tuple[float, tuple[str, ...], InterventionPair]:
    """Exhaustive optimum over every subset of the intervenable set.

    Subsets are scanned smallest-first, so among ties the smallest (then
    lexicographically earliest) subset is reported.
    """
    budget = budget or DEFAULT_BUDGET
    dag = cbn.dag
    pool = tuple(sorted(set(intervenable), key=dag.index))
    budget.check_set_size(len(pool))
    budget.check_state_space(cbn.state_space_size())
    best = None
    for subset in iter_subsets(pool):
        value, pair = optimal_policy_value(cbn, subset, ip_class, desired, direction, budget)
        if best is None or (value > best[0] if direction is Direction.MAX else value < best[0]):
            best = (value, subset, pair)
    return best


def simplex_grid_rows(card: int, step: float = 0.25) -> tuple[tuple[float, ...], ...]:
    """All distributions over ``card`` values with coordinates on the grid."""
    denom = round(1.0 / step)
    if abs(denom * step - 1.0) > 1e-12 or denom < 1:
        raise ValueError(f"step {step} does not divide 1")
    rows = []
    for combo in product(range(denom + 1), repeat=card):
        if sum(combo) == denom:
            rows.append(tuple(c * step for c in combo))
    return tuple(rows)


def grid_policy_search(
    cbn: Cbn,
    drivers,
    ip_class: IpClass,
    desired: Mapping[str, int],
    direction: Direction,
    step: float = 0.25,
    budget: Budget | None = None,
) -> float:
    """Best value over stochastic policy tables with grid-point rows.

    The grid includes every deterministic table as a vertex, so the result
    can never fall below (above, for Min) the deterministic optimum; the
    point of the search is that it must never beat it either.
    """
    budget = budget or DEFAULT_BUDGET
    dag = cbn.dag
    driver_list = tuple(sorted(set(drivers), key=dag.index))
    if not driver_list:
        return cbn.marginal_prob(desired)
    budget.check_state_space(cbn.state_space_size())

    space = _Space(cbn)
    cards = cbn.cards
    base = np.ones(space.cards)
    for node in space.nodes:
        if node not in driver_list:
            base = base * space.factor(cbn.cpd(node))
    for node, value in desired.items():
        base = base * space.indicator(node, value)
    flat = base.reshape(-1)
    size = flat.shape[0]

    # per-state value of each node, enumerated row-major over the axes
    strides = {}
    acc = 1
    for node in reversed(space.nodes):
        strides[node] = acc
        acc *= cards[node]
    states = np.arange(size)
    value_of = {n: (states // strides[n]) % cards[n] for n in space.nodes}

    metas = []
    total = 1
    for d in driver_list:
        scope = scope_for_class(dag, d, ip_class)
        scope_cards = tuple(cards[s] for s in scope)
        cells = prod(scope_cards)
        rows = np.asarray(simplex_grid_rows(cards[d], step))
        count = len(rows) ** cells
        total *= count
        cell_idx = np.zeros(size, dtype=np.int64)
        for s, c in zip(scope, scope_cards):
            cell_idx = cell_idx * c + value_of[s]
        metas.append((d, cells, len(rows), rows, cell_idx, value_of[d]))
    budget.check_work(total * size)

    chunk = max(1, 2 ** 18 // max(size, 1))
    maximize = direction is Direction.MAX
    best = -np.inf if maximize else np.inf
    combo_strides = []
    acc = 1
    for meta in reversed(metas):
        combo_strides.append(acc)
        acc *= meta[2] ** meta[1]
    combo_strides.reverse()

    start = 0
    while start < total:
        stop = min(start + chunk, total)
        combos = np.arange(start, stop)
        weights = np.broadcast_to(flat, (stop - start, size)).copy()
        for meta, cstride in zip(metas, combo_strides):
            d, cells, n_rows, rows, cell_idx, dvals = meta
            table_idx = (combos // cstride) % (n_rows ** cells)
            digit_strides = n_rows ** np.arange(cells - 1, -1, -1, dtype=np.int64)
            cell_rows = (table_idx[:, None] // digit_strides[None, :]) % n_rows
            row_per_state = cell_rows[:, cell_idx]
            weights *= rows[row_per_state, dvals[None, :]]
        values = weights.sum(axis=1)
        cand = values.max() if maximize else values.min()
        if (cand > best) if maximize else (cand < best):
            best = cand
        start = stop
    return float(best)


def ci_holds(cbn: Cbn, a: str, b: str, z: Iterable[str], tol: float = 1e-9) -> bool:
    """Conditional independence of ``a`` and ``b`` given ``z`` in the
    distribution, checked by enumeration."""
    cards = cbn.cards
    z_list = tuple(z)
    for z_vals in product(*(range(cards[n]) for n in z_list)):
        given = dict(zip(z_list, z_vals))
        pz = cbn.marginal_prob(given)
        if pz == 0.0:
            continue
        for va in range(cards[a]):
            pa = cbn.marginal_prob({a: va, **given}) / pz
            for vb in range(cards[b]):
                pb = cbn.marginal_prob({b: vb, **given}) / pz
                pab = cbn.marginal_prob({a: va, b: vb, **given}) / pz
                if abs(pab - pa * pb) > tol:
                    return False
    return True


def random_dag(rng: np.random.Generator, n_nodes: int, edge_prob: float = 0.4, prefix: str = "v") -> Dag:
    names = [f"{prefix}{i}" for i in range(n_nodes)]
    edges = [
        (names[i], names[j])
        for i in range(n_nodes)
        for j in range(i + 1, n_nodes)
        if rng.random() < edge_prob
    ]
    return Dag(names, edges)


def random_cbn(rng: np.random.Generator, dag: Dag, card: int = 2) -> Cbn:
    """Strictly positive random rows, so no conditioning event degenerates."""
    from .cbn import Cpd

    cards = {n: card for n in dag.nodes}
    cpds = {}
    for node in dag.nodes:
        parents = dag.parents(node)
        parent_cards = tuple(cards[p] for p in parents)
        rows = []
        for _ in range(prod(parent_cards)):
            raw = rng.uniform(0.05, 1.0, card)
            row = raw / raw.sum()
            rows.append(tuple(float(p) for p in row))
        cpds[node] = Cpd(node, parents, parent_cards, tuple(rows))
    return Cbn(dag, cards, cpds)


def random_problem(
    rng: np.random.Generator, n_nodes: int, edge_prob: float = 0.4
) -> tuple[Cbn, tuple[str, ...], tuple[str, ...], dict[str, int]]:
    """A random binary network plus intervenable set, targets and desired
    realization; targets may or may not be intervenable themselves."""
    dag = random_dag(rng, n_nodes, edge_prob)
    cbn = random_cbn(rng, dag)
    nodes = dag.nodes
    n_targets = int(rng.integers(1, 3)) if n_nodes > 1 else 1
    target_idx = sorted(rng.choice(len(nodes), size=min(n_targets, len(nodes)), replace=False))
    targets = tuple(nodes[i] for i in target_idx)
    intervenable = tuple(n for n in nodes if rng.random() < 0.5)
    desired = {t: int(rng.integers(0, cbn.cards[t])) for t in targets}
    return cbn, intervenable, targets, desired


@dataclass(frozen=True)
class SuiteReport:
    name: str
    passed: bool
    details: tuple[str, ...]


def verify_lemma3(
    cbn: Cbn,
    intervenable,
    desired: Mapping[str, int],
    levels: Iterable[int | float] = (1, 2, INF),
    budget: Budget | None = None,
) -> SuiteReport:
    """The un-intervened probability sits inside [best-min, best-max] for
    every intervened subset, at every requested class level >= 1.

    Level 0 is refused: an unconditional policy cannot reproduce the table
    it replaces, so the bracket can genuinely fail there.
    """
    budget = budget or DEFAULT_BUDGET
    level_list = tuple(levels)
    for level in level_list:
        if level != INF and (not isinstance(level, int) or level < 1):
            raise ValueError(f"bracket levels must be >= 1 or inf, got {level!r}")
    dag = cbn.dag
    pool = tuple(sorted(set(intervenable), key=dag.index))
    budget.check_set_size(len(pool))
    baseline = cbn.marginal_prob(desired)
    failures: list[str] = []
    checked = 0
    for subset in iter_subsets(pool):
        for level in level_list:
            cls = IpClass(level)
            high, _ = optimal_policy_value(cbn, subset, cls, desired, Direction.MAX, budget)
            low, _ = optimal_policy_value(cbn, subset, cls, desired, Direction.MIN, budget)
            checked += 1
            if not (low <= baseline + BRACKET_TOL and baseline <= high + BRACKET_TOL):
                failures.append(
                    f"subset={{{' '.join(subset)}}} {cls}: "
                    f"min={low:.9f} baseline={baseline:.9f} max={high:.9f}"
                )
    details = [f"baseline probability {baseline:.9f}", f"brackets checked: {checked}"]
    details.extend(failures)
    return SuiteReport("lemma3", not failures, tuple(details))


def verify_sufficiency(
    cbn: Cbn,
    intervenable,
    targets,
    desired: Mapping[str, int],
    budget: Budget | None = None,
) -> SuiteReport:
    """The backward-chaining driver set matches the exhaustive-subset
    optimum under full-ancestry policies, in both directions."""
    budget = budget or DEFAULT_BUDGET
    dag = cbn.dag
    target_list = tuple(targets)
    problem = ControlProblem(
        dag,
        tuple(sorted(set(intervenable), key=dag.index)),
        target_list,
        tuple(desired[t] for t in target_list),
    )
    xstar = c_star(problem).members
    details = [f"drivers: {{{' '.join(xstar)}}}"]
    failures: list[str] = []
    for direction in (Direction.MAX, Direction.MIN):
        mine, _ = optimal_policy_value(cbn, xstar, CLASS_INF, desired, direction, budget)
        best_value, best_subset, _ = best_over_subsets(
            cbn, problem.intervenable, CLASS_INF, desired, direction, budget
        )
        details.append(
            f"{direction.value}: drivers {mine:.9f}, exhaustive {best_value:.9f} "
            f"at {{{' '.join(best_subset)}}}"
        )
        if abs(mine - best_value) > BRACKET_TOL:
            failures.append(f"{direction.value}: drivers miss the exhaustive optimum")
    details.extend(failures)
    return SuiteReport("sufficiency", not failures, tuple(details))


def verify_usm(
    dag: Dag,
    intervenable,
    targets,
    budget: Budget | None = None,
) -> SuiteReport:
    """The adversarial parametrization rewards exactly the full driver set:
    forcing all drivers achieves the desired realization surely, and no
    proper subset can reach it at all."""
    budget = budget or DEFAULT_BUDGET
    target_list = tuple(targets)
    pool = tuple(sorted(set(intervenable), key=dag.index))
    problem = ControlProblem(dag, pool, target_list, tuple(1 for _ in target_list))
    xstar = c_star(problem).members
    budget.check_set_size(len(xstar))
    cbn, desired = usm_adversarial_cbn(dag, xstar, target_list)
    failures: list[str] = []
    full = InterventionPair(atomic_policy(d, 1, 2) for d in xstar)
    achieved = interventional_prob(cbn, full, desired)
    if achieved != 1.0:
        failures.append(f"full driver set reaches only {achieved:.9f}")
    subset_count = 0
    for subset in iter_subsets(xstar):
        if len(subset) == len(xstar):
            continue
        value, _ = optimal_policy_value(cbn, subset, CLASS_INF, desired, Direction.MAX, budget)
        subset_count += 1
        if value != 0.0:
            failures.append(f"proper subset {{{' '.join(subset)}}} reaches {value:.9f}")
    details = [
        f"drivers: {{{' '.join(xstar)}}}",
        f"full set: {achieved:.9f}",
        f"proper subsets checked: {subset_count}",
    ]
    details.extend(failures)
    return SuiteReport("usm", not failures, tuple(details))


def verify_extremality(
    cbn: Cbn,
    intervenable,
    targets,
    desired: Mapping[str, int],
    budget: Budget | None = None,
) -> SuiteReport:
    """Stochastic tables on the 0.25 grid never beat the deterministic
    optimum, in either direction, for the identified driver set."""
    budget = budget or DEFAULT_BUDGET
    dag = cbn.dag
    target_list = tuple(targets)
    problem = ControlProblem(
        dag,
        tuple(sorted(set(intervenable), key=dag.index)),
        target_list,
        tuple(desired[t] for t in target_list),
    )
    xstar = c_star(problem).members
    failures: list[str] = []
    details = [f"drivers: {{{' '.join(xstar)}}}"]
    det_max, _ = optimal_policy_value(cbn, xstar, CLASS_INF, desired, Direction.MAX, budget)
    grid_max = grid_policy_search(cbn, xstar, CLASS_INF, desired, Direction.MAX, 0.25, budget)
    details.append(f"max: deterministic {det_max:.9f}, grid {grid_max:.9f}")
    if grid_max > det_max + BRACKET_TOL:
        failures.append("grid search beat the deterministic maximum")
    det_min, _ = optimal_policy_value(cbn, xstar, CLASS_INF, desired, Direction.MIN, budget)
    grid_min = grid_policy_search(cbn, xstar, CLASS_INF, desired, Direction.MIN, 0.25, budget)
    details.append(f"min: deterministic {det_min:.9f}, grid {grid_min:.9f}")
    if grid_min < det_min - BRACKET_TOL:
        failures.append("grid search beat the deterministic minimum")
    details.extend(failures)
    return SuiteReport("extremality", not failures, tuple(details))
