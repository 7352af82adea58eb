"""Acceptance gate.

Ten self-contained checks, one verdict line each on stdout.  The shared
corpus is one hundred seeded binary networks on at most six nodes; the
adversarial sweep uses its own family of twenty seeded structures on at
most seven.  Every probabilistic comparison is made at 1e-9 unless the
quantity is exact by construction, in which case float equality is
asserted directly.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import pytest

from cbnctrl import (
    CLASS0,
    CLASS1,
    CLASS_INF,
    BudgetExceededError,
    Cbn,
    ControlProblem,
    Dag,
    Direction,
    INF,
    IpClass,
    Objective,
    best_over_subsets,
    c_star,
    ci_holds,
    grid_policy_search,
    optimal_policy_value,
    random_cbn,
    random_dag,
    random_problem,
    solve,
    verify_lemma3,
    verify_sufficiency,
    verify_usm,
)
from cbnctrl.oracle import iter_subsets
from test_cbn import xor_gate
from test_control import screening_chain
from test_graph import junction

TOL = 1e-9
CORPUS_SEED = 41
CORPUS_SIZE = 100


def report(tag: str, ok: bool, detail: str) -> bool:
    verdict = "PASS" if ok else "FAIL"
    print(f"{tag}: {verdict} ({detail})")
    return ok


@dataclass
class Case:
    cbn: Cbn
    intervenable: tuple[str, ...]
    targets: tuple[str, ...]
    desired: dict[str, int]
    drivers: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        bc = self.cbn.dag.backward_chain(self.targets, self.intervenable)
        self.drivers = bc.terminals

    def problem(self, objective: Objective | None = None) -> ControlProblem:
        values = tuple(self.desired[t] for t in self.targets)
        return ControlProblem(
            self.cbn.dag, self.intervenable, self.targets, values, objective
        )


@pytest.fixture(scope="session")
def corpus() -> tuple[Case, ...]:
    rng = np.random.default_rng(CORPUS_SEED)
    cases = []
    while len(cases) < CORPUS_SIZE:
        n = int(rng.integers(2, 7))
        cbn, intervenable, targets, desired = random_problem(rng, n)
        cases.append(Case(cbn, intervenable, targets, desired))
    return tuple(cases)


def test_c01_junction_driver_set():
    problem = ControlProblem(junction(), ("t3", "t4"), ("o",), (1,))
    start = time.perf_counter()
    found = c_star(problem).members
    elapsed = time.perf_counter() - start
    ok = found == ("t3", "t4") and elapsed < 1.0
    assert report("C1 junction driver set", ok, f"drivers {{{' '.join(found)}}}, {elapsed:.3f}s")


def test_c02_gate_policy_class_gap():
    cbn = xor_gate()
    desired = {"o": 1}
    start = time.perf_counter()
    baseline = cbn.marginal_prob(desired)
    flat_best, _ = optimal_policy_value(cbn, ("y",), CLASS0, desired, Direction.MAX)
    wide_best, pair = optimal_policy_value(cbn, ("y",), CLASS1, desired, Direction.MAX)
    elapsed = time.perf_counter() - start
    policy = pair.policy("y")
    witness_negates = policy.scope == ("x",) and policy.table.rows == (
        (0.0, 1.0),
        (1.0, 0.0),
    )
    ok = (
        baseline == 1.0
        and abs(flat_best - 0.7) <= TOL
        and abs(wide_best - 1.0) <= TOL
        and witness_negates
        and elapsed < 1.0
    )
    assert report(
        "C2 gate policy classes",
        ok,
        f"baseline {baseline:.9f}, flat {flat_best:.9f}, responsive {wide_best:.9f}, "
        f"witness negation {witness_negates}, {elapsed:.3f}s",
    )


def test_c03_screening_chain_drivers_suffice():
    cbn = screening_chain()
    desired = {"o": 1}
    pool = ("y2", "y1")
    found = c_star(ControlProblem(cbn.dag, pool, ("o",), (1,))).members
    drv_max, _ = optimal_policy_value(cbn, found, CLASS_INF, desired, Direction.MAX)
    drv_min, _ = optimal_policy_value(cbn, found, CLASS_INF, desired, Direction.MIN)
    all_max, _, _ = best_over_subsets(cbn, pool, CLASS_INF, desired, Direction.MAX)
    all_min, _, _ = best_over_subsets(cbn, pool, CLASS_INF, desired, Direction.MIN)
    ok = (
        found == ("y1",)
        and all_max <= drv_max + TOL
        and all_min >= drv_min - TOL
    )
    assert report(
        "C3 screening chain sufficiency",
        ok,
        f"drivers {{{' '.join(found)}}}, max {drv_max:.9f} vs exhaustive {all_max:.9f}, "
        f"min {drv_min:.9f} vs exhaustive {all_min:.9f}",
    )


def test_c04_corpus_driver_optimality(corpus):
    start = time.perf_counter()
    failures = []
    for idx, case in enumerate(corpus):
        suite = verify_sufficiency(case.cbn, case.intervenable, case.targets, case.desired)
        if not suite.passed:
            failures.append(idx)
    elapsed = time.perf_counter() - start
    ok = len(corpus) >= 100 and not failures and elapsed < 300.0
    assert report(
        "C4 corpus driver optimality",
        ok,
        f"{len(corpus)} networks, failures {failures or 'none'}, {elapsed:.1f}s",
    )


def test_c05_corpus_brackets(corpus):
    start = time.perf_counter()
    failures = []
    checked = 0
    for idx, case in enumerate(corpus):
        suite = verify_lemma3(case.cbn, case.intervenable, case.desired, levels=(1, 2, INF))
        for line in suite.details:
            if line.startswith("brackets checked:"):
                checked += int(line.split(":")[1])
        if not suite.passed:
            failures.append(idx)
    elapsed = time.perf_counter() - start
    ok = not failures and checked > 0 and elapsed < 300.0
    assert report(
        "C5 corpus class brackets",
        ok,
        f"{checked} brackets over {len(corpus)} networks, failures {failures or 'none'}, "
        f"{elapsed:.1f}s",
    )


def test_c06_empty_set_is_adversarial_optimum(corpus):
    start = time.perf_counter()
    failures = []
    for idx, case in enumerate(corpus):
        baseline = case.cbn.marginal_prob(case.desired)
        maxima = []
        minima = []
        for subset in iter_subsets(case.intervenable):
            high, _ = optimal_policy_value(
                case.cbn, subset, CLASS_INF, case.desired, Direction.MAX
            )
            low, _ = optimal_policy_value(
                case.cbn, subset, CLASS_INF, case.desired, Direction.MIN
            )
            maxima.append(high)
            minima.append(low)
        worst_max = min(maxima)
        best_min = max(minima)
        attained_at_empty = maxima[0] == baseline and minima[0] == baseline
        if not (
            abs(worst_max - baseline) <= TOL
            and abs(best_min - baseline) <= TOL
            and attained_at_empty
        ):
            failures.append(idx)
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 300.0
    assert report(
        "C6 adversarial optimum at empty set",
        ok,
        f"{len(corpus)} networks, failures {failures or 'none'}, {elapsed:.1f}s",
    )


def test_c07_reachable_target_forces_zero(corpus):
    hits = 0
    failures = []
    for idx, case in enumerate(corpus):
        if not set(case.targets) & set(case.intervenable):
            continue
        hits += 1
        result = solve(case.problem(Objective.MIN_MIN), case.cbn)
        if not (result.value == 0.0 and len(result.drivers.members) == 1):
            failures.append(idx)
    ok = hits >= 1 and not failures
    assert report(
        "C7 intervenable target min",
        ok,
        f"{hits} eligible networks, failures {failures or 'none'}",
    )


def test_c08_adversarial_parametrization_family():
    rng = np.random.default_rng(77)
    start = time.perf_counter()
    count = 0
    failures = []
    while count < 20:
        n = int(rng.integers(3, 8))
        cbn, intervenable, targets, _ = random_problem(rng, n)
        drivers = cbn.dag.backward_chain(targets, intervenable).terminals
        if not drivers:
            continue
        suite = verify_usm(cbn.dag, intervenable, targets)
        count += 1
        if not suite.passed:
            failures.append(count)
    elapsed = time.perf_counter() - start
    ok = count >= 20 and not failures and elapsed < 300.0
    assert report(
        "C8 adversarial parametrizations",
        ok,
        f"{count} structures, failures {failures or 'none'}, {elapsed:.1f}s",
    )


def test_c09_grid_never_beats_deterministic(corpus):
    levels = (CLASS_INF, IpClass(2), CLASS1, CLASS0)
    start = time.perf_counter()
    checked = 0
    failures = []
    for idx, case in enumerate(corpus):
        for direction in (Direction.MAX, Direction.MIN):
            for ip_class in levels:
                try:
                    grid = grid_policy_search(
                        case.cbn, case.drivers, ip_class, case.desired, direction
                    )
                except BudgetExceededError:
                    continue
                det, _ = optimal_policy_value(
                    case.cbn, case.drivers, ip_class, case.desired, direction
                )
                checked += 1
                improves = (
                    grid > det + TOL
                    if direction is Direction.MAX
                    else grid < det - TOL
                )
                if improves:
                    failures.append((idx, str(ip_class), direction.value))
                break
            else:
                failures.append((idx, "no feasible class", direction.value))
    elapsed = time.perf_counter() - start
    ok = not failures and checked == 2 * len(corpus) and elapsed < 300.0
    assert report(
        "C9 grid extremality",
        ok,
        f"{checked} searches, failures {failures or 'none'}, {elapsed:.1f}s",
    )


def test_c10_separation_matches_independence():
    graphs = [
        Dag(["a", "b", "c"], [("a", "b"), ("b", "c")]),
        Dag(["a", "b", "c"], [("b", "a"), ("b", "c")]),
        Dag(["a", "b", "c"], [("a", "c"), ("b", "c")]),
    ]
    rng = np.random.default_rng(13)
    for n in (4, 4, 5, 5, 5):
        graphs.append(random_dag(rng, n, 0.5))

    start = time.perf_counter()
    combos = 0
    failures = []
    for g_idx, dag in enumerate(graphs):
        params = [random_cbn(np.random.default_rng(1000 * g_idx + s), dag) for s in range(50)]
        nodes = dag.nodes
        for i, a in enumerate(nodes):
            for b in nodes[i + 1 :]:
                rest = tuple(v for v in nodes if v not in (a, b))
                for z in iter_subsets(rest):
                    combos += 1
                    separated = dag.d_separated((a,), (b,), z)
                    independent = all(ci_holds(cbn, a, b, z) for cbn in params)
                    if separated != independent:
                        failures.append((g_idx, a, b, z))
    elapsed = time.perf_counter() - start
    ok = not failures and combos > 0
    assert report(
        "C10 separation vs independence",
        ok,
        f"{combos} combinations over {len(graphs)} graphs, 50 parametrizations each, "
        f"failures {failures or 'none'}, {elapsed:.1f}s",
    )
