"""Reference searches, generators and the verification suites."""

import numpy as np
import pytest

from cbnctrl import (
    Budget,
    BudgetExceededError,
    CLASS1,
    CLASS_INF,
    Direction,
    best_over_subsets,
    ci_holds,
    grid_policy_search,
    naive_policy_search,
    optimal_policy_value,
    random_cbn,
    random_dag,
    random_problem,
    verify_extremality,
    verify_lemma3,
    verify_sufficiency,
    verify_usm,
)
from cbnctrl.graph import INF
from cbnctrl.oracle import iter_subsets, simplex_grid_rows

from test_cbn import chain_ab, xor_gate
from test_control import screening_chain
from test_graph import junction


class TestSubsets:
    def test_order_is_size_then_lexicographic(self):
        got = list(iter_subsets(("a", "b", "c")))
        assert got == [
            (),
            ("a",),
            ("b",),
            ("c",),
            ("a", "b"),
            ("a", "c"),
            ("b", "c"),
            ("a", "b", "c"),
        ]


class TestNaiveSearch:
    def test_cap_enforced(self):
        cbn = screening_chain()
        with pytest.raises(ValueError, match="cap"):
            naive_policy_search(cbn, ("y1",), CLASS_INF, {"o": 1}, Direction.MAX, max_combos=1)

    def test_no_drivers_is_baseline(self):
        cbn = chain_ab()
        value, pair = naive_policy_search(cbn, (), CLASS1, {"b": 1}, Direction.MAX)
        assert value == cbn.marginal_prob({"b": 1})
        assert len(pair) == 0


class TestBestOverSubsets:
    def test_prefers_smallest_tied_subset(self):
        cbn = screening_chain()
        value, subset, pair = best_over_subsets(
            cbn, ("y1", "y2"), CLASS_INF, {"o": 1}, Direction.MAX
        )
        assert value == pytest.approx(0.7, abs=1e-9)
        assert subset == ("y1",)

    def test_set_size_budget(self):
        cbn = xor_gate()
        tight = Budget(max_set_size=0)
        with pytest.raises(BudgetExceededError):
            best_over_subsets(cbn, ("y",), CLASS1, {"o": 1}, Direction.MAX, tight)


class TestSimplexGrid:
    def test_binary_quarter_grid(self):
        assert simplex_grid_rows(2, 0.25) == (
            (0.0, 1.0),
            (0.25, 0.75),
            (0.5, 0.5),
            (0.75, 0.25),
            (1.0, 0.0),
        )

    def test_rows_are_distributions(self):
        for card in (2, 3):
            for row in simplex_grid_rows(card, 0.25):
                assert len(row) == card
                assert sum(row) == pytest.approx(1.0, abs=1e-12)

    def test_step_must_divide_one(self):
        with pytest.raises(ValueError):
            simplex_grid_rows(2, 0.3)


class TestGridSearch:
    def test_grid_brackets_the_deterministic_optimum(self):
        # the grid contains every deterministic table, so it can tie but
        # never beat the enumeration optimum
        rng = np.random.default_rng(2718)
        checked = 0
        for _ in range(12):
            cbn, intervenable, targets, desired = random_problem(rng, 4)
            if not intervenable:
                continue
            drivers = intervenable[:2]
            for direction in (Direction.MAX, Direction.MIN):
                det, _ = optimal_policy_value(cbn, drivers, CLASS1, desired, direction)
                grid = grid_policy_search(cbn, drivers, CLASS1, desired, direction)
                # the deterministic optimum sits on the grid, so the two
                # searches must agree to tolerance
                assert grid == pytest.approx(det, abs=1e-9)
            checked += 1
        assert checked >= 8

    def test_work_budget_refusal(self):
        cbn = screening_chain()
        with pytest.raises(BudgetExceededError):
            grid_policy_search(cbn, ("y1",), CLASS1, {"o": 1}, Direction.MAX, 0.25, Budget(max_work=1))


class TestConditionalIndependence:
    def test_chain_screens(self):
        cbn = screening_chain()
        assert ci_holds(cbn, "y2", "o", ["y1"])
        assert not ci_holds(cbn, "y2", "o", [])

    def test_marginally_independent_roots(self):
        rng = np.random.default_rng(12)
        dag = random_dag(rng, 2, edge_prob=0.0)
        cbn = random_cbn(rng, dag)
        assert ci_holds(cbn, dag.nodes[0], dag.nodes[1], [])


class TestGenerators:
    def test_same_seed_same_instance(self):
        a = random_problem(np.random.default_rng(99), 5)
        b = random_problem(np.random.default_rng(99), 5)
        assert a[0] == b[0]
        assert a[1:] == b[1:]

    def test_rows_strictly_positive(self):
        rng = np.random.default_rng(55)
        cbn = random_cbn(rng, random_dag(rng, 5))
        for name in cbn.dag.nodes:
            for row in cbn.cpd(name).rows:
                assert all(p > 0.0 for p in row)


class TestSuites:
    def test_lemma3_passes_and_reports(self):
        cbn = screening_chain()
        report = verify_lemma3(cbn, ("y1", "y2"), {"o": 1})
        assert report.passed
        assert report.name == "lemma3"
        assert any("brackets checked" in line for line in report.details)

    def test_lemma3_refuses_level_zero(self):
        cbn = screening_chain()
        with pytest.raises(ValueError, match="levels"):
            verify_lemma3(cbn, ("y1",), {"o": 1}, levels=(0, 1))

    def test_lemma3_accepts_custom_levels(self):
        cbn = screening_chain()
        report = verify_lemma3(cbn, ("y1",), {"o": 1}, levels=(1, INF))
        assert report.passed

    def test_sufficiency_on_screening_chain(self):
        cbn = screening_chain()
        report = verify_sufficiency(cbn, ("y1", "y2"), ("o",), {"o": 1})
        assert report.passed
        assert "drivers: {y1}" in report.details[0]

    def test_usm_suite(self):
        report = verify_usm(junction(), ("t3", "t4"), ("o",))
        assert report.passed
        assert any("proper subsets checked: 3" in line for line in report.details)

    def test_extremality_suite(self):
        cbn = screening_chain()
        report = verify_extremality(cbn, ("y1", "y2"), ("o",), {"o": 1})
        assert report.passed
        assert any(line.startswith("max:") for line in report.details)
