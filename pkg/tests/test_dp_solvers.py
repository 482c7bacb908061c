import math

import pytest

from searchplan import (Instance, Instance1D, SolverTimeout,
                        choose_discretization, detection_probability,
                        solve_1d, solve_exact, solve_ordered,
                        solve_segment_1d, to_line_instance, validate)
from oracles import (best_ordered_by_enumeration, best_schedule_by_enumeration,
                     random_grid_instance, rng_for)


def line(positions, priors, beta, costs, budget):
    return Instance1D(positions=positions, priors=priors, false_negative=beta,
                      search_costs=costs, budget=budget)


@pytest.fixture
def two_points():
    return line([0, 1], [0.5, 0.5], [0.5, 0.5], [1, 1], 3)


@pytest.fixture
def running_pair():
    return Instance(points=[(0, 0), (1, 0)], priors=[0.6, 0.4],
                    false_negative=[0.5, 0.5], search_costs=[1, 1], budget=3)


class TestInstance1D:
    def test_duplicate_positions_rejected(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            line([0, 0], [0.5, 0.5], [0.5, 0.5], [1, 1], 3)

    def test_projection_of_collinear_instance(self):
        inst = Instance(points=[(2, 2), (0, 0), (1, 1)], priors=[0.2, 0.5, 0.3],
                        false_negative=[0.1, 0.2, 0.3], search_costs=[1, 2, 3],
                        budget=9)
        one, back = to_line_instance(inst)
        assert back == (2, 3, 1)
        assert one.priors == (0.5, 0.3, 0.2)
        spans = [one.positions[k + 1] - one.positions[k] for k in range(2)]
        assert spans == pytest.approx([math.sqrt(2)] * 2)

    def test_non_collinear_rejected(self):
        inst = Instance(points=[(0, 0), (1, 0), (0, 1)], priors=[1 / 3] * 3,
                        false_negative=[0.5] * 3, search_costs=[1] * 3, budget=9)
        with pytest.raises(ValueError, match="collinear"):
            to_line_instance(inst)


class TestSegmentDp:
    def test_budget_three_splits_searches(self, two_points):
        seg = solve_segment_1d(two_points, 1, 2)
        assert seg.feasible
        assert seg.probability == pytest.approx(0.5)
        assert seg.allocation == (1, 1)
        assert seg.meta.tau == 2

    def test_budget_two_searches_one_endpoint(self, two_points):
        seg = solve_segment_1d(line([0, 1], [0.5, 0.5], [0.5, 0.5], [1, 1], 2),
                               1, 2)
        assert seg.probability == pytest.approx(0.25)
        assert sum(seg.allocation) == 1

    def test_single_point_geometric(self):
        seg = solve_segment_1d(line([0.0], [1.0], [0.5], [1], 2), 1, 1)
        assert seg.probability == pytest.approx(0.75)
        assert seg.allocation == (2,)

    def test_travel_beyond_budget_infeasible(self):
        seg = solve_segment_1d(line([0, 5], [0.5, 0.5], [0.5, 0.5], [1, 1], 3),
                               1, 2)
        assert not seg.feasible

    def test_bad_window_raises(self, two_points):
        with pytest.raises(IndexError):
            solve_segment_1d(two_points, 2, 1)

    def test_mirror_symmetry(self):
        for seed in range(30):
            inst = random_grid_instance(seed, collinear=True)
            one, _ = to_line_instance(inst)
            n = one.n
            mirrored = Instance1D(
                positions=[-x for x in reversed(one.positions)],
                priors=tuple(reversed(one.priors)),
                false_negative=tuple(reversed(one.false_negative)),
                search_costs=tuple(reversed(one.search_costs)),
                budget=one.budget)
            rng = rng_for(606, seed)
            l = int(rng.integers(1, n + 1))
            r = int(rng.integers(l, n + 1))
            a = solve_segment_1d(one, l, r)
            b = solve_segment_1d(mirrored, n + 1 - r, n + 1 - l)
            assert a.feasible == b.feasible
            assert a.probability == pytest.approx(b.probability, abs=1e-12)


class TestSolve1d:
    def test_running_example(self, two_points):
        result = solve_1d(two_points)
        assert result.probability == pytest.approx(0.5)
        assert result.schedule.visits == ((1, 1), (2, 1))
        assert result.total_weight <= two_points.budget + 1e-9

    def test_single_point_reduces_to_geometric(self):
        result = solve_1d(line([4.0], [1.0], [0.5], [1], 2))
        assert result.probability == pytest.approx(0.75)
        assert result.schedule.visits == ((1, 2),)

    def test_zero_budget(self, two_points):
        result = solve_1d(line([0, 1], [0.5, 0.5], [0.5, 0.5], [1, 1], 0))
        assert result.probability == 0.0
        assert result.schedule.visits == ()

    def test_budget_below_cheapest_search(self):
        result = solve_1d(line([0, 1], [0.5, 0.5], [0.5, 0.5], [2, 3], 1.5))
        assert result.probability == 0.0
        assert result.schedule.visits == ()

    def test_matches_enumeration_on_random_lines(self):
        for seed in range(40):
            inst = random_grid_instance(seed, collinear=True, n_max=5)
            one, _ = to_line_instance(inst)
            got = solve_1d(one)
            want = best_schedule_by_enumeration(inst)
            assert got.probability == pytest.approx(want, abs=1e-9)

    def test_deadline_raises(self, two_points):
        with pytest.raises(SolverTimeout):
            solve_1d(two_points, deadline=0.0)


class TestChooseDiscretization:
    def test_arithmetic_example(self):
        pts = [(0.0, 0.0), (3.0, 4.0)] + [(0.0, 0.0)] * 8
        inst = Instance(points=pts, priors=[0.1] * 10, false_negative=[0.5] * 10,
                        search_costs=[1] * 10, budget=1)
        assert choose_discretization(inst, 0.5) == 100

    def test_single_point(self):
        inst = Instance(points=[(5, 5)], priors=[1.0], false_negative=[0.5],
                        search_costs=[1], budget=1)
        assert choose_discretization(inst, 0.1) == 1

    def test_unit_square_fig_scale(self):
        pts = [(0, 0), (1, 0), (0, 1), (1, 1), (0.5, 0.5), (0.2, 0.8)]
        inst = Instance(points=pts, priors=[1 / 6] * 6, false_negative=[0.5] * 6,
                        search_costs=[1] * 6, budget=3)
        assert choose_discretization(inst, 0.1) == 85

    def test_epsilon_must_be_positive(self, two_points):
        with pytest.raises(ValueError):
            choose_discretization(two_points.to_instance(), 0.0)


class TestSolveOrdered:
    def test_running_example(self, running_pair):
        result = solve_ordered(running_pair, [1, 2], 1)
        assert result.probability == pytest.approx(0.525)
        assert result.schedule.visits == ((1, 3),)
        assert result.params["tau"] == 3

    def test_zero_budget(self, running_pair):
        result = solve_ordered(running_pair.with_budget(0.0), [1, 2], 1)
        assert result.probability == 0.0

    def test_integer_line_matches_dp1d_exactly(self):
        for seed in range(25):
            inst = random_grid_instance(seed, collinear=True)
            inst = inst.with_budget(float(int(inst.budget)))
            one, back = to_line_instance(inst)
            via_line = solve_1d(one)
            via_order = solve_ordered(inst, back, 1)
            assert via_order.probability == pytest.approx(via_line.probability,
                                                          abs=1e-12)

    def test_matches_respecting_plan_enumeration(self):
        for seed in range(12):
            inst = random_grid_instance(seed, n_max=5)
            rng = rng_for(808, seed)
            order = (rng.permutation(inst.n) + 1).tolist()
            for c in (1, 3):
                got = solve_ordered(inst, order, c)
                want = best_ordered_by_enumeration(inst, order, c)
                assert got.probability == pytest.approx(want, abs=1e-9), \
                    f"seed {seed} C={c}"

    def test_dense_and_sparse_agree(self):
        for seed in range(25):
            inst = random_grid_instance(seed)
            order = list(range(1, inst.n + 1))
            c = int(rng_for(707, seed).integers(1, 25))
            dense = solve_ordered(inst, order, c, mode="dense")
            sparse = solve_ordered(inst, order, c, mode="sparse")
            assert dense.probability == pytest.approx(sparse.probability,
                                                      abs=1e-12)

    def test_huge_discretization_runs_sparse(self, running_pair):
        c = choose_discretization(running_pair, 1e-6)
        assert c == 2_000_000
        result = solve_ordered(running_pair, [1, 2], c)
        assert result.params["mode"] == "sparse"
        assert result.probability == pytest.approx(0.525, abs=1e-9)

    def test_probability_nondecreasing_in_budget(self):
        for seed in range(10):
            inst = random_grid_instance(seed)
            order = list(range(1, inst.n + 1))
            last = -1.0
            for budget in (2.0, 5.0, 9.0, 14.0):
                p = solve_ordered(inst.with_budget(budget), order, 10).probability
                assert p >= last - 1e-12
                last = p

    def test_refining_c_never_hurts_with_integer_budget(self):
        for seed in range(15):
            inst = random_grid_instance(seed)
            inst = inst.with_budget(float(int(inst.budget)))
            order = list(range(1, inst.n + 1))
            p1 = solve_ordered(inst, order, 1).probability
            p10 = solve_ordered(inst, order, 10).probability
            p20 = solve_ordered(inst, order, 20).probability
            assert p10 >= p1 - 1e-12
            assert p20 >= p10 - 1e-12

    def test_respects_subset_ordering(self, running_pair):
        result = solve_ordered(running_pair, [2], 1)
        assert result.schedule.point_indices == (2,)

    def test_rejects_bad_orderings(self, running_pair):
        with pytest.raises(ValueError):
            solve_ordered(running_pair, [1, 1], 1)
        with pytest.raises(IndexError):
            solve_ordered(running_pair, [1, 3], 1)
        with pytest.raises(ValueError):
            solve_ordered(running_pair, [1, 2], 0)

    def test_schedule_feasible_within_tick_slack(self):
        for seed in range(25):
            inst = random_grid_instance(seed)
            order = list(range(1, inst.n + 1))
            for c in (1, 10):
                result = solve_ordered(inst, order, c)
                assert validate(inst, result.schedule, tolerance=1.0 / c) == []
                recomputed = detection_probability(inst, result.schedule)
                assert result.probability == pytest.approx(recomputed, abs=1e-12)

    def test_anytime_deadline_returns_truncated(self, running_pair):
        result = solve_ordered(running_pair, [1, 2], 1, deadline=0.0,
                               anytime=True)
        assert result.params.get("truncated") is True

    def test_deadline_raises_without_anytime(self, running_pair):
        with pytest.raises(SolverTimeout):
            solve_ordered(running_pair, [1, 2], 1, deadline=0.0)

    def test_ordered_on_oracle_order_matches_exact(self):
        for seed in range(20):
            inst = random_grid_instance(seed)
            exact = solve_exact(inst)
            if not exact.schedule.visits:
                continue
            order = exact.schedule.point_indices
            c = choose_discretization(inst, 1e-6)
            got = solve_ordered(inst, order, c)
            assert got.probability == pytest.approx(exact.probability, abs=1e-9)
