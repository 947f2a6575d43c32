"""Annealing engine: schedule, acceptance, moves, and the search loop."""

import math
import random

import pytest

from dmfplace import (
    ALL_MOVE_KINDS,
    AnnealParams,
    CostWeights,
    Move,
    NoFeasiblePlacementError,
    PlacedModule,
    ValidationError,
    anneal,
    cost,
    coverage_report,
    initial_placement,
    pcr_fixture,
)
from dmfplace.annealer import (
    MOVE_DISPLACE,
    MOVE_DISPLACE_ROTATE,
    MOVE_INTERCHANGE,
    MOVE_INTERCHANGE_ROTATE,
    PAIR_MOVE_KINDS,
    SINGLE_MOVE_KINDS,
    apply_move,
    metropolis_accept,
    propose,
    temperature,
    window_span,
)
from dmfplace.placement import array_area_cells, overlap_penalty

from conftest import make_instance, place


def churn_instance():
    return make_instance(
        (6, 6),
        [("a", 2, 2, 0, 5), ("b", 2, 3, 0, 5), ("c", 3, 2, 2, 4)],
    )


class TestSchedule:
    def test_temperature_is_geometric(self):
        params = AnnealParams(t_initial=10000.0, cooling_alpha=0.9)
        for i in range(30):
            assert temperature(params, i) == 10000.0 * 0.9**i

    def test_window_span_hand_values(self):
        params = AnnealParams(t_initial=100.0, window_initial=16, window_min=1)
        assert window_span(100.0, params) == 16
        assert window_span(50.0, params) == 8
        assert window_span(94.0, params) == 16  # ceil(15.04)
        assert window_span(93.75, params) == 15
        assert window_span(0.001, params) == 1

    def test_window_span_floor(self):
        params = AnnealParams(t_initial=100.0, window_initial=16, window_min=3)
        assert window_span(10.0, params) == 3  # ceil(1.6) = 2, floored to 3

    def test_window_initial_defaults_to_starting_temperature(self):
        assert AnnealParams().resolved_window_initial == 10000
        assert AnnealParams(t_initial=10.5).resolved_window_initial == 11
        assert AnnealParams(window_initial=7).resolved_window_initial == 7


class TestParamValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"t_initial": 0.0},
            {"t_initial": -5.0},
            {"cooling_alpha": 0.0},
            {"cooling_alpha": 1.0},
            {"iters_per_module": 0},
            {"p_single_move": 0.0},
            {"p_single_move": 1.0},
            {"window_initial": 0},
            {"window_min": 0},
        ],
    )
    def test_bad_params_rejected(self, kwargs):
        with pytest.raises(ValidationError):
            AnnealParams(**kwargs)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"alpha_area": -1.0},
            {"beta_ft": -0.1},
            {"lambda_overlap": 0.0},
            {"lambda_overlap": -2.0},
        ],
    )
    def test_bad_weights_rejected(self, kwargs):
        with pytest.raises(ValidationError):
            CostWeights(**kwargs)

    def test_lambda_default_doubles_largest_module(self):
        assert CostWeights().resolved_lambda(pcr_fixture()) == 48.0
        assert CostWeights(alpha_area=2.0).resolved_lambda(pcr_fixture()) == 96.0
        assert CostWeights(lambda_overlap=10.0).resolved_lambda(pcr_fixture()) == 10.0


class TestMetropolis:
    def test_improvement_always_accepted(self):
        rng = random.Random(0)
        for _ in range(500):
            assert metropolis_accept(-rng.uniform(0.001, 100.0), rng.uniform(0.01, 50.0), rng)

    def test_zero_delta_always_accepted(self):
        rng = random.Random(1)
        assert all(metropolis_accept(0.0, 10.0, rng) for _ in range(1000))

    def test_delta_equal_to_temperature_rate(self):
        rng = random.Random(2)
        hits = sum(metropolis_accept(5.0, 5.0, rng) for _ in range(10_000))
        assert abs(hits / 10_000 - math.exp(-1)) <= 0.02

    def test_two_temperatures_rate(self):
        rng = random.Random(3)
        hits = sum(metropolis_accept(10.0, 5.0, rng) for _ in range(10_000))
        assert abs(hits / 10_000 - math.exp(-2)) <= 0.02


class TestInitialPlacement:
    def test_benchmark_start(self):
        p = initial_placement(pcr_fixture())
        assert overlap_penalty(p) == 0
        assert array_area_cells(p) == 66
        assert p.placed == initial_placement(pcr_fixture()).placed

    def test_single_module_at_origin(self):
        inst = make_instance((5, 5), [("a", 3, 2, 0, 5)])
        p = initial_placement(inst)
        assert p.placed[0].row == 1 and p.placed[0].col == 1
        assert p.placed[0].rotated is False

    def test_concurrent_pair_packs_row_major(self):
        inst = make_instance((4, 4), [("a", 2, 2, 0, 5), ("b", 2, 2, 0, 5)])
        p = initial_placement(inst)
        assert (p.placed[0].row, p.placed[0].col) == (1, 1)
        assert (p.placed[1].row, p.placed[1].col) == (1, 3)

    def test_rotates_when_upright_cannot_fit(self):
        inst = make_instance((2, 5), [("a", 1, 4, 0, 5)])
        p = initial_placement(inst)
        assert p.placed[0].rotated is True
        assert (p.placed[0].row, p.placed[0].col) == (1, 1)

    def test_impossible_instance_reports_sufficient_bound(self):
        inst = make_instance((2, 2), [("a", 2, 2, 0, 5), ("b", 2, 2, 0, 5)])
        with pytest.raises(NoFeasiblePlacementError, match=r"a 4x4 grid always suffices"):
            initial_placement(inst)


class TestCost:
    def test_overlap_dominates(self):
        inst = make_instance((4, 4), [("a", 2, 2, 0, 5), ("b", 2, 2, 0, 5)])
        p = place(inst, [("a", 1, 1), ("b", 1, 1)])
        assert cost(p, CostWeights()) == 36.0  # 4 cells + 8 * 4 shared
        assert cost(p, CostWeights(), with_ft=True) == 36.0
        assert cost(p, CostWeights(lambda_overlap=10.0)) == 44.0

    def test_single_module_area_only(self):
        inst = make_instance((9, 9), [("a", 9, 7, 0, 5)])
        p = place(inst, [("a", 1, 1)])
        assert cost(p, CostWeights()) == 63.0
        assert cost(p, CostWeights(alpha_area=2.0)) == 126.0

    def test_coverage_reward_is_fraction_weighted(self):
        inst = make_instance((4, 4), [("a", 2, 2, 0, 5)])
        p = place(inst, [("a", 1, 1)])
        rep = coverage_report(p)
        w = CostWeights(beta_ft=30.0)
        assert cost(p, w, with_ft=True) == 4.0 - 30.0 * rep.fti
        assert cost(p, w, with_ft=False) == 4.0


class TestPropose:
    def test_deterministic_given_seed(self):
        p = initial_placement(pcr_fixture())
        params = AnnealParams(t_initial=100.0, window_initial=16)
        a = random.Random(5)
        b = random.Random(5)
        for _ in range(200):
            assert propose(p, 60.0, params, a) == propose(p, 60.0, params, b)

    def test_family_and_variant_rates(self):
        p = initial_placement(pcr_fixture())
        params = AnnealParams(t_initial=100.0, window_initial=16)
        rng = random.Random(7)
        moves = [propose(p, 100.0, params, rng) for _ in range(5000)]
        singles = [m for m in moves if m.kind in SINGLE_MOVE_KINDS]
        pairs = [m for m in moves if m.kind in PAIR_MOVE_KINDS]
        assert abs(len(singles) / 5000 - 0.75) <= 0.04
        rot_single = sum(m.kind == MOVE_DISPLACE_ROTATE for m in singles)
        assert abs(rot_single / len(singles) - 0.5) <= 0.05
        rot_pair = sum(m.kind == MOVE_INTERCHANGE_ROTATE for m in pairs)
        assert abs(rot_pair / len(pairs) - 0.5) <= 0.06

    def test_pair_partners_are_distinct(self):
        p = initial_placement(pcr_fixture())
        params = AnnealParams(t_initial=100.0, window_initial=16)
        rng = random.Random(11)
        for _ in range(2000):
            m = propose(p, 100.0, params, rng, kinds=PAIR_MOVE_KINDS)
            assert m.kind in PAIR_MOVE_KINDS
            assert len(m.module_ids) == 2
            assert m.module_ids[0] != m.module_ids[1]
            assert m.target is None

    def test_cold_window_targets_stay_adjacent(self):
        p = initial_placement(pcr_fixture())
        params = AnnealParams(t_initial=100.0, window_initial=16, window_min=1)
        by_id = {pm.module_id: pm for pm in p.placed}
        rng = random.Random(13)
        for _ in range(500):
            m = propose(p, 0.001, params, rng, kinds=SINGLE_MOVE_KINDS)
            pm = by_id[m.module_ids[0]]
            assert abs(m.target[0] - pm.row) <= 1
            assert abs(m.target[1] - pm.col) <= 1

    def test_kind_filter_respected(self):
        p = initial_placement(pcr_fixture())
        params = AnnealParams(t_initial=100.0, window_initial=16)
        rng = random.Random(17)
        for _ in range(300):
            assert propose(p, 50.0, params, rng, kinds=(MOVE_DISPLACE,)).kind == MOVE_DISPLACE

    def test_single_module_instance_never_pairs(self):
        inst = make_instance((5, 5), [("a", 2, 2, 0, 5)])
        p = initial_placement(inst)
        params = AnnealParams(t_initial=100.0, window_initial=4)
        rng = random.Random(19)
        for _ in range(300):
            assert propose(p, 100.0, params, rng).kind in SINGLE_MOVE_KINDS

    def test_unknown_kind_rejected(self):
        p = initial_placement(pcr_fixture())
        params = AnnealParams()
        with pytest.raises(ValidationError):
            propose(p, 10.0, params, random.Random(0), kinds=("teleport",))


class TestApplyMove:
    def setup_method(self):
        self.inst = make_instance(
            (8, 8),
            [("a", 2, 3, 0, 5), ("b", 3, 2, 0, 5), ("f", 2, 2, 0, 5, False)],
        )
        self.p = place(self.inst, [("a", 1, 1), ("b", 4, 4), ("f", 7, 7)])

    def test_displace_moves_one_module(self):
        q = apply_move(self.p, Move(MOVE_DISPLACE, ("a",), target=(3, 5)))
        assert q.placed_by_id("a") == PlacedModule("a", 3, 5, rotated=False)
        assert q.placed_by_id("b") == self.p.placed_by_id("b")

    def test_displace_rotate_flips_orientation(self):
        q = apply_move(self.p, Move(MOVE_DISPLACE_ROTATE, ("a",), target=(2, 2)))
        assert q.placed_by_id("a").rotated is True
        q2 = apply_move(q, Move(MOVE_DISPLACE_ROTATE, ("a",), target=(2, 2)))
        assert q2.placed_by_id("a").rotated is False

    def test_rotate_skips_non_rotatable(self):
        q = apply_move(self.p, Move(MOVE_DISPLACE_ROTATE, ("f",), target=(5, 5)))
        pm = q.placed_by_id("f")
        assert (pm.row, pm.col, pm.rotated) == (5, 5, False)

    def test_interchange_swaps_positions(self):
        q = apply_move(self.p, Move(MOVE_INTERCHANGE, ("a", "b")))
        assert (q.placed_by_id("a").row, q.placed_by_id("a").col) == (4, 4)
        assert (q.placed_by_id("b").row, q.placed_by_id("b").col) == (1, 1)
        assert q.placed_by_id("a").rotated is False

    def test_interchange_rotate_flips_first_operand_only(self):
        q = apply_move(self.p, Move(MOVE_INTERCHANGE_ROTATE, ("a", "b")))
        assert q.placed_by_id("a").rotated is True
        assert q.placed_by_id("b").rotated is False

    def test_out_of_bounds_target_rejected(self):
        with pytest.raises(ValidationError):
            apply_move(self.p, Move(MOVE_DISPLACE, ("a",), target=(8, 8)))

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValidationError):
            apply_move(self.p, Move("teleport", ("a",), target=(1, 1)))


class StepLog:
    def __init__(self):
        self.steps = []

    def __call__(self, t, delta, accepted, evaluated, state_cost, state_overlap):
        self.steps.append((t, delta, accepted, evaluated, state_cost, state_overlap))


def expected_rounds(params: AnnealParams) -> int:
    r = 0
    wi = params.resolved_window_initial
    while max(params.window_min, math.ceil(wi * params.t_initial * params.cooling_alpha**r / params.t_initial)) > params.window_min:
        r += 1
    return r + 1


class TestAnneal:
    def test_observer_sees_full_schedule(self):
        inst = make_instance((6, 6), [("a", 2, 2, 0, 5), ("b", 2, 3, 0, 5)])
        params = AnnealParams(t_initial=100.0, window_initial=8, iters_per_module=5, rng_seed=2)
        log = StepLog()
        anneal(inst, params=params, on_step=log)
        rounds = expected_rounds(params)
        n_inner = params.iters_per_module * 2
        assert len(log.steps) == rounds * n_inner
        temps = [s[0] for s in log.steps]
        assert temps == [100.0 * 0.9**i for i in range(rounds) for _ in range(n_inner)]
        spans = [max(1, math.ceil(8 * 0.9**i)) for i in range(rounds)]
        assert all(s > 1 for s in spans[:-1]) and spans[-1] == 1

    def test_observer_flags_are_consistent(self):
        inst = churn_instance()
        params = AnnealParams(t_initial=50.0, window_initial=8, iters_per_module=20, rng_seed=3)
        log = StepLog()
        anneal(inst, params=params, on_step=log)
        saw_oob = saw_reject = False
        for t, delta, accepted, evaluated, _, _ in log.steps:
            if not evaluated:
                saw_oob = True
                assert delta is None and accepted is False
            else:
                assert delta is not None
                if delta < 0:
                    assert accepted
                if not accepted:
                    saw_reject = True
        assert saw_oob and saw_reject

    def test_returns_best_feasible_state_seen(self):
        inst = churn_instance()
        params = AnnealParams(t_initial=50.0, window_initial=8, iters_per_module=30, rng_seed=3)
        weights = CostWeights()
        start = initial_placement(inst)
        log = StepLog()
        result = anneal(inst, start=start, params=params, weights=weights, on_step=log)
        feasible_costs = [c for _, _, _, _, c, ov in log.steps if ov == 0]
        expected = min([cost(start, weights)] + feasible_costs)
        assert cost(result, weights) == expected
        assert overlap_penalty(result) == 0

    def test_best_tracking_with_coverage_reward(self):
        inst = churn_instance()
        params = AnnealParams(t_initial=50.0, window_initial=8, iters_per_module=10, rng_seed=5)
        weights = CostWeights(beta_ft=2.5)
        start = initial_placement(inst)
        log = StepLog()
        result = anneal(
            inst, start=start, params=params, weights=weights, with_ft=True, on_step=log
        )
        feasible_costs = [c for _, _, _, _, c, ov in log.steps if ov == 0]
        expected = min([cost(start, weights, with_ft=True)] + feasible_costs)
        assert math.isclose(cost(result, weights, with_ft=True), expected, rel_tol=1e-12)

    def test_deterministic_given_seed(self):
        inst = churn_instance()
        params = AnnealParams(t_initial=50.0, window_initial=8, iters_per_module=20, rng_seed=9)
        a = anneal(inst, params=params)
        b = anneal(inst, params=params)
        assert a.placed == b.placed

    def test_move_filter_restricts_proposals(self):
        inst = churn_instance()
        params = AnnealParams(t_initial=20.0, window_initial=4, iters_per_module=10, rng_seed=4)
        result = anneal(inst, params=params, move_filter=SINGLE_MOVE_KINDS)
        assert overlap_penalty(result) == 0
        with pytest.raises(ValidationError):
            anneal(inst, params=params, move_filter=("bogus",))

    def test_start_from_other_instance_rejected(self):
        other = make_instance((6, 6), [("x", 2, 2, 0, 5)])
        p = initial_placement(other)
        with pytest.raises(ValidationError, match="different instance"):
            anneal(churn_instance(), start=p)

    def test_never_feasible_raises_with_final_state(self):
        inst = make_instance((2, 2), [("a", 2, 2, 0, 5), ("b", 2, 2, 0, 5)])
        start = place(inst, [("a", 1, 1), ("b", 1, 1)])
        params = AnnealParams(t_initial=2.0, window_initial=1, iters_per_module=1, rng_seed=1)
        with pytest.raises(NoFeasiblePlacementError) as exc:
            anneal(inst, start=start, params=params)
        assert exc.value.placement is not None
        assert overlap_penalty(exc.value.placement) > 0

    def test_large_grid_fault_mode_warns(self):
        inst = make_instance((101, 101), [("a", 1, 1, 0, 5)])
        params = AnnealParams(t_initial=10.0, window_initial=1, iters_per_module=1, rng_seed=1)
        with pytest.warns(RuntimeWarning, match="very slow"):
            anneal(inst, params=params, weights=CostWeights(beta_ft=1.0), with_ft=True)

    def test_all_kinds_are_exported(self):
        assert set(ALL_MOVE_KINDS) == {
            MOVE_DISPLACE,
            MOVE_DISPLACE_ROTATE,
            MOVE_INTERCHANGE,
            MOVE_INTERCHANGE_ROTATE,
        }
