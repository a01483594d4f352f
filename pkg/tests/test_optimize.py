import math

import numpy as np
import pytest

from covertbc import (
    BcWardenModel,
    Channel,
    OptimizerConfig,
    ZeroCapacity,
    constrained_max_l2,
    gamma_star,
    maximize_weighted,
    pareto_boundary,
    rate_pair,
    single_user_capacity,
    sweep,
)
from conftest import ex2_model, random_degraded_model

FAST = OptimizerConfig(restarts=6, local_iters=300, seed=0)


@pytest.fixture(scope="module")
def ex1(ex1_model):
    return ex1_model


class TestMaximizeWeighted:
    def test_lambda0_matches_single_user(self, ex1):
        l1s, _ = single_user_capacity(ex1.p1, ex1.q, 0)
        pair, params = maximize_weighted(ex1, 0.0, FAST)
        assert pair.l1 == pytest.approx(l1s, abs=1e-6)

    def test_lambda_inf_matches_user2(self, ex1):
        l2s, _ = single_user_capacity(ex1.p2, ex1.q, 0)
        pair, params = maximize_weighted(ex1, math.inf, FAST)
        assert pair.l2 == pytest.approx(l2s, abs=1e-6)

    def test_returned_params_reproduce_point(self, ex1):
        pair, params = maximize_weighted(ex1, 1.3, FAST)
        again = rate_pair(ex1, params)
        assert again.l1 == pytest.approx(pair.l1, abs=1e-9)
        assert again.l2 == pytest.approx(pair.l2, abs=1e-9)

    def test_deterministic_under_seed(self, ex1):
        a = maximize_weighted(ex1, 0.7, FAST)
        b = maximize_weighted(ex1, 0.7, FAST)
        assert a[0] == b[0]
        np.testing.assert_array_equal(a[1].ptilde_x_a.probs, b[1].ptilde_x_a.probs)
        np.testing.assert_array_equal(a[1].px_given_u_b.matrix, b[1].px_given_u_b.matrix)
        assert a[1].nu == b[1].nu

    def test_degenerate_model_returns_origin(self):
        row = [0.25, 0.25, 0.25, 0.25]
        flat = Channel([row, row, row])
        model = BcWardenModel(flat, flat, flat, 0)
        pair, _ = maximize_weighted(model, 1.0, FAST)
        assert (pair.l1, pair.l2) == (0.0, 0.0)

    def test_negative_weight_rejected(self, ex1):
        with pytest.raises(ValueError):
            maximize_weighted(ex1, -1.0, FAST)


class TestConstrainedMaxL2:
    def test_target_zero_gives_user2_capacity(self, ex1):
        l2s, _ = single_user_capacity(ex1.p2, ex1.q, 0)
        got = constrained_max_l2(ex1, 0.0, FAST)
        assert got is not None
        assert got[0].l2 == pytest.approx(l2s, abs=1e-6)

    def test_unreachable_target(self, ex1):
        assert constrained_max_l2(ex1, 10.0, FAST) is None

    def test_constraint_satisfied(self, ex1):
        pair, params = constrained_max_l2(ex1, 0.3, FAST)
        assert pair.l1 >= 0.3 - 1e-9


@pytest.fixture(scope="module")
def front(ex1_model):
    return pareto_boundary(ex1_model, OptimizerConfig(restarts=4, weight_grid=7,
                                                      local_iters=300, seed=0),
                           points=12)


class TestParetoBoundary:
    def test_endpoints(self, ex1_model, front):
        l1s, _ = single_user_capacity(ex1_model.p1, ex1_model.q, 0)
        l2s, _ = single_user_capacity(ex1_model.p2, ex1_model.q, 0)
        pts = front.as_arrays()
        assert pts[0][0] == pytest.approx(l1s, abs=1e-9)
        assert pts[0][1] == pytest.approx(0.0, abs=1e-12)
        assert pts[-1][0] == pytest.approx(0.0, abs=1e-9)
        assert pts[-1][1] == pytest.approx(l2s, abs=1e-9)

    def test_ordered_and_monotone(self, front):
        pts = front.as_arrays()
        assert (np.diff(pts[:, 0]) <= 1e-12).all()   # L1 decreasing
        assert (np.diff(pts[:, 1]) >= -1e-12).all()  # L2 increasing

    def test_mutually_nondominated(self, front):
        pts = front.as_arrays()
        for i in range(len(pts)):
            for j in range(len(pts)):
                if i == j:
                    continue
                dominated = (
                    pts[i][0] <= pts[j][0] + 1e-9 and pts[i][1] <= pts[j][1] + 1e-9
                )
                assert not dominated

    def test_points_are_feasible(self, ex1_model, front):
        for pt, prm in zip(front.points, front.params):
            again = rate_pair(ex1_model, prm)
            assert again.l1 == pytest.approx(pt.l1, abs=1e-9)
            assert again.l2 == pytest.approx(pt.l2, abs=1e-9)

    def test_bit_identical_reruns(self, ex1_model):
        cfg = OptimizerConfig(restarts=3, weight_grid=5, local_iters=200, seed=7)
        a = pareto_boundary(ex1_model, cfg, points=6)
        b = pareto_boundary(ex1_model, cfg, points=6)
        assert a.as_arrays().tolist() == b.as_arrays().tolist()

    def test_two_points_is_just_endpoints(self, ex1_model):
        front = pareto_boundary(ex1_model, FAST, points=2)
        assert len(front.points) == 2

    def test_dominates_time_sharing_interior(self, ex1_model, front):
        l1s, _ = single_user_capacity(ex1_model.p1, ex1_model.q, 0)
        l2s, _ = single_user_capacity(ex1_model.p2, ex1_model.q, 0)
        interior = [p for p in front.points if 0.05 < p.l1 < l1s - 0.05]
        assert interior
        assert all(p.l1 / l1s + p.l2 / l2s > 1.0 + 1e-4 for p in interior)


class TestGammaStar:
    def test_known_family_values(self):
        assert gamma_star(ex2_model(0.5), FAST) == pytest.approx(1.0178, abs=2e-3)
        assert gamma_star(ex2_model(0.0), FAST) == pytest.approx(1.0, abs=1e-3)
        assert gamma_star(ex2_model(0.3), FAST) == pytest.approx(1.0108, abs=2e-3)

    def test_degenerate_weak_user(self):
        assert gamma_star(ex2_model(0.9), FAST) == 1.0

    def test_fully_degenerate_raises(self):
        row = [0.5, 0.5]
        flat = Channel([row, row])
        warden = Channel([[0.6, 0.4], [0.4, 0.6]])
        model = BcWardenModel(flat, flat, warden, 0)
        with pytest.raises(ZeroCapacity):
            gamma_star(model, FAST)

    def test_at_least_one(self, ex1_model):
        assert gamma_star(ex1_model, FAST) >= 1.0 - 1e-6


class TestSweep:
    def test_empty_values(self):
        assert sweep(ex2_model, [], FAST) == ()

    def test_identical_channels_family(self):
        def family(_v):
            m = ex2_model(0.0)
            return BcWardenModel(m.p1, m.p1, m.q, 0)

        rows = sweep(family, [0.1, 0.2], FAST)
        for r in rows:
            assert r.error is None
            assert r.condition_holds
            assert r.gamma_star == pytest.approx(1.0, abs=1e-3)

    def test_errors_recorded_and_sweep_continues(self):
        def family(v):
            if v == 1.0:
                raise RuntimeError("boom")
            return ex2_model(v)

        rows = sweep(family, [0.5, 1.0, 0.3], FAST)
        assert rows[0].error is None
        assert rows[1].error is not None and "boom" in rows[1].error
        assert rows[2].error is None

    def test_known_rows(self):
        rows = sweep(ex2_model, [0.2, 0.9], FAST)
        assert not rows[0].condition_holds
        assert rows[0].gamma_star == pytest.approx(1.0047, abs=2e-3)
        assert rows[1].condition_holds
        assert rows[1].gamma_star == pytest.approx(1.0, abs=1e-3)


def test_gamma_on_random_models_at_least_one():
    rng = np.random.default_rng(41)
    for _ in range(5):
        model = random_degraded_model(rng)
        try:
            g = gamma_star(model, FAST)
        except ZeroCapacity:
            continue
        assert g >= 1.0 - 1e-6
