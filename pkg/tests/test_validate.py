import math

import numpy as np
import pytest
from scipy.optimize import linprog

from covertbc import (
    BcWardenModel,
    Channel,
    check_conditions,
    find_degrading_channel,
)
from covertbc.simplex import feasible_point

from conftest import random_degraded_model


def linprog_feasible(A, b):
    """Independent LP-feasibility oracle (phase-1 via scipy HiGHS)."""
    res = linprog(
        np.zeros(A.shape[1]), A_eq=A, b_eq=b,
        bounds=[(0, None)] * A.shape[1], method="highs",
    )
    return res.status == 0


class TestSimplex:
    def test_simple_feasible(self):
        A = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
        b = np.array([1.0, 1.0])
        x = feasible_point(A, b)
        assert x is not None
        np.testing.assert_allclose(A @ x, b, atol=1e-10)
        assert (x >= 0).all()

    def test_simple_infeasible(self):
        A = np.array([[1.0, 1.0], [1.0, 1.0]])
        b = np.array([1.0, 2.0])
        assert feasible_point(A, b) is None

    def test_agrees_with_scipy_on_random_systems(self):
        rng = np.random.default_rng(7)
        agree = 0
        for _ in range(60):
            m, n = rng.integers(2, 6), rng.integers(2, 8)
            A = rng.normal(size=(m, n))
            if rng.random() < 0.5:
                x_true = rng.uniform(0, 1, size=n)
                b = A @ x_true  # feasible by construction
            else:
                b = rng.normal(size=m)
            mine = feasible_point(A, b) is not None
            ref = linprog_feasible(A, b)
            assert mine == ref
            agree += 1
        assert agree == 60


class TestConditions:
    def test_example_model_all_hold(self, ex1_model):
        report = check_conditions(ex1_model)
        assert report.all_hold
        assert report.violations == ()

    def test_identical_warden_rows_fail_a(self):
        row = [0.25, 0.25, 0.25, 0.25]
        q = Channel([row, row, row])
        p = Channel(np.random.default_rng(0).dirichlet(np.ones(3), size=3))
        model = BcWardenModel(p, p, q, 0)
        report = check_conditions(model)
        assert not report.cond_a
        assert ("a", None) in report.violations

    def test_support_violation_fails_c1(self):
        p1 = Channel([[1.0, 0.0], [0.5, 0.5]])
        ok = Channel([[0.6, 0.4], [0.4, 0.6]])
        model = BcWardenModel(p1, ok, ok, 0)
        report = check_conditions(model)
        assert not report.cond_c_user1
        assert ("c1", (1, 1)) in report.violations
        assert report.cond_c_user2

    def test_zeroed_null_output_column_fails_b(self):
        # Q0 lacks an output that other rows can produce.
        q = Channel([[0.5, 0.5, 0.0], [0.3, 0.3, 0.4], [0.2, 0.5, 0.3]])
        p = Channel([[0.6, 0.4], [0.5, 0.5], [0.3, 0.7]])
        model = BcWardenModel(p, p, q, 0)
        report = check_conditions(model)
        assert not report.cond_b

    def test_hull_decision_matches_fine_grid(self):
        # Exhaustive step-1e-3 grid over the weight simplex; the nearest grid
        # mixture to a true hull member is within (k/2)*step in sup norm.
        from covertbc._search import simplex_grid

        rng = np.random.default_rng(13)
        for _ in range(12):
            k = int(rng.integers(2, 4))  # up to 3 non-null inputs
            nz = int(rng.integers(2, 5))
            q = rng.dirichlet(np.ones(nz), size=k + 1)
            if rng.random() < 0.4:
                # plant Q0 inside the hull
                lam = rng.dirichlet(np.ones(k))
                q[0] = lam @ q[1:]
            p = rng.dirichlet(np.ones(3), size=k + 1)
            model = BcWardenModel(Channel(p), Channel(p), Channel(q), 0)
            got_in_hull = not check_conditions(model).cond_a

            grid = simplex_grid(k, 1e-3)
            best = np.inf
            for chunk in np.array_split(grid, max(1, len(grid) // 50000)):
                dists = np.abs(chunk @ q[1:] - q[0]).max(axis=1)
                best = min(best, float(dists.min()))
            grid_in_hull = best <= (k / 2) * 1e-3
            assert got_in_hull == grid_in_hull


class TestDegradation:
    def test_example_pair_feasible(self, ex1_model):
        cert = find_degrading_channel(ex1_model.p1, ex1_model.p2)
        assert cert.feasible
        assert cert.residual <= 1e-9
        w = cert.w.matrix
        assert (w >= 0).all()
        np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-9)
        np.testing.assert_allclose(
            ex1_model.p1.matrix @ w, ex1_model.p2.matrix, atol=1e-8
        )

    def test_identity_pair(self):
        p = Channel([[0.7, 0.3], [0.2, 0.8]])
        cert = find_degrading_channel(p, p)
        assert cert.feasible
        np.testing.assert_allclose(p.matrix @ cert.w.matrix, p.matrix, atol=1e-9)

    def test_reversed_pair_infeasible(self, ex1_model):
        # scipy oracle first: the reversed direction really is infeasible
        m1, m2 = ex1_model.p2.matrix, ex1_model.p1.matrix
        k, n1, n2 = m1.shape[0], m1.shape[1], m2.shape[1]
        rows, rhs = [], []
        for i in range(k):
            for j in range(n2):
                r = np.zeros(n1 * n2)
                r[j::n2] = m1[i]
                rows.append(r)
                rhs.append(m2[i, j])
        for l in range(n1):
            r = np.zeros(n1 * n2)
            r[l * n2 : (l + 1) * n2] = 1.0
            rows.append(r)
            rhs.append(1.0)
        assert not linprog_feasible(np.array(rows), np.array(rhs))

        cert = find_degrading_channel(ex1_model.p2, ex1_model.p1)
        assert not cert.feasible
        assert cert.w is None
        assert math.isinf(cert.residual)

    def test_soundness_on_random_degraded_pairs(self):
        rng = np.random.default_rng(29)
        for _ in range(20):
            k, n1, n2 = rng.integers(2, 5, size=3)
            p1 = rng.dirichlet(np.ones(n1), size=k)
            w = rng.dirichlet(np.ones(n2), size=n1)
            p2 = p1 @ w
            cert = find_degrading_channel(Channel(p1), Channel(p2))
            assert cert.feasible
            assert cert.residual <= 1e-8
            got = cert.w.matrix
            assert (got >= 0).all()
            np.testing.assert_allclose(got.sum(axis=1), 1.0, atol=1e-9)

    def test_input_size_mismatch(self):
        a = Channel([[0.5, 0.5], [0.1, 0.9]])
        b = Channel([[0.5, 0.5], [0.1, 0.9], [0.2, 0.8]])
        with pytest.raises(ValueError):
            find_degrading_channel(a, b)


def test_random_models_pass_conditions():
    rng = np.random.default_rng(31)
    for _ in range(10):
        model = random_degraded_model(rng)
        assert check_conditions(model).all_hold
        assert find_degrading_channel(model.p1, model.p2).feasible
