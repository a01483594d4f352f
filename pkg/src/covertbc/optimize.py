"""Nonconvex search over superposition parameters: weighted scalarizations,
the Pareto boundary of the rate region, the time-sharing improvement
coefficient gamma*, and parametric sweeps.

Search architecture: all pmfs are optimized through unconstrained logits
(multi-start Nelder-Mead, deterministic under a fixed seed), while the time
split nu is eliminated exactly. For fixed distributions the rates are

    L1(nu) = sqrt(2/q(nu)) [ (1-nu) T_A + nu I1B ]
    L2(nu) = sqrt(2/q(nu)) nu S2U
    q(nu)  = (1-nu)^2 H22 + 2 nu (1-nu) HX + nu^2 H11,

linear numerators over the square root of a quadratic, so stationarity of
any weighted combination is a linear equation in nu and constrained
subproblems reduce to quadratics. This removes one search dimension and
makes the inner evaluations exact.
"""
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._search import logits_from_pmf, nm_maximize, pmf_from_logits
from .backend import BACKEND, kernels
from .errors import DegenerateDivergence, ZeroCapacity
from .info import kl_divergence
from .model import BcWardenModel, Channel, Distribution
from .rates import (
    RatePair,
    SuperpositionParams,
    rate_pair,
    single_user_capacity,
    ts_optimality_condition,
)

Q_FLOOR = 1e-15
_T_A, _I1B, _S2U, _H11, _H22, _HX = range(6)


@dataclass(frozen=True)
class OptimizerConfig:
    """Multi-start search settings; identical config + seed gives identical output."""

    restarts: int = 16
    weight_grid: int = 21
    local_iters: int = 400
    seed: int = 0
    tol: float = 1e-10

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class ParetoFront:
    """Non-dominated boundary samples, ordered by decreasing L1."""

    points: tuple
    params: tuple
    meta: dict = field(compare=False)

    def as_arrays(self):
        return np.array([[p.l1, p.l2] for p in self.points])


@dataclass(frozen=True)
class SweepRow:
    param: float
    l1_star: float
    l2_star: float
    sup_ratio: float
    condition_holds: bool
    gamma_star: float
    error: Optional[str] = None


def _q_of_nu(c6, nu):
    return (
        (1.0 - nu) ** 2 * c6[_H22]
        + 2.0 * nu * (1.0 - nu) * c6[_HX]
        + nu * nu * c6[_H11]
    )


def _rates_at_nu(c6, nu):
    q = _q_of_nu(c6, nu)
    if q <= Q_FLOOR:
        return 0.0, 0.0
    pref = math.sqrt(2.0 / q)
    return (
        pref * ((1.0 - nu) * c6[_T_A] + nu * c6[_I1B]),
        pref * nu * c6[_S2U],
    )


def _best_linear(c6, alpha, beta):
    """max over nu of (beta (1-nu) + alpha nu) sqrt(2/q(nu)); exact.

    The stationarity condition of a linear numerator over sqrt(quadratic) is
    linear in nu, so the maximum is among {0, 1, interior root}.
    """
    d = alpha - beta
    h11, h22, hx = c6[_H11], c6[_H22], c6[_HX]
    e = h11 - 2.0 * hx + h22
    cands = [0.0, 1.0]
    den = d * (hx - h22) - beta * e
    if den != 0.0:
        nu_s = (beta * (hx - h22) - d * h22) / den
        if 0.0 < nu_s < 1.0:
            cands.append(nu_s)
    best_v, best_nu = -math.inf, 0.0
    for nu in cands:
        q = _q_of_nu(c6, nu)
        if q <= Q_FLOOR:
            continue
        v = (beta * (1.0 - nu) + alpha * nu) * math.sqrt(2.0 / q)
        if v > best_v:
            best_v, best_nu = v, nu
    if best_v == -math.inf:
        return 0.0, 0.0
    return best_v, best_nu


def _weighted_value(c6, lam):
    """max over nu of L1 + lam L2 (lam = inf maximizes L2 alone)."""
    if math.isinf(lam):
        return _best_linear(c6, c6[_S2U], 0.0)
    return _best_linear(c6, c6[_I1B] + lam * c6[_S2U], c6[_T_A])


def _max_l2_at_l1(c6, target):
    """max over nu of L2(nu) subject to L1(nu) >= target; exact candidates.

    Returns (l2, nu) or None when infeasible. Candidates: the unconstrained
    L2 stationary point, nu in {0, 1}, and the roots of L1(nu) = target
    (a quadratic after squaring the prefactor).
    """
    t_a, i1b, s2u, h11, h22, hx = c6
    cands = [0.0, 1.0]
    den = s2u * (hx - h22)
    if den != 0.0:
        nu_s = -s2u * h22 / den
        if 0.0 < nu_s < 1.0:
            cands.append(nu_s)
    dd = i1b - t_a
    a2 = 2.0 * dd * dd - target * target * (h11 - 2.0 * hx + h22)
    a1 = 4.0 * t_a * dd - 2.0 * target * target * (hx - h22)
    a0 = 2.0 * t_a * t_a - target * target * h22
    if a2 != 0.0:
        disc = a1 * a1 - 4.0 * a2 * a0
        if disc >= 0.0:
            r = math.sqrt(disc)
            for nu in ((-a1 + r) / (2.0 * a2), (-a1 - r) / (2.0 * a2)):
                if 0.0 <= nu <= 1.0:
                    cands.append(nu)
    elif a1 != 0.0:
        nu = -a0 / a1
        if 0.0 <= nu <= 1.0:
            cands.append(nu)

    best = None
    for nu in cands:
        l1, l2 = _rates_at_nu(c6, nu)
        if l1 >= target - 1e-11 and (best is None or l2 > best[0]):
            best = (l2, nu)
    return best


class _Problem:
    """Model precomputation and logit packing for the distribution search."""

    def __init__(self, model: BcWardenModel):
        self.model = model
        self.p1 = model.p1.matrix
        self.p2 = model.p2.matrix
        self.q = model.q.matrix
        self.x0 = model.x0
        self.k = model.input_size
        self.others = [x for x in range(self.k) if x != self.x0]
        self.no = len(self.others)
        self.d1 = np.array([kl_divergence(self.p1[x], self.p1[self.x0]) for x in range(self.k)])
        self.d2 = np.array([kl_divergence(self.p2[x], self.p2[self.x0]) for x in range(self.k)])

    def dim(self, nb: int) -> int:
        return (self.no - 1) + (nb - 1) + nb * (self.k - 1)

    def unpack(self, theta: np.ndarray, nb: int):
        i = self.no - 1
        t = pmf_from_logits(theta[:i], self.no)
        ptilde = np.zeros(self.k)
        ptilde[self.others] = t
        w = pmf_from_logits(theta[i : i + nb - 1], nb)
        i += nb - 1
        rows = np.empty((nb, self.k))
        for u in range(nb):
            rows[u] = pmf_from_logits(theta[i : i + self.k - 1], self.k)
            i += self.k - 1
        return ptilde, w, rows

    def coeffs(self, ptilde, w, rows):
        return kernels.region_coeffs(
            ptilde, w, np.ascontiguousarray(rows),
            self.p1, self.p2, self.q, self.x0, self.d1, self.d2,
        )

    def vertex_logits(self, x: int) -> np.ndarray:
        z = np.full(self.k - 1, -8.0)
        if x < self.k - 1:
            z[x] = 8.0
        return z

    def ptilde_logits(self, pmf_full: np.ndarray) -> np.ndarray:
        return logits_from_pmf(np.asarray(pmf_full)[self.others])

    def starts(self, nb: int, rng: np.random.Generator, restarts: int,
               ptilde_hints: Sequence[np.ndarray] = (), extra: Sequence[np.ndarray] = ()):
        d = self.dim(nb)
        out = [np.zeros(d)]
        for hint in ptilde_hints:
            th = np.zeros(d)
            th[: self.no - 1] = self.ptilde_logits(hint)
            out.append(th)
        assignments = list(itertools.product(range(self.k), repeat=nb))
        if len(assignments) > 32:
            idx = rng.choice(len(assignments), size=32, replace=False)
            assignments = [assignments[i] for i in sorted(idx)]
        base_pt = self.ptilde_logits(ptilde_hints[0]) if ptilde_hints else np.zeros(self.no - 1)
        for assign in assignments:
            th = np.zeros(d)
            th[: self.no - 1] = base_pt
            i = (self.no - 1) + (nb - 1)
            for u in range(nb):
                th[i : i + self.k - 1] = self.vertex_logits(assign[u])
                i += self.k - 1
            out.append(th)
        out.extend(np.asarray(e, dtype=np.float64) for e in extra)
        for _ in range(restarts):
            out.append(rng.normal(scale=2.0, size=d))
        return out

    def support_start(self, nb: int, pmf_full: np.ndarray, ptilde_hint=None):
        """Start encoding a deterministic B layer matching pmf_full's support."""
        support = [x for x in range(self.k) if pmf_full[x] > 1e-9]
        if len(support) != nb:
            return None
        th = np.zeros(self.dim(nb))
        if ptilde_hint is not None:
            th[: self.no - 1] = self.ptilde_logits(ptilde_hint)
        w = np.asarray([pmf_full[x] for x in support])
        th[self.no - 1 : self.no - 1 + nb - 1] = logits_from_pmf(w / w.sum())
        i = (self.no - 1) + (nb - 1)
        for u, x in enumerate(support):
            th[i : i + self.k - 1] = self.vertex_logits(x)
            i += self.k - 1
        return th


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("COVERT_THREADS", "1")))
    except ValueError:
        return 1


def _run_multistart(problem: _Problem, value_of: Callable, config: OptimizerConfig,
                    start_sets: dict):
    """Maximize value_of(c6) over distributions for each |B|; deterministic merge.

    start_sets maps nb -> list of theta starting points.
    """

    def run(job):
        nb, theta0 = job

        def obj(theta):
            c6 = problem.coeffs(*problem.unpack(theta, nb))
            return value_of(c6)

        theta, val = nm_maximize(obj, theta0, maxiter=config.local_iters,
                                 xatol=config.tol, fatol=config.tol * 1e-2)
        return val, nb, theta

    jobs = [(nb, th) for nb, ths in sorted(start_sets.items()) for th in ths]
    nthreads = _threads()
    if nthreads > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    best = None
    for val, nb, theta in results:
        key = (val, -nb, tuple(-theta))
        if best is None or key > best[0]:
            best = (key, val, nb, theta)
    _, val, nb, theta = best
    return val, nb, theta


def _capacity_hints(model: BcWardenModel):
    """Single-user capacities and argmax pmfs; zeros where degenerate."""
    try:
        l1s, pt1 = single_user_capacity(model.p1, model.q, model.x0)
    except ZeroCapacity:
        l1s, pt1 = 0.0, None
    try:
        l2s, pt2 = single_user_capacity(model.p2, model.q, model.x0)
    except ZeroCapacity:
        l2s, pt2 = 0.0, None
    return l1s, pt1, l2s, pt2


def _finish(problem: _Problem, theta: np.ndarray, nb: int, nu: float):
    ptilde, w, rows = problem.unpack(theta, nb)
    params = SuperpositionParams(
        nu=float(min(max(nu, 0.0), 1.0)),
        ptilde_x_a=Distribution(ptilde),
        pu_b=Distribution(w),
        px_given_u_b=Channel(rows),
    )
    try:
        pair = rate_pair(problem.model, params)
    except DegenerateDivergence:
        pair = RatePair(0.0, 0.0)
    return pair, params


def maximize_weighted(model: BcWardenModel, weight: float,
                      config: OptimizerConfig = OptimizerConfig()):
    """Approximately maximize L1 + weight L2 (weight=inf maximizes L2 alone).

    Multi-start local search over the distribution parameters with the time
    split solved exactly; deterministic given config.seed. Returns the best
    (RatePair, SuperpositionParams) found.
    """
    if weight < 0.0:
        raise ValueError("weight must be nonnegative")
    problem = _Problem(model)
    rng = np.random.default_rng(config.seed)
    _, pt1, _, pt2 = _capacity_hints(model)
    hints = [p.probs for p in (pt1, pt2) if p is not None]

    start_sets = {}
    for nb in range(1, problem.k + 1):
        ths = problem.starts(nb, rng, config.restarts, ptilde_hints=hints)
        for hint in hints:
            sup = problem.support_start(nb, hint, ptilde_hint=hints[0])
            if sup is not None:
                ths.append(sup)
        start_sets[nb] = ths

    val, nb, theta = _run_multistart(
        problem, lambda c6: _weighted_value(c6, weight)[0], config, start_sets
    )
    _, nu = _weighted_value(problem.coeffs(*problem.unpack(theta, nb)), weight)
    return _finish(problem, theta, nb, nu)


def constrained_max_l2(model: BcWardenModel, l1_target: float,
                       config: OptimizerConfig = OptimizerConfig()):
    """Maximize L2 subject to L1 >= l1_target.

    Returns (RatePair, SuperpositionParams) or None when the target exceeds
    the achievable L1.
    """
    problem = _Problem(model)
    rng = np.random.default_rng(config.seed)
    _, pt1, _, pt2 = _capacity_hints(model)
    hints = [p.probs for p in (pt1, pt2) if p is not None]

    def value_of(c6):
        got = _max_l2_at_l1(c6, l1_target)
        return -1.0 if got is None else got[0]

    start_sets = {}
    for nb in range(1, problem.k + 1):
        ths = problem.starts(nb, rng, config.restarts, ptilde_hints=hints)
        for hint in hints:
            sup = problem.support_start(nb, hint, ptilde_hint=hints[0])
            if sup is not None:
                ths.append(sup)
        start_sets[nb] = ths

    val, nb, theta = _run_multistart(problem, value_of, config, start_sets)
    if val < 0.0:
        return None
    got = _max_l2_at_l1(problem.coeffs(*problem.unpack(theta, nb)), l1_target)
    if got is None:
        return None
    return _finish(problem, theta, nb, got[1])


def _endpoint_params(problem: _Problem, which: int, pt1, pt2):
    """Exact single-user corner parameter points."""
    k, x0 = problem.k, problem.x0
    if which == 1:
        rows = np.zeros((1, k))
        rows[0, x0] = 1.0
        return SuperpositionParams(0.0, pt1, Distribution(np.ones(1)), Channel(rows))
    support = [x for x in range(k) if pt2.probs[x] > 1e-9]
    rows = np.zeros((len(support), k))
    for u, x in enumerate(support):
        rows[u, x] = 1.0
    w = pt2.probs[support]
    return SuperpositionParams(1.0, pt1, Distribution(w / w.sum()), Channel(rows))


def _prune_nondominated(entries, tol: float = 1e-9):
    """Drop dominated/duplicate points; entries are (RatePair, params)."""
    kept = []
    ordered = sorted(entries, key=lambda e: (-e[0].l1, -e[0].l2))
    for pair, params in ordered:
        dominated = False
        for kp, _ in kept:
            if kp.l1 >= pair.l1 - tol and kp.l2 >= pair.l2 - tol:
                dominated = True
                break
        if not dominated:
            kept.append((pair, params))
    return kept


def pareto_boundary(model: BcWardenModel, config: OptimizerConfig = OptimizerConfig(),
                    points: int = 60) -> ParetoFront:
    """Sample the Pareto boundary of the achievable rate region.

    Combines a log-spaced scalarization sweep with constrained max-L2 passes
    on a uniform L1 grid (warm-started from neighboring solutions), merges,
    and prunes dominated points. Endpoints are the exact single-user corners.
    """
    if points < 2:
        raise ValueError("points must be >= 2")
    problem = _Problem(model)
    rng = np.random.default_rng(config.seed)
    l1s, pt1, l2s, pt2 = _capacity_hints(model)
    if pt1 is None or pt2 is None:
        raise ZeroCapacity("pareto boundary needs both single-user capacities positive")
    hints = [pt1.probs, pt2.probs]

    entries = []
    for which in (1, 2):
        p = _endpoint_params(problem, which, pt1, pt2)
        try:
            entries.append((rate_pair(model, p), p))
        except DegenerateDivergence:
            pass

    if points > 2:
        ratio = l1s / l2s if l2s > 0.0 else 1.0
        lam_grid = ratio * np.logspace(-2.0, 2.0, config.weight_grid)

        def sets_for(extra_by_nb):
            out = {}
            for nb in range(1, problem.k + 1):
                ths = problem.starts(nb, rng, max(2, config.restarts // 4),
                                     ptilde_hints=hints,
                                     extra=extra_by_nb.get(nb, []))
                sup = problem.support_start(nb, pt2.probs, ptilde_hint=pt1.probs)
                if sup is not None:
                    ths.append(sup)
                out[nb] = ths
            return out

        warm = {}
        for lam in lam_grid:
            val, nb, theta = _run_multistart(
                problem, lambda c6, lam=lam: _weighted_value(c6, lam)[0],
                config, sets_for(warm),
            )
            _, nu = _weighted_value(problem.coeffs(*problem.unpack(theta, nb)), lam)
            entries.append(_finish(problem, theta, nb, nu))
            warm = {nb: [theta]}

        targets = np.linspace(l1s, 0.0, points)[1:-1]
        warm = {}
        for target in targets:
            def value_of(c6, target=target):
                got = _max_l2_at_l1(c6, target)
                return -1.0 if got is None else got[0]

            val, nb, theta = _run_multistart(problem, value_of, config, sets_for(warm))
            if val >= 0.0:
                got = _max_l2_at_l1(problem.coeffs(*problem.unpack(theta, nb)), target)
                if got is not None:
                    entries.append(_finish(problem, theta, nb, got[1]))
                    warm = {nb: [theta]}

    kept = _prune_nondominated(entries)
    meta = {
        "restarts": config.restarts,
        "weight_grid": config.weight_grid,
        "local_iters": config.local_iters,
        "seed": config.seed,
        "tol": config.tol,
        "points_requested": points,
        "backend": BACKEND,
    }
    return ParetoFront(
        points=tuple(p for p, _ in kept),
        params=tuple(q for _, q in kept),
        meta=meta,
    )


def gamma_star(model: BcWardenModel, config: OptimizerConfig = OptimizerConfig()) -> float:
    """max over the region of L1/L1* + L2/L2*; >= 1 by time-sharing inclusion.

    When exactly one single-user capacity is zero the region degenerates to a
    segment on the other axis and the coefficient is 1 by convention; when
    both are zero ZeroCapacity is raised.
    """
    problem = _Problem(model)
    l1s, pt1, l2s, pt2 = _capacity_hints(model)
    if l1s <= 0.0 and l2s <= 0.0:
        raise ZeroCapacity("both single-user covert capacities are zero")
    if l1s <= 0.0 or l2s <= 0.0:
        return 1.0

    lam = l1s / l2s
    rng = np.random.default_rng(config.seed)
    hints = [pt1.probs, pt2.probs]
    start_sets = {}
    for nb in range(1, problem.k + 1):
        ths = problem.starts(nb, rng, config.restarts, ptilde_hints=hints)
        for hint in hints:
            sup = problem.support_start(nb, hint, ptilde_hint=pt1.probs)
            if sup is not None:
                ths.append(sup)
        start_sets[nb] = ths

    val, _, _ = _run_multistart(
        problem, lambda c6: _weighted_value(c6, lam)[0], config, start_sets
    )
    # exact single-user corners: gamma* can never honestly fall below 1
    for which in (1, 2):
        p = _endpoint_params(problem, which, pt1, pt2)
        c6 = problem.coeffs(p.ptilde_x_a.probs, p.pu_b.probs, p.px_given_u_b.matrix)
        val = max(val, _weighted_value(c6, lam)[0])
    return float(val / l1s)


def sweep(model_family: Callable[[float], BcWardenModel], param_values: Sequence[float],
          config: OptimizerConfig = OptimizerConfig()):
    """Evaluate the time-sharing condition and gamma* across a model family.

    Per-row failures are recorded in the row's error field and the sweep
    continues. Users are swapped per-row if needed so that L1* >= L2*.
    """
    rows = []
    for v in param_values:
        try:
            model = model_family(v)
            l1s, pt1, l2s, pt2 = _capacity_hints(model)
            if l1s < l2s:
                model = BcWardenModel(model.p2, model.p1, model.q, model.x0)
                l1s, l2s = l2s, l1s
            if l1s <= 0.0 and l2s <= 0.0:
                raise ZeroCapacity("both single-user covert capacities are zero")
            sup, holds = ts_optimality_condition(model, l1s, l2s)
            gam = gamma_star(model, config)
            rows.append(SweepRow(float(v), l1s, l2s, sup, holds, gam))
        except Exception as exc:  # noqa: BLE001 - per-row errors are recorded
            rows.append(SweepRow(float(v), math.nan, math.nan, math.nan, False,
                                 math.nan, error=f"{type(exc).__name__}: {exc}"))
    return tuple(rows)
