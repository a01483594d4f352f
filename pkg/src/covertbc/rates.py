"""Closed-form evaluation layer for the computable superposition-coding
region of a degraded broadcast channel with a warden.

A parameter point consists of a time split nu between the active (B) and
quiet (A) auxiliary layers, an input pmf for the quiet layer supported off
the zero symbol, and a pmf/conditional-law pair for the active layer. For
each such point the achievable covert-rate pair is

    L1 = sqrt(2/chi2(nu)) [ (1-nu) sum_x ptilde(x) D(P1[x]||P1[x0]) + nu I(X;Y1|U) ]
    L2 = sqrt(2/chi2(nu)) [ nu sum_x pxB(x) D(P2[x]||P2[x0]) - nu I(X;Y2|U) ]

with chi2(nu) the chi-squared distance of the nu-mixture of the two layers'
warden outputs from the null distribution Q0. Rates are per sqrt(n*delta)
and independent of the covertness level delta.
"""
import math
from dataclasses import dataclass

import numpy as np

from ._search import logits_from_pmf, nm_maximize, pmf_from_logits, simplex_grid
from .backend import kernels
from .errors import DegenerateDivergence, ZeroCapacity
from .info import kl_divergence
from .model import BcWardenModel, Channel, Distribution

CHI2_FLOOR = 1e-14
RATIO_SLACK = 1e-6


@dataclass(frozen=True)
class SuperpositionParams:
    """Decision variables of the computable region.

    nu           : time split in [0, 1] (weight of the active B layer)
    ptilde_x_a   : quiet-layer input pmf over the full input alphabet,
                   with zero mass at x0
    pu_b         : pmf over the active auxiliary symbols B (|B| <= |X|)
    px_given_u_b : |B| x |X| conditional input laws for the B layer
    """

    nu: float
    ptilde_x_a: Distribution
    pu_b: Distribution
    px_given_u_b: Channel

    def __post_init__(self):
        if not 0.0 <= self.nu <= 1.0:
            raise ValueError(f"nu = {self.nu} outside [0, 1]")
        if len(self.pu_b) != self.px_given_u_b.input_size:
            raise ValueError(
                f"pu_b has {len(self.pu_b)} symbols but px_given_u_b has "
                f"{self.px_given_u_b.input_size} rows"
            )
        if len(self.ptilde_x_a) != self.px_given_u_b.output_size:
            raise ValueError("ptilde_x_a and px_given_u_b disagree on |X|")


@dataclass(frozen=True)
class RatePair:
    """A pair of covert rates, nonnegative and finite."""

    l1: float
    l2: float

    def __post_init__(self):
        for name, v in (("l1", self.l1), ("l2", self.l2)):
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} = {v} must be finite and nonnegative")


def _check_params(model: BcWardenModel, params: SuperpositionParams):
    k = model.input_size
    if len(params.ptilde_x_a) != k:
        raise ValueError(f"ptilde_x_a has {len(params.ptilde_x_a)} entries for |X| = {k}")
    if params.ptilde_x_a[model.x0] != 0.0:
        raise ValueError(f"ptilde_x_a must put zero mass on x0 = {model.x0}")


def _layer_outputs(model: BcWardenModel, params: SuperpositionParams):
    q = model.q.matrix
    pz_a = params.ptilde_x_a.probs @ q
    px_b = params.pu_b.probs @ params.px_given_u_b.matrix
    pz_b = px_b @ q
    return pz_a, px_b, pz_b


def chi2_nu(model: BcWardenModel, params: SuperpositionParams) -> float:
    """chi-squared distance of the nu-mixed warden output from Q0.

    Equals nu^2 chi2(PzB||Q0) + (1-nu)^2 chi2(PzA||Q0) + 2 nu (1-nu) cross
    by bilinearity. Raises DegenerateDivergence when the mixture is
    indistinguishable from Q0 (<= 1e-14).
    """
    _check_params(model, params)
    pz_a, _, pz_b = _layer_outputs(model, params)
    q0 = model.q.row(model.x0)
    mix = (1.0 - params.nu) * pz_a + params.nu * pz_b
    val = kernels.chi2(np.ascontiguousarray(mix), q0)
    if val <= CHI2_FLOOR:
        raise DegenerateDivergence(
            f"chi2(nu={params.nu}) = {val}: both layers match the warden null output"
        )
    return val


def rate_pair(model: BcWardenModel, params: SuperpositionParams) -> RatePair:
    """Achievable covert-rate pair at the given parameter point."""
    _check_params(model, params)
    c2 = chi2_nu(model, params)
    pref = math.sqrt(2.0 / c2)
    nu = params.nu

    p1, p2 = model.p1.matrix, model.p2.matrix
    x0 = model.x0
    d1 = np.array([kl_divergence(p1[x], p1[x0]) for x in range(model.input_size)])
    d2 = np.array([kl_divergence(p2[x], p2[x0]) for x in range(model.input_size)])

    _, px_b, _ = _layer_outputs(model, params)
    pu = params.pu_b.probs
    rows = params.px_given_u_b.matrix
    i1b = kernels.conditional_mutual_information(pu, rows, p1)
    i2b = kernels.conditional_mutual_information(pu, rows, p2)

    l1 = pref * ((1.0 - nu) * float(params.ptilde_x_a.probs @ d1) + nu * i1b)
    l2 = pref * nu * (float(px_b @ d2) - i2b)
    return RatePair(max(l1, 0.0), max(l2, 0.0))


def _capacity_objective(d_on, q_on, q0):
    """Factory: pmf over the off-x0 symbols -> covert-rate value."""

    def value(t: np.ndarray) -> float:
        c2 = kernels.chi2(np.ascontiguousarray(t @ q_on), q0)
        if c2 <= CHI2_FLOOR:
            return 0.0
        return math.sqrt(2.0 / c2) * float(t @ d_on)

    return value


def single_user_capacity(marginal: Channel, warden: Channel, x0: int):
    """Covert capacity of one marginal channel against the warden.

    Maximizes sqrt(2/chi2(ptilde . warden || Q0)) * sum_x ptilde(x) D(row x||row x0)
    over pmfs ptilde supported off x0. Returns (value, argmax pmf over the
    full input alphabet). Raises ZeroCapacity when every divergence term is 0.
    """
    if marginal.input_size != warden.input_size:
        raise ValueError("marginal and warden disagree on the input alphabet")
    k = marginal.input_size
    if not 0 <= x0 < k:
        raise ValueError(f"x0 = {x0} outside input alphabet")
    others = [x for x in range(k) if x != x0]
    d = np.array([kl_divergence(marginal.row(x), marginal.row(x0)) for x in others])
    if not (d > 0.0).any():
        raise ZeroCapacity("all divergence terms vanish: covert capacity is 0")
    q_on = warden.matrix[others]
    q0 = warden.row(x0)
    value = _capacity_objective(d, q_on, q0)

    best_t, best_v = None, -np.inf
    for i in range(len(others)):  # vertices: sparse optima live here
        t = np.zeros(len(others))
        t[i] = 1.0
        v = value(t)
        if v > best_v:
            best_t, best_v = t, v
    if len(others) > 1:
        step = 1e-3 if len(others) == 2 else 2e-2
        for t in simplex_grid(len(others), step):
            v = value(t)
            if v > best_v:
                best_t, best_v = t, v
        x, v = nm_maximize(
            lambda z: value(pmf_from_logits(z, len(others))),
            logits_from_pmf(best_t),
            maxiter=600,
        )
        t = pmf_from_logits(x, len(others))
        if v > best_v:
            best_t, best_v = t, v

    pmf = np.zeros(k)
    pmf[others] = best_t
    return float(best_v), Distribution(pmf)


def ts_region_bound(l1_star: float, l2_star: float, point: RatePair) -> float:
    """L1/L1* + L2/L2*; the point lies in the time-sharing region iff <= 1."""
    if not (l1_star > 0.0 and l2_star > 0.0):
        raise ValueError("time-sharing bound needs strictly positive capacities")
    return point.l1 / l1_star + point.l2 / l2_star


def _batch_mi(grid: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """I(X;Y) for every input pmf in grid (N x |X|), vectorized."""
    with np.errstate(divide="ignore", invalid="ignore"):
        row_neg_ent = np.sum(np.where(mat > 0.0, mat * np.log(np.where(mat > 0.0, mat, 1.0)), 0.0), axis=1)
        py = grid @ mat
        out_ent = np.sum(np.where(py > 0.0, py * np.log(np.where(py > 0.0, py, 1.0)), 0.0), axis=1)
    return grid @ row_neg_ent - out_ent


def _pairwise_limit_ratios(p1: np.ndarray, p2: np.ndarray):
    """Directional vertex limits of I(X;Y1)/I(X;Y2): D1(x||x')/D2(x||x')."""
    k = p1.shape[0]
    sup = 0.0
    for xp in range(k):
        for x in range(k):
            if x == xp:
                continue
            d1 = kernels.kl(p1[x], p1[xp]) if not ((p1[x] > 0) & (p1[xp] == 0)).any() else math.inf
            d2 = kernels.kl(p2[x], p2[xp]) if not ((p2[x] > 0) & (p2[xp] == 0)).any() else math.inf
            if d2 <= 0.0:
                if d1 > 0.0:
                    return math.inf
                continue  # direction invisible to both users
            if math.isinf(d1):
                return math.inf
            sup = max(sup, d1 / d2)
    return sup


def ts_optimality_condition(model: BcWardenModel, l1_star: float, l2_star: float,
                            resolution: float = 0.005):
    """Estimate sup over input pmfs of I(X;Y1)/I(X;Y2) and test the
    time-sharing optimality condition L1*/L2* >= sup.

    The sup estimate combines the exact vertex limits (divergence ratios for
    every ordered symbol pair) with a step-`resolution` grid over the input
    simplex plus local refinement. When I(X;Y2) = 0 on a direction where
    I(X;Y1) > 0 the sup is +inf; the condition then holds only in the fully
    degenerate case l2_star = 0, where both sides are +inf.
    """
    p1, p2 = model.p1.matrix, model.p2.matrix
    sup = _pairwise_limit_ratios(p1, p2)

    if math.isfinite(sup):
        # Interior search. Points with I(X;Y2) below the floor are skipped:
        # there the ratio is within fp noise of a directional vertex limit,
        # which the pairwise terms above already contribute exactly.
        mi_floor = 1e-8
        k = model.input_size
        grid = simplex_grid(k, resolution)
        i1 = _batch_mi(grid, p1)
        i2 = _batch_mi(grid, p2)
        ok = i2 > mi_floor
        if ok.any():
            ratios = i1[ok] / i2[ok]
            j = int(np.argmax(ratios))
            sup = max(sup, float(ratios[j]))
            start = logits_from_pmf(grid[ok][j])

            def obj(z):
                px = pmf_from_logits(z, k)
                mi2 = kernels.mutual_information(px, p2)
                if mi2 <= mi_floor:
                    return -1.0
                return kernels.mutual_information(px, p1) / mi2

            _, refined = nm_maximize(obj, start, maxiter=400)
            sup = max(sup, float(refined))

    bound = math.inf if l2_star <= 0.0 else l1_star / l2_star
    holds = bound >= sup - RATIO_SLACK
    return sup, holds


def alpha_coefficients(nu: float, pz1_star, pz2_star, q0):
    """Time-sharing inclusion coefficients for capacity-achieving warden outputs.

    alpha1 = (1-nu) sqrt(chi2(pz1*||Q0) / chi2(mix||Q0)), alpha2 analogous,
    where mix = (1-nu) pz1* + nu pz2*. Their sum is >= 1 for every nu.
    """
    pz1 = pz1_star.probs if isinstance(pz1_star, Distribution) else np.asarray(pz1_star, float)
    pz2 = pz2_star.probs if isinstance(pz2_star, Distribution) else np.asarray(pz2_star, float)
    q0v = q0.probs if isinstance(q0, Distribution) else np.asarray(q0, float)
    mix = np.ascontiguousarray((1.0 - nu) * pz1 + nu * pz2)
    c_mix = kernels.chi2(mix, q0v)
    if c_mix <= CHI2_FLOOR:
        raise DegenerateDivergence(f"mixture chi2 = {c_mix} at nu = {nu}")
    a1 = (1.0 - nu) * math.sqrt(kernels.chi2(np.ascontiguousarray(pz1), q0v) / c_mix)
    a2 = nu * math.sqrt(kernels.chi2(np.ascontiguousarray(pz2), q0v) / c_mix)
    return a1, a2
