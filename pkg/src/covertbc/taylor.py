"""Numerical verification of the small-perturbation calculus behind the
computable region.

The structured joint law places weight mu1 on an active auxiliary layer B
and, inside the quiet layer A, weight mu2 on inputs other than the zero
symbol. As mu1, mu2 -> 0 the exact mutual informations and the warden
divergence admit first/second-order expansions whose coefficients are
divergence sums and chi-squared forms; this module checks those formulas
against finite differences (with Richardson extrapolation) and checks the
n-scaled exact quantities against their limits along mu = eta / sqrt(n).

Evaluation is one-sided (mu >= 0): negative mu leaves the probability
simplex, so forward stencils are used throughout.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from .backend import kernels
from .model import BcWardenModel, Channel, Distribution


@dataclass(frozen=True)
class StructuredJoint:
    """Joint law of (U, X) with layer weights mu1 (active) and mu2 (quiet).

    pu_a / pu_b are pmfs over the quiet part A and active part B of the
    auxiliary alphabet; px_given_u_b holds P(X|U=u) for u in B, and
    ptilde_x_given_u_a the off-zero-symbol input laws for u in A.
    """

    mu1: float
    mu2: float
    pu_a: Distribution
    pu_b: Distribution
    px_given_u_b: Channel
    ptilde_x_given_u_a: Channel
    x0: int

    @property
    def input_size(self) -> int:
        return self.px_given_u_b.output_size

    def pu(self) -> np.ndarray:
        """Auxiliary marginal: (1-mu1) on A, mu1 on B; A symbols first."""
        return np.concatenate([(1.0 - self.mu1) * self.pu_a.probs,
                               self.mu1 * self.pu_b.probs])

    def px_given_u(self) -> np.ndarray:
        """Conditional input laws, one row per auxiliary symbol (A first)."""
        k = self.input_size
        na = len(self.pu_a)
        rows = np.empty((na + len(self.pu_b), k))
        for u in range(na):
            row = self.mu2 * self.ptilde_x_given_u_a.row(u).copy()
            row[self.x0] += 1.0 - self.mu2
            rows[u] = row
        rows[na:] = self.px_given_u_b.matrix
        return rows

    def joint_ux(self) -> np.ndarray:
        return self.pu()[:, None] * self.px_given_u()

    def marginal_x(self) -> np.ndarray:
        return self.pu() @ self.px_given_u()

    def layer_marginals(self):
        """(quiet-layer input pmf, active-layer input pmf), mu-independent."""
        ptilde_x_a = self.pu_a.probs @ self.ptilde_x_given_u_a.matrix
        px_b = self.pu_b.probs @ self.px_given_u_b.matrix
        return ptilde_x_a, px_b


def build_structured_joint(mu1: float, mu2: float, pu_a, pu_b, px_given_u_b,
                           ptilde_x_given_u_a, x0: int) -> StructuredJoint:
    """Validate inputs and assemble a StructuredJoint."""
    pu_a = pu_a if isinstance(pu_a, Distribution) else Distribution(np.asarray(pu_a, float))
    pu_b = pu_b if isinstance(pu_b, Distribution) else Distribution(np.asarray(pu_b, float))
    px_given_u_b = px_given_u_b if isinstance(px_given_u_b, Channel) else Channel(px_given_u_b)
    ptilde_x_given_u_a = (ptilde_x_given_u_a if isinstance(ptilde_x_given_u_a, Channel)
                          else Channel(ptilde_x_given_u_a))
    if not (0.0 <= mu1 <= 1.0 and 0.0 <= mu2 <= 1.0):
        raise ValueError(f"mu1 = {mu1}, mu2 = {mu2} must lie in [0, 1]")
    if px_given_u_b.input_size != len(pu_b):
        raise ValueError("px_given_u_b rows do not match pu_b")
    if ptilde_x_given_u_a.input_size != len(pu_a):
        raise ValueError("ptilde_x_given_u_a rows do not match pu_a")
    if ptilde_x_given_u_a.output_size != px_given_u_b.output_size:
        raise ValueError("layers disagree on the input alphabet size")
    if not 0 <= x0 < px_given_u_b.output_size:
        raise ValueError(f"x0 = {x0} outside the input alphabet")
    if ptilde_x_given_u_a.matrix[:, x0].any():
        raise ValueError("quiet-layer conditional laws must put zero mass on x0")
    return StructuredJoint(float(mu1), float(mu2), pu_a, pu_b,
                           px_given_u_b, ptilde_x_given_u_a, x0)


def _mi_u_y(sj: StructuredJoint, mat: np.ndarray) -> float:
    rows_y = np.ascontiguousarray(sj.px_given_u() @ mat)
    return kernels.mutual_information(np.ascontiguousarray(sj.pu()), rows_y)


def _mi_x_y(sj: StructuredJoint, mat: np.ndarray) -> float:
    return kernels.mutual_information(np.ascontiguousarray(sj.marginal_x()), mat)


def _cond_mi(sj: StructuredJoint, mat: np.ndarray) -> float:
    return kernels.conditional_mutual_information(
        np.ascontiguousarray(sj.pu()), np.ascontiguousarray(sj.px_given_u()), mat
    )


def _warden_div(sj: StructuredJoint, warden: np.ndarray) -> float:
    pz = sj.marginal_x() @ warden
    q0 = warden[sj.x0]
    if ((pz == 0.0) & (q0 > 0.0)).any():
        raise ValueError("warden output hits a zero where the null output is positive")
    return kernels.kl(np.ascontiguousarray(pz), q0)


def _at(sj: StructuredJoint, mu1: float, mu2: float) -> StructuredJoint:
    return replace(sj, mu1=mu1, mu2=mu2)


def _richardson_d1(f, h: float) -> float:
    """One-sided first derivative at 0 with one Richardson step: O(h^2)."""
    f0 = f(0.0)
    d_h = (f(h) - f0) / h
    d_h2 = (f(h / 2.0) - f0) / (h / 2.0)
    return 2.0 * d_h2 - d_h


def derivative_formulas(sj: StructuredJoint, channel) -> dict:
    """Closed-form first derivatives of the mutual informations at the origin."""
    mat = channel.matrix if isinstance(channel, Channel) else np.asarray(channel, float)
    x0row = mat[sj.x0]
    ptilde_x_a, px_b = sj.layer_marginals()
    d_rows = np.array([kernels.kl(np.ascontiguousarray(mat[x]), x0row)
                       for x in range(mat.shape[0])])
    mix_b = np.ascontiguousarray(sj.px_given_u_b.matrix @ mat)
    w = sj.pu_b.probs
    return {
        ("u", "mu1"): float(sum(w[u] * kernels.kl(mix_b[u], x0row) for u in range(len(w)))),
        ("u", "mu2"): 0.0,
        ("x", "mu1"): float(px_b @ d_rows),
        ("x", "mu2"): float(ptilde_x_a @ d_rows),
    }


def fd_mi_derivative_check(sj: StructuredJoint, channel, wrt: str = "mu1",
                           which: str = "u", h: float = 1e-4):
    """Finite-difference check of one mutual-information derivative at the origin.

    which: "u" for I(U;Y), "x" for I(X;Y); wrt: "mu1" or "mu2".
    Returns (fd_value, formula_value, abs_err).
    """
    if not 0.0 < h <= 1e-2:
        raise ValueError("h must lie in (0, 1e-2]")
    if wrt not in ("mu1", "mu2") or which not in ("u", "x"):
        raise ValueError(f"bad selector: which={which!r}, wrt={wrt!r}")
    mat = channel.matrix if isinstance(channel, Channel) else np.asarray(channel, float)
    mi = _mi_u_y if which == "u" else _mi_x_y

    if wrt == "mu1":
        f = lambda t: mi(_at(sj, t, 0.0), mat)  # noqa: E731
    else:
        f = lambda t: mi(_at(sj, 0.0, t), mat)  # noqa: E731
    fd = _richardson_d1(f, h)
    formula = derivative_formulas(sj, mat)[(which, wrt)]
    return fd, formula, abs(fd - formula)


@dataclass(frozen=True)
class HessianCheck:
    grad_fd: np.ndarray       # /mu1, /mu2 first differences (formula: both 0)
    hess_fd: np.ndarray       # 2x2 one-sided second differences
    hess_formula: np.ndarray  # [[chi2_B, cross], [cross, chi2_A]]
    max_rel_err: float


def fd_divergence_hessian_check(sj: StructuredJoint, warden, h: float = 1e-3) -> HessianCheck:
    """Check gradient (= 0) and Hessian of D(P_Z||Q0) at the origin.

    The Hessian entries are the chi-squared distances of the two layers'
    warden outputs from Q0 and their cross form. All stencils are forward
    (the domain is mu >= 0) with one Richardson step.
    """
    mat = warden.matrix if isinstance(warden, Channel) else np.asarray(warden, float)
    f = lambda m1, m2: _warden_div(_at(sj, m1, m2), mat)  # noqa: E731

    g1 = _richardson_d1(lambda t: f(t, 0.0), h)
    g2 = _richardson_d1(lambda t: f(0.0, t), h)

    def second(fline, step):
        a = (fline(2 * step) - 2 * fline(step) + fline(0.0)) / step**2
        b = (fline(step) - 2 * fline(step / 2) + fline(0.0)) / (step / 2) ** 2
        return 2.0 * b - a

    def cross(step):
        c = (f(step, step) - f(step, 0.0) - f(0.0, step) + f(0.0, 0.0)) / step**2
        d = (f(step / 2, step / 2) - f(step / 2, 0.0) - f(0.0, step / 2)
             + f(0.0, 0.0)) / (step / 2) ** 2
        return 2.0 * d - c

    h11 = second(lambda t: f(t, 0.0), h)
    h22 = second(lambda t: f(0.0, t), h)
    h12 = cross(h)
    hess_fd = np.array([[h11, h12], [h12, h22]])

    ptilde_x_a, px_b = sj.layer_marginals()
    q0 = mat[sj.x0]
    pz_a = np.ascontiguousarray(ptilde_x_a @ mat)
    pz_b = np.ascontiguousarray(px_b @ mat)
    hess_formula = np.array([
        [kernels.chi2(pz_b, q0), kernels.cross_chi2(pz_a, pz_b, q0)],
        [kernels.cross_chi2(pz_a, pz_b, q0), kernels.chi2(pz_a, q0)],
    ])
    denom = np.maximum(np.abs(hess_formula), 1e-12)
    max_rel = float(np.max(np.abs(hess_fd - hess_formula) / denom))
    return HessianCheck(np.array([g1, g2]), hess_fd, hess_formula, max_rel)


@dataclass(frozen=True)
class FirstOrderReport:
    """Convergence of n-scaled exact quantities to their first-order limits."""

    n_grid: tuple
    limits: dict          # name -> limiting value
    exact: dict           # name -> tuple of exact n-scaled values
    deviations: dict      # name -> tuple of |exact - limit|
    monotone: bool        # deviations non-increasing along the grid
    final_rel: float      # max relative deviation at the largest n

    @property
    def passed(self) -> bool:
        return self.monotone and self.final_rel <= 1e-2


def first_order_region_check(model: BcWardenModel, sj: StructuredJoint,
                             eta1: float, eta2: float,
                             n_grid=(10**3, 10**4, 10**5, 10**6)) -> FirstOrderReport:
    """Exactly evaluate sqrt(n) I(X;Y1|U), sqrt(n) I(U;Y2) and n D(P_Z||Q0)
    at mu_i = eta_i / sqrt(n) and compare with the first-order limits

        L1: eta1 [ sum_x pxB D1(x) - sum_u w_u D(P_Y1|U=u||P1[x0]) ] + eta2 sum_x ptilde D1(x)
        L2: eta1 sum_u w_u D(P_Y2|U=u||P2[x0])
        D : (eta1^2 chi2_B + 2 eta1 eta2 cross + eta2^2 chi2_A) / 2

    The covertness level is normalized to delta = 1. sj's own mu values are
    ignored; its distributions define the family.
    """
    if sj.input_size != model.input_size or sj.x0 != model.x0:
        raise ValueError("structured joint does not match the model")
    p1, p2, q = model.p1.matrix, model.p2.matrix, model.q.matrix

    df1 = derivative_formulas(sj, p1)
    df2 = derivative_formulas(sj, p2)
    ptilde_x_a, px_b = sj.layer_marginals()
    q0 = q[sj.x0]
    pz_a = np.ascontiguousarray(ptilde_x_a @ q)
    pz_b = np.ascontiguousarray(px_b @ q)
    limits = {
        "sqrt_n_I_XY1_given_U": eta1 * (df1[("x", "mu1")] - df1[("u", "mu1")])
        + eta2 * df1[("x", "mu2")],
        "sqrt_n_I_UY2": eta1 * df2[("u", "mu1")],
        "n_D": 0.5 * (eta1**2 * kernels.chi2(pz_b, q0)
                      + 2.0 * eta1 * eta2 * kernels.cross_chi2(pz_a, pz_b, q0)
                      + eta2**2 * kernels.chi2(pz_a, q0)),
    }

    exact = {name: [] for name in limits}
    for n in n_grid:
        s = math.sqrt(n)
        pt = _at(sj, eta1 / s, eta2 / s)
        exact["sqrt_n_I_XY1_given_U"].append(s * _cond_mi(pt, p1))
        exact["sqrt_n_I_UY2"].append(s * _mi_u_y(pt, p2))
        exact["n_D"].append(n * _warden_div(pt, q))

    deviations = {name: tuple(abs(v - limits[name]) for v in vals)
                  for name, vals in exact.items()}
    monotone = all(
        all(d[i + 1] <= d[i] + 1e-12 for i in range(len(d) - 1))
        for d in deviations.values()
    )
    final_rel = 0.0
    for name, d in deviations.items():
        lim = abs(limits[name])
        final_rel = max(final_rel, d[-1] / lim if lim > 1e-12 else d[-1])
    return FirstOrderReport(
        n_grid=tuple(n_grid),
        limits=limits,
        exact={k: tuple(v) for k, v in exact.items()},
        deviations=deviations,
        monotone=monotone,
        final_rel=final_rel,
    )


def random_structured_joint(model: BcWardenModel, rng: np.random.Generator,
                            nb: int | None = None) -> StructuredJoint:
    """Draw a random structured joint on the model's alphabets (singleton A).

    Used by the verification CLI and the test suite; all laws are Dirichlet(1)
    draws, strictly interior, with the quiet layer supported off x0.
    """
    k = model.input_size
    if nb is None:
        nb = int(rng.integers(1, k + 1))
    others = [x for x in range(k) if x != model.x0]
    pu_b = rng.dirichlet(np.ones(nb))
    rows_b = rng.dirichlet(np.ones(k), size=nb)
    ptilde = np.zeros((1, k))
    ptilde[0, others] = rng.dirichlet(np.ones(len(others)))
    return build_structured_joint(0.0, 0.0, np.ones(1), pu_b, rows_b, ptilde, model.x0)
