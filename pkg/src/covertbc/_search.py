"""Shared simplex-search helpers: logit parametrization of pmfs, simplex
grids, and a thin Nelder-Mead wrapper.

Pmfs are searched through an unconstrained exponential-map (softmax with the
last logit pinned to 0), which keeps iterates strictly interior; boundary
optima are covered separately by vertex enumeration in the callers.
"""
import numpy as np
from scipy.optimize import minimize


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - np.max(z)
    e = np.exp(z)
    return e / e.sum()


def pmf_from_logits(free_logits: np.ndarray, size: int) -> np.ndarray:
    """Map size-1 free logits to a strictly positive pmf of length size."""
    z = np.zeros(size)
    z[: size - 1] = free_logits
    return softmax(z)


def logits_from_pmf(p: np.ndarray, floor: float = 1e-9) -> np.ndarray:
    """Inverse of pmf_from_logits up to the floor on zero entries."""
    q = np.maximum(np.asarray(p, dtype=np.float64), floor)
    z = np.log(q)
    return (z - z[-1])[:-1]


def simplex_grid(dim: int, step: float) -> np.ndarray:
    """All pmfs on a dim-point alphabet with entries on a step-grid."""
    g = max(int(round(1.0 / step)), 1)
    if dim == 1:
        return np.ones((1, 1))
    out = []

    def rec(prefix, left):
        if len(prefix) == dim - 1:
            out.append(prefix + [left])
            return
        for i in range(left + 1):
            rec(prefix + [i], left - i)

    rec([], g)
    return np.asarray(out, dtype=np.float64) / g


def nm_maximize(fun, x0: np.ndarray, maxiter: int, xatol: float = 1e-10, fatol: float = 1e-12):
    """Nelder-Mead maximization; returns (x_best, value_best)."""
    if x0.size == 0:
        return x0, fun(x0)
    res = minimize(
        lambda t: -fun(t),
        x0,
        method="Nelder-Mead",
        options={"maxiter": maxiter, "xatol": xatol, "fatol": fatol},
    )
    return res.x, -res.fun
