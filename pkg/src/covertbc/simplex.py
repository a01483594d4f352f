"""Self-contained phase-1 simplex for small dense linear feasibility problems.

Solves: does there exist x >= 0 with A x = b?  Problem sizes in this package
are at most a few dozen variables, so a dense tableau with Bland's rule
(which cannot cycle) is both simple and robust; no external LP solver is
needed.
"""
import numpy as np

PIVOT_TOL = 1e-11


def feasible_point(A, b, tol: float = 1e-9):
    """Return some x >= 0 with A x = b (within tol), or None if infeasible.

    Feasibility is decided by whether the phase-1 optimum (total artificial
    mass) is <= tol.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).copy()
    if A.ndim != 2 or b.ndim != 1 or A.shape[0] != b.size:
        raise ValueError(f"bad system shapes: A {A.shape}, b {b.shape}")
    m, n = A.shape

    T = np.empty((m, n + m + 1))
    T[:, :n] = A
    T[:, n:-1] = np.eye(m)
    T[:, -1] = b
    neg = b < 0.0
    T[neg, :] *= -1.0
    T[neg, n:-1] = np.eye(m)[neg]

    basis = np.arange(n, n + m)
    # reduced-cost row for min sum(artificials): z[j] = c_j - sum_i c_B[i] T[i, j]
    z = np.zeros(n + m)
    z[n:] = 1.0
    z -= T[:, :-1].sum(axis=0)

    max_iter = 100 * (n + m + 1)
    for _ in range(max_iter):
        entering = -1
        for j in range(n + m):  # Bland: smallest eligible index
            if z[j] < -PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            break
        col = T[:, entering]
        best_ratio, leave = np.inf, -1
        for i in range(m):
            if col[i] > PIVOT_TOL:
                r = T[i, -1] / col[i]
                if r < best_ratio - PIVOT_TOL or (
                    r < best_ratio + PIVOT_TOL and (leave < 0 or basis[i] < basis[leave])
                ):
                    best_ratio, leave = r, i
        if leave < 0:
            break  # unbounded cannot happen in phase 1; stop defensively
        piv = T[leave, entering]
        T[leave] /= piv
        for i in range(m):
            if i != leave and T[i, entering] != 0.0:
                T[i] -= T[i, entering] * T[leave]
        z -= z[entering] * T[leave, :-1]
        basis[leave] = entering

    obj = float(T[basis >= n, -1].sum())
    if obj > tol:
        return None

    # Drive leftover artificials out of the basis where a structural pivot exists.
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if abs(T[i, j]) > PIVOT_TOL:
                    piv = T[i, j]
                    T[i] /= piv
                    for r in range(m):
                        if r != i and T[r, j] != 0.0:
                            T[r] -= T[r, j] * T[i]
                    basis[i] = j
                    break

    x = np.zeros(n)
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i, -1]
    return np.where(x < 0.0, 0.0, x)
