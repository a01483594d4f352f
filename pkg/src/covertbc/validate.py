"""Model validation: the standing non-redundancy/absolute-continuity
conditions and stochastic degradedness between the two receivers.

Both checks reduce to small dense linear-feasibility problems solved by the
package's phase-1 simplex. Support (absolute-continuity) checks use exact
zeros on the loaded, renormalized matrices: supports are structural, not
approximate.
"""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import BcWardenModel, Channel
from .simplex import feasible_point

HULL_TOL = 1e-9
DEGRADE_TOL = 1e-9
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class ConditionsReport:
    """Truth values of the standing model conditions.

    a: the zero symbol is not redundant at the warden (Q0 outside the convex
       hull of the other warden rows),
    b: every warden row is absolutely continuous w.r.t. Q0,
    c (per user): every receiver row is absolutely continuous w.r.t. row x0.

    violations holds (condition, offending index pair) entries; it is empty
    exactly when all four flags are true.
    """

    cond_a: bool
    cond_b: bool
    cond_c_user1: bool
    cond_c_user2: bool
    violations: tuple = field(default_factory=tuple)

    @property
    def all_hold(self) -> bool:
        return self.cond_a and self.cond_b and self.cond_c_user1 and self.cond_c_user2

    def to_dict(self) -> dict:
        return {
            "cond_a": self.cond_a,
            "cond_b": self.cond_b,
            "cond_c_user1": self.cond_c_user1,
            "cond_c_user2": self.cond_c_user2,
            "violations": [list(v) for v in self.violations],
        }


@dataclass(frozen=True)
class DegradationCertificate:
    """Witness for P2 = P1 W with W row-stochastic, or an infeasibility marker."""

    feasible: bool
    w: Optional[Channel]
    residual: float

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "residual": self.residual if math.isfinite(self.residual) else None,
            "W": self.w.matrix.tolist() if self.w is not None else None,
        }


def _support_violations(rows: np.ndarray, ref: np.ndarray, cond: str):
    out = []
    zero = ref == 0.0
    if not zero.any():
        return out
    for x in range(rows.shape[0]):
        bad = zero & (rows[x] > 0.0)
        if bad.any():
            out.append((cond, (x, int(np.argmax(bad)))))
    return out


def check_conditions(model: BcWardenModel) -> ConditionsReport:
    """Evaluate conditions a/b/c; never raises, failures land in the report."""
    q = model.q.matrix
    q0 = q[model.x0]
    others = [x for x in range(model.input_size) if x != model.x0]

    # a) is Q0 a convex combination of the other rows? Membership within
    # tolerance counts as "in hull", i.e. the condition conservatively fails.
    if others:
        A = np.vstack([q[others].T, np.ones((1, len(others)))])
        b = np.concatenate([q0, [1.0]])
        in_hull = feasible_point(A, b, tol=HULL_TOL) is not None
    else:
        in_hull = False
    violations = [] if not in_hull else [("a", None)]

    violations += _support_violations(q, q0, "b")
    violations += _support_violations(model.p1.matrix, model.p1.row(model.x0), "c1")
    violations += _support_violations(model.p2.matrix, model.p2.row(model.x0), "c2")

    flags = {c: all(v[0] != c for v in violations) for c in ("a", "b", "c1", "c2")}
    return ConditionsReport(
        cond_a=flags["a"],
        cond_b=flags["b"],
        cond_c_user1=flags["c1"],
        cond_c_user2=flags["c2"],
        violations=tuple(violations),
    )


def find_degrading_channel(p1: Channel, p2: Channel) -> DegradationCertificate:
    """Solve {W >= 0, W 1 = 1, P1 W = P2} for a post-channel W.

    Returns any feasible witness; feasibility is decided with constraint
    tolerance 1e-9. Entries in [-1e-12, 0) are clamped to 0 on output.
    """
    if p1.input_size != p2.input_size:
        raise ValueError(
            f"input alphabet mismatch: {p1.input_size} vs {p2.input_size}"
        )
    m1, m2 = p1.matrix, p2.matrix
    k = m1.shape[0]
    n1, n2 = m1.shape[1], m2.shape[1]

    # Variables: W flattened row-major (n1 x n2).
    n_eq = k * n2 + n1
    A = np.zeros((n_eq, n1 * n2))
    b = np.zeros(n_eq)
    r = 0
    for i in range(k):
        for j in range(n2):
            A[r, j::n2] = m1[i]
            b[r] = m2[i, j]
            r += 1
    for l in range(n1):
        A[r, l * n2 : (l + 1) * n2] = 1.0
        b[r] = 1.0
        r += 1

    x = feasible_point(A, b, tol=DEGRADE_TOL)
    if x is None:
        return DegradationCertificate(feasible=False, w=None, residual=math.inf)
    w = x.reshape(n1, n2)
    w[(w < 0.0) & (w >= -1e-12)] = 0.0
    residual = float(np.abs(m1 @ w - m2).max())
    return DegradationCertificate(feasible=True, w=Channel(w), residual=residual)
