"""Information-theoretic functionals: KL divergence, chi-squared distance,
cross chi-squared form, output distributions, (conditional) mutual information.

All logarithms are natural, so divergences and mutual informations are in
nats. The 0 ln 0 = 0 convention is applied explicitly; support violations
raise typed errors instead of producing infinities.

Functions accept Distribution/Channel objects or plain array-likes and are
pure, so concurrent invocation is unrestricted.
"""
import numpy as np

from .backend import kernels
from .errors import AbsoluteContinuityViolation, DivisionSupportViolation
from .model import Channel, Distribution

EQ_TOL = 1e-12


def _vec(p) -> np.ndarray:
    if isinstance(p, Distribution):
        return p.probs
    return np.ascontiguousarray(p, dtype=np.float64)


def _mat(ch) -> np.ndarray:
    if isinstance(ch, Channel):
        return ch.matrix
    return np.ascontiguousarray(ch, dtype=np.float64)


def kl_divergence(p, q) -> float:
    """D(p||q) = sum_i p(i) ln(p(i)/q(i)) in nats.

    Requires p << q; raises AbsoluteContinuityViolation otherwise.
    """
    p, q = _vec(p), _vec(q)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {q.shape}")
    bad = (p > 0.0) & (q == 0.0)
    if bad.any():
        raise AbsoluteContinuityViolation(int(np.argmax(bad)))
    return max(kernels.kl(p, q), 0.0)


def chi2_distance(p, q) -> float:
    """chi-squared distance sum_i (p(i)-q(i))^2 / q(i)."""
    p, q = _vec(p), _vec(q)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {q.shape}")
    bad = (q == 0.0) & (p != q)
    if bad.any():
        raise DivisionSupportViolation(int(np.argmax(bad)))
    return kernels.chi2(p, q)


def cross_chi2(pa, pb, q) -> float:
    """Bilinear chi-squared form sum_i (pa(i)-q(i))(pb(i)-q(i))/q(i).

    Unlike chi2_distance this may be negative.
    """
    pa, pb, q = _vec(pa), _vec(pb), _vec(q)
    if pa.shape != q.shape or pb.shape != q.shape:
        raise ValueError(f"shape mismatch: {pa.shape}, {pb.shape} vs {q.shape}")
    bad = (q == 0.0) & ((pa != q) | (pb != q))
    if bad.any():
        raise DivisionSupportViolation(int(np.argmax(bad)))
    return kernels.cross_chi2(pa, pb, q)


def output_distribution(px, ch) -> Distribution:
    """Distribution induced at the channel output by input pmf px."""
    px, m = _vec(px), _mat(ch)
    if px.size != m.shape[0]:
        raise ValueError(f"input size {px.size} != channel input size {m.shape[0]}")
    return Distribution(kernels.output_dist(px, m))


def mutual_information(px, ch) -> float:
    """I(X;Y) in nats for input pmf px through channel ch."""
    px, m = _vec(px), _mat(ch)
    if px.size != m.shape[0]:
        raise ValueError(f"input size {px.size} != channel input size {m.shape[0]}")
    return kernels.mutual_information(px, m)


def conditional_mutual_information(pu, px_given_u, ch) -> float:
    """I(X;Y|U) = sum_u pu(u) I(X;Y|U=u), rows of px_given_u being P(X|U=u)."""
    pu, rows, m = _vec(pu), _mat(px_given_u), _mat(ch)
    if rows.shape[0] != pu.size:
        raise ValueError(f"px_given_u has {rows.shape[0]} rows for {pu.size} u-symbols")
    if rows.shape[1] != m.shape[0]:
        raise ValueError(f"conditional input size {rows.shape[1]} != channel input {m.shape[0]}")
    return kernels.conditional_mutual_information(pu, rows, m)
