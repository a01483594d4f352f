"""Pure-numpy kernels.

Same contract as the compiled extension ``covertbc._kernels``: inputs are
assumed valid (support conditions already checked by callers), terms with
p(i) = 0 contribute 0, and all logarithms are natural.
"""
import numpy as np

BACKEND = "python"


def kl(p, q):
    """sum_i p(i) ln(p(i)/q(i)) with the 0 ln 0 = 0 convention."""
    m = p > 0.0
    if not m.any():
        return 0.0
    return float(np.dot(p[m], np.log(p[m] / q[m])))


def chi2(p, q):
    """sum_i (p(i)-q(i))^2 / q(i)."""
    d = p - q
    m = d != 0.0
    if not m.any():
        return 0.0
    return float(np.dot(d[m], d[m] / q[m]))


def cross_chi2(pa, pb, q):
    """sum_i (pa(i)-q(i)) (pb(i)-q(i)) / q(i); may be negative."""
    da = pa - q
    db = pb - q
    m = (da != 0.0) & (db != 0.0)
    if not m.any():
        return 0.0
    return float(np.dot(da[m], db[m] / q[m]))


def output_dist(px, mat):
    """Output distribution px @ mat."""
    return px @ mat


def mutual_information(px, mat):
    """I(X;Y) = sum_x px(x) D(mat[x] || px @ mat), clamped at 0."""
    py = px @ mat
    total = 0.0
    for x in range(mat.shape[0]):
        if px[x] > 0.0:
            total += px[x] * kl(mat[x], py)
    return max(total, 0.0)


def conditional_mutual_information(pu, rows, mat):
    """I(X;Y|U) = sum_u pu(u) I(X;Y|U=u) for rows[u] = P(X|U=u)."""
    total = 0.0
    for u in range(rows.shape[0]):
        if pu[u] > 0.0:
            total += pu[u] * mutual_information(rows[u], mat)
    return max(total, 0.0)


def region_coeffs(ptilde, w, rows, p1, p2, q, x0, d1, d2):
    """Scalar coefficients of the superposition rate region for one parameter point.

    ptilde : pmf over X (zero mass at x0), the quiet-layer input law
    w      : pmf over the active auxiliary symbols B
    rows   : |B| x |X| conditional input laws P(X|U=u)
    d1, d2 : precomputed D(Pk[x] || Pk[x0]) vectors

    Returns (t_a, i1b, s2u, h11, h22, hx):
      t_a  = sum_x ptilde(x) d1(x)
      i1b  = I(X;Y1|U) first-order coefficient  (= sum_x pxB d1 - sum_u w_u D(P_Y1|U=u || P1[x0]))
      s2u  = sum_u w_u D(P_Y2|U=u || P2[x0])    (the user-2 rate coefficient)
      h11  = chi2(P_Z^B || Q0), h22 = chi2(P_Z^A || Q0), hx = cross term
    """
    q0 = q[x0]
    t_a = float(ptilde @ d1)
    px_b = w @ rows
    pz_b = px_b @ q
    pz_a = ptilde @ q
    h11 = chi2(pz_b, q0)
    h22 = chi2(pz_a, q0)
    hx = cross_chi2(pz_a, pz_b, q0)
    mix1 = rows @ p1
    mix2 = rows @ p2
    i1b = float(px_b @ d1)
    s2u = 0.0
    for u in range(rows.shape[0]):
        if w[u] > 0.0:
            i1b -= w[u] * kl(mix1[u], p1[x0])
            s2u += w[u] * kl(mix2[u], p2[x0])
    return t_a, max(i1b, 0.0), max(s2u, 0.0), h11, h22, hx
