"""Independent oracles for the test suite.

Everything here is written directly against raw numpy mass arrays with
explicit loops and math.log2: literal transcriptions of the bound formulas,
brute-force graph closure for the common part, entropy-based mutual
information, Monte-Carlo integration for the normal CDF, and an exhaustive
codebook-ensemble enumeration for the tiny point-to-point check.  None of it
shares code paths with the package under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

LOG2 = math.log2


def _ratio_log2(num: float, den: float) -> float:
    if num <= 0.0:
        return -math.inf
    return LOG2(num / den)


# ---------------------------------------------------------------------------
# bound transcriptions (correct-probability lower bounds)
# ---------------------------------------------------------------------------


def p2p_correct(mass: np.ndarray, m: int) -> float:
    p_x = mass.sum(axis=1)
    p_y = mass.sum(axis=0)
    total = 0.0
    for x, y in itertools.product(range(mass.shape[0]), range(mass.shape[1])):
        p = mass[x, y]
        if p <= 0:
            continue
        iota = LOG2(p / (p_x[x] * p_y[y]))
        total += p / (1.0 + (m - 1) * 2.0 ** (-iota))
    return total


def gp_correct(mass: np.ndarray, m: int, j: int) -> float:
    # mass axes (U, S, X, Y)
    p_usy = mass.sum(axis=2)
    p_us = p_usy.sum(axis=2)
    p_uy = p_usy.sum(axis=1)
    p_u = p_us.sum(axis=1)
    p_s = p_us.sum(axis=0)
    p_y = p_uy.sum(axis=0)
    total = 0.0
    nu, ns, ny = p_usy.shape
    for u, s, y in itertools.product(range(nu), range(ns), range(ny)):
        p = p_usy[u, s, y]
        if p <= 0:
            continue
        i_us = LOG2(p_us[u, s] / (p_u[u] * p_s[s]))
        i_uy = LOG2(p_uy[u, y] / (p_u[u] * p_y[y]))
        total += p / ((1.0 + 2.0 ** i_us / j) * (1.0 + m * j * 2.0 ** (-i_uy)))
    return total


def gp_error_ub(mass: np.ndarray, m: int, j: int, gamma: float) -> float:
    p_usy = mass.sum(axis=2)
    p_us = p_usy.sum(axis=2)
    p_uy = p_usy.sum(axis=1)
    p_u = p_us.sum(axis=1)
    p_s = p_us.sum(axis=0)
    p_y = p_uy.sum(axis=0)
    prob = 0.0
    nu, ns, ny = p_usy.shape
    for u, s, y in itertools.product(range(nu), range(ns), range(ny)):
        p = p_usy[u, s, y]
        if p <= 0:
            continue
        i_us = LOG2(p_us[u, s] / (p_u[u] * p_s[s]))
        i_uy = LOG2(p_uy[u, y] / (p_u[u] * p_y[y]))
        if (LOG2(j) - i_us < gamma) or (i_uy - LOG2(m * j) < gamma):
            prob += p
    return min(1.0, prob + 3.0 * 2.0 ** (-gamma))


def marton2_correct(mass: np.ndarray, m1, m2, j1, j2) -> float:
    # mass axes (U1, U2, X, Y1, Y2)
    p = mass.sum(axis=2)  # (U1, U2, Y1, Y2)
    p_uu = p.sum(axis=(2, 3))
    p_u1 = p_uu.sum(axis=1)
    p_u2 = p_uu.sum(axis=0)
    p_u1y1 = p.sum(axis=(1, 3))
    p_u2y2 = p.sum(axis=(0, 2))
    p_y1 = p_u1y1.sum(axis=0)
    p_y2 = p_u2y2.sum(axis=0)
    total = 0.0
    for u1, u2, y1, y2 in itertools.product(*(range(s) for s in p.shape)):
        w = p[u1, u2, y1, y2]
        if w <= 0:
            continue
        i_uu = LOG2(p_uu[u1, u2] / (p_u1[u1] * p_u2[u2]))
        i_1 = LOG2(p_u1y1[u1, y1] / (p_u1[u1] * p_y1[y1]))
        i_2 = LOG2(p_u2y2[u2, y2] / (p_u2[u2] * p_y2[y2]))
        denom = (
            (1.0 + 2.0 ** i_uu / (j1 * j2))
            * (1.0 + m1 * j1 * 2.0 ** (-i_1))
            * (1.0 + m2 * j2 * 2.0 ** (-i_2))
        )
        total += w / denom
    return total


def marton2_error_ub(mass, m1, m2, j1, j2, gamma) -> float:
    p = mass.sum(axis=2)
    p_uu = p.sum(axis=(2, 3))
    p_u1 = p_uu.sum(axis=1)
    p_u2 = p_uu.sum(axis=0)
    p_u1y1 = p.sum(axis=(1, 3))
    p_u2y2 = p.sum(axis=(0, 2))
    p_y1 = p_u1y1.sum(axis=0)
    p_y2 = p_u2y2.sum(axis=0)
    prob = 0.0
    for u1, u2, y1, y2 in itertools.product(*(range(s) for s in p.shape)):
        w = p[u1, u2, y1, y2]
        if w <= 0:
            continue
        i_uu = LOG2(p_uu[u1, u2] / (p_u1[u1] * p_u2[u2]))
        i_1 = LOG2(p_u1y1[u1, y1] / (p_u1[u1] * p_y1[y1]))
        i_2 = LOG2(p_u2y2[u2, y2] / (p_u2[u2] * p_y2[y2]))
        if (
            LOG2(j1 * j2) - i_uu < gamma
            or i_1 - LOG2(m1 * j1) < gamma
            or i_2 - LOG2(m2 * j2) < gamma
        ):
            prob += w
    return min(1.0, prob + 7.0 * 2.0 ** (-gamma))


def _marton3_densities(mass):
    # mass axes (U0, U1, U2, X, Y1, Y2)
    p = mass.sum(axis=3)  # (U0, U1, U2, Y1, Y2)
    p_uuu = p.sum(axis=(3, 4))
    p_u0 = p_uuu.sum(axis=(1, 2))
    p_u01 = p_uuu.sum(axis=2)
    p_u02 = p_uuu.sum(axis=1)
    p_01y = p.sum(axis=(2, 4))  # (U0, U1, Y1)
    p_02y = p.sum(axis=(1, 3))  # (U0, U2, Y2)
    p_y1 = p_01y.sum(axis=(0, 1))
    p_y2 = p_02y.sum(axis=(0, 1))
    return p, p_uuu, p_u0, p_u01, p_u02, p_01y, p_02y, p_y1, p_y2


def marton3_correct(mass, m0, m1, m2, j1, j2) -> float:
    p, p_uuu, p_u0, p_u01, p_u02, p_01y, p_02y, p_y1, p_y2 = _marton3_densities(mass)
    total = 0.0
    for u0, u1, u2, y1, y2 in itertools.product(*(range(s) for s in p.shape)):
        w = p[u0, u1, u2, y1, y2]
        if w <= 0:
            continue
        i_uu0 = LOG2(
            (p_uuu[u0, u1, u2] * p_u0[u0]) / (p_u01[u0, u1] * p_u02[u0, u2])
        )
        i_1p = LOG2((p_01y[u0, u1, y1] * p_u0[u0]) / (p_u01[u0, u1] * p_01y.sum(axis=1)[u0, y1]))
        i_1f = LOG2(p_01y[u0, u1, y1] / (p_u01[u0, u1] * p_y1[y1]))
        i_2p = LOG2((p_02y[u0, u2, y2] * p_u0[u0]) / (p_u02[u0, u2] * p_02y.sum(axis=1)[u0, y2]))
        i_2f = LOG2(p_02y[u0, u2, y2] / (p_u02[u0, u2] * p_y2[y2]))
        denom = (
            (1.0 + 2.0 ** i_uu0 / (j1 * j2))
            * (1.0 + m1 * j1 * 2.0 ** (-i_1p) + m0 * j1 * m1 * 2.0 ** (-i_1f))
            * (1.0 + m2 * j2 * 2.0 ** (-i_2p) + m0 * j2 * m2 * 2.0 ** (-i_2f))
        )
        total += w / denom
    return total


def marton3_error_ub(mass, m0, m1, m2, j1, j2, gamma) -> float:
    p, p_uuu, p_u0, p_u01, p_u02, p_01y, p_02y, p_y1, p_y2 = _marton3_densities(mass)
    p_0y1 = p_01y.sum(axis=1)
    p_0y2 = p_02y.sum(axis=1)
    prob = 0.0
    for u0, u1, u2, y1, y2 in itertools.product(*(range(s) for s in p.shape)):
        w = p[u0, u1, u2, y1, y2]
        if w <= 0:
            continue
        i_uu0 = LOG2((p_uuu[u0, u1, u2] * p_u0[u0]) / (p_u01[u0, u1] * p_u02[u0, u2]))
        i_1p = LOG2((p_01y[u0, u1, y1] * p_u0[u0]) / (p_u01[u0, u1] * p_0y1[u0, y1]))
        i_1f = LOG2(p_01y[u0, u1, y1] / (p_u01[u0, u1] * p_y1[y1]))
        i_2p = LOG2((p_02y[u0, u2, y2] * p_u0[u0]) / (p_u02[u0, u2] * p_0y2[u0, y2]))
        i_2f = LOG2(p_02y[u0, u2, y2] / (p_u02[u0, u2] * p_y2[y2]))
        if (
            LOG2(j1 * j2) - i_uu0 < gamma
            or i_1p - LOG2(m1 * j1) < gamma
            or i_1f - LOG2(m0 * m1 * j1) < gamma
            or i_2p - LOG2(m2 * j2) < gamma
            or i_2f - LOG2(m0 * m2 * j2) < gamma
        ):
            prob += w
    return min(1.0, prob + 17.0 * 2.0 ** (-gamma))


def bt_correct(mass, r1, r2, d1, lvl1, d2, lvl2, m1, m2, j1, j2) -> float:
    # mass axes (S1, S2, U1, U2); r_k index maps over (U1, U2)
    p_s1u1 = mass.sum(axis=(1, 3))
    p_s2u2 = mass.sum(axis=(0, 2))
    p_uu = mass.sum(axis=(0, 1))
    p_s1 = p_s1u1.sum(axis=1)
    p_s2 = p_s2u2.sum(axis=1)
    p_u1 = p_uu.sum(axis=1)
    p_u2 = p_uu.sum(axis=0)
    total = 0.0
    for s1, s2, u1, u2 in itertools.product(*(range(s) for s in mass.shape)):
        w = mass[s1, s2, u1, u2]
        if w <= 0:
            continue
        if d1[s1, r1[u1, u2]] > lvl1 or d2[s2, r2[u1, u2]] > lvl2:
            continue
        i_1 = LOG2(p_s1u1[s1, u1] / (p_s1[s1] * p_u1[u1]))
        i_2 = LOG2(p_s2u2[s2, u2] / (p_s2[s2] * p_u2[u2]))
        i_uu = _ratio_log2(p_uu[u1, u2], p_u1[u1] * p_u2[u2])
        denom = (
            (1.0 + 2.0 ** i_1 / j1)
            * (1.0 + 2.0 ** i_2 / j2)
            * (1.0 + (j2 / m2 + j1 / m1 + j1 * j2 / (m1 * m2)) * 2.0 ** (-i_uu))
        )
        total += w / denom
    return total


def bt_error_ub(mass, r1, r2, d1, lvl1, d2, lvl2, m1, m2, j1, j2, gamma) -> float:
    p_s1u1 = mass.sum(axis=(1, 3))
    p_s2u2 = mass.sum(axis=(0, 2))
    p_uu = mass.sum(axis=(0, 1))
    p_s1 = p_s1u1.sum(axis=1)
    p_s2 = p_s2u2.sum(axis=1)
    p_u1 = p_uu.sum(axis=1)
    p_u2 = p_uu.sum(axis=0)
    prob = 0.0
    for s1, s2, u1, u2 in itertools.product(*(range(s) for s in mass.shape)):
        w = mass[s1, s2, u1, u2]
        if w <= 0:
            continue
        i_1 = LOG2(p_s1u1[s1, u1] / (p_s1[s1] * p_u1[u1]))
        i_2 = LOG2(p_s2u2[s2, u2] / (p_s2[s2] * p_u2[u2]))
        i_uu = _ratio_log2(p_uu[u1, u2], p_u1[u1] * p_u2[u2])
        if (
            d1[s1, r1[u1, u2]] > lvl1
            or d2[s2, r2[u1, u2]] > lvl2
            or LOG2(j1) - i_1 < gamma
            or LOG2(j2) - i_2 < gamma
            or i_uu - LOG2(j1 * j2 / (m1 * m2)) < gamma
        ):
            prob += w
    return min(1.0, prob + 15.0 * 2.0 ** (-gamma))


def hb_correct(mass, r1, r2, d1, lvl1, d2, lvl2, m1, m2, j2) -> float:
    # mass axes (S, Y, W, U); r1 over (W,), r2 over (W, U, Y)
    p_sw = mass.sum(axis=(1, 3))
    p_swu = mass.sum(axis=1)
    p_wuy = mass.sum(axis=0).transpose(1, 2, 0)  # (W, U, Y)
    p_s = p_sw.sum(axis=1)
    p_w = p_sw.sum(axis=0)
    p_wu = p_swu.sum(axis=0)
    p_wy = p_wuy.sum(axis=1)
    total = 0.0
    for s, y, w_, u in itertools.product(*(range(k) for k in mass.shape)):
        w = mass[s, y, w_, u]
        if w <= 0:
            continue
        if d1[s, r1[w_]] > lvl1 or d2[s, r2[w_, u, y]] > lvl2:
            continue
        i_sw = LOG2(p_sw[s, w_] / (p_s[s] * p_w[w_]))
        i_swu = LOG2(p_swu[s, w_, u] / (p_s[s] * p_wu[w_, u]))
        i_yu_w = LOG2((p_wuy[w_, u, y] * p_w[w_]) / (p_wu[w_, u] * p_wy[w_, y]))
        denom = (1.0 + 2.0 ** i_sw / m1 + 2.0 ** i_swu / (m1 * j2)) * (
            1.0 + (j2 / m2) * 2.0 ** (-i_yu_w)
        )
        total += w / denom
    return total


def hb_error_ub(mass, r1, r2, d1, lvl1, d2, lvl2, m1, m2, j2, gamma) -> float:
    p_sw = mass.sum(axis=(1, 3))
    p_swu = mass.sum(axis=1)
    p_wuy = mass.sum(axis=0).transpose(1, 2, 0)
    p_s = p_sw.sum(axis=1)
    p_w = p_sw.sum(axis=0)
    p_wu = p_swu.sum(axis=0)
    p_wy = p_wuy.sum(axis=1)
    prob = 0.0
    for s, y, w_, u in itertools.product(*(range(k) for k in mass.shape)):
        w = mass[s, y, w_, u]
        if w <= 0:
            continue
        i_sw = LOG2(p_sw[s, w_] / (p_s[s] * p_w[w_]))
        i_swu = LOG2(p_swu[s, w_, u] / (p_s[s] * p_wu[w_, u]))
        i_yu_w = LOG2((p_wuy[w_, u, y] * p_w[w_]) / (p_wu[w_, u] * p_wy[w_, y]))
        if (
            d1[s, r1[w_]] > lvl1
            or d2[s, r2[w_, u, y]] > lvl2
            or LOG2(m1) - i_sw < gamma
            or LOG2(m1 * j2) - i_swu < gamma
            or i_yu_w - LOG2(j2 / m2) < gamma
        ):
            prob += w
    return min(1.0, prob + 5.0 * 2.0 ** (-gamma))


def _md_densities(mass):
    # mass axes (S, U0, U1, U2)
    p_s = mass.sum(axis=(1, 2, 3))
    p_su0 = mass.sum(axis=(2, 3))
    p_su01 = mass.sum(axis=3)
    p_su02 = mass.sum(axis=2)
    p_u0 = p_su0.sum(axis=0)
    p_u01 = p_su01.sum(axis=0)
    p_u02 = p_su02.sum(axis=0)
    p_u = mass.sum(axis=0)
    return p_s, p_su0, p_su01, p_su02, p_u0, p_u01, p_u02, p_u


def md_correct(mass, r0, r1, r2, dists, levels, m1, m2, j0) -> float:
    p_s, p_su0, p_su01, p_su02, p_u0, p_u01, p_u02, p_u = _md_densities(mass)
    total = 0.0
    for s, u0, u1, u2 in itertools.product(*(range(k) for k in mass.shape)):
        w = mass[s, u0, u1, u2]
        if w <= 0:
            continue
        if (
            dists[0][s, r0[u0, u1, u2]] > levels[0]
            or dists[1][s, r1[u0, u1]] > levels[1]
            or dists[2][s, r2[u0, u2]] > levels[2]
        ):
            continue
        i_0 = LOG2(p_su0[s, u0] / (p_s[s] * p_u0[u0]))
        i_01 = LOG2(p_su01[s, u0, u1] / (p_s[s] * p_u01[u0, u1]))
        i_02 = LOG2(p_su02[s, u0, u2] / (p_s[s] * p_u02[u0, u2]))
        i_full = LOG2(mass[s, u0, u1, u2] / (p_s[s] * p_u[u0, u1, u2]))
        i_cond = LOG2((p_u[u0, u1, u2] * p_u0[u0]) / (p_u01[u0, u1] * p_u02[u0, u2]))
        denom = (
            1.0
            + 2.0 ** i_0 / j0
            + 2.0 ** i_01 / m1
            + 2.0 ** i_02 / m2
            + (j0 / (m1 * m2)) * 2.0 ** (i_full + i_cond)
        )
        total += w / denom
    return total


def md_error_ub(mass, r0, r1, r2, dists, levels, m1, m2, j0, gamma) -> float:
    p_s, p_su0, p_su01, p_su02, p_u0, p_u01, p_u02, p_u = _md_densities(mass)
    prob = 0.0
    for s, u0, u1, u2 in itertools.product(*(range(k) for k in mass.shape)):
        w = mass[s, u0, u1, u2]
        if w <= 0:
            continue
        i_0 = LOG2(p_su0[s, u0] / (p_s[s] * p_u0[u0]))
        i_01 = LOG2(p_su01[s, u0, u1] / (p_s[s] * p_u01[u0, u1]))
        i_02 = LOG2(p_su02[s, u0, u2] / (p_s[s] * p_u02[u0, u2]))
        i_full = LOG2(mass[s, u0, u1, u2] / (p_s[s] * p_u[u0, u1, u2]))
        i_cond = LOG2((p_u[u0, u1, u2] * p_u0[u0]) / (p_u01[u0, u1] * p_u02[u0, u2]))
        if (
            dists[0][s, r0[u0, u1, u2]] > levels[0]
            or dists[1][s, r1[u0, u1]] > levels[1]
            or dists[2][s, r2[u0, u2]] > levels[2]
            or LOG2(j0) - i_0 < gamma
            or LOG2(m1) - i_01 < gamma
            or LOG2(m2) - i_02 < gamma
            or LOG2(m1 * m2 / j0) - i_full - i_cond < gamma
        ):
            prob += w
    return min(1.0, prob + 4.0 * 2.0 ** (-gamma))


# ---------------------------------------------------------------------------
# common part by brute-force transitive closure
# ---------------------------------------------------------------------------


def brute_common_part(mass12: np.ndarray):
    """Labels by repeated boolean closure over the bipartite support graph;
    first-appearance numbering scanning row symbols then column symbols."""
    n1, n2 = mass12.shape
    n = n1 + n2
    adj = np.zeros((n, n), dtype=bool)
    adj[:n1, n1:] = mass12 > 0
    adj[n1:, :n1] = (mass12 > 0).T
    np.fill_diagonal(adj, True)
    reach = adj.copy()
    while True:
        new = reach | (reach @ reach)
        if np.array_equal(new, reach):
            break
        reach = new
    labels = np.full(n, -1, dtype=int)
    count = 0
    for v in range(n):
        if labels[v] < 0:
            labels[np.nonzero(reach[v])[0]] = count
            count += 1
    return labels[:n1], labels[n1:], count


def jscc_correct(mass: np.ndarray) -> float:
    # mass axes (S1, S2, T, X1, X2, Y)
    n1, n2, nt, nx1, nx2, ny = mass.shape
    lab1, lab2, count = brute_common_part(mass.sum(axis=(2, 3, 4, 5)))
    p_s1s2 = mass.sum(axis=(2, 3, 4, 5))
    p_s1 = p_s1s2.sum(axis=1)
    p_s2 = p_s1s2.sum(axis=0)
    p_k = np.zeros(count)
    for s1 in range(n1):
        p_k[lab1[s1]] += p_s1[s1]
    # marginals for the conditional information terms
    p_all = mass
    p_s2t_x2 = mass.sum(axis=(0, 3, 5))  # (S2, T, X2)
    p_s2t_x2y = mass.sum(axis=(0, 3))  # (S2, T, X2, Y)
    p_x1x2y = mass.sum(axis=(0, 1, 2))
    p_x1x2 = p_x1x2y.sum(axis=2)
    p_y = p_x1x2y.sum(axis=(0, 1))
    p_s2tx1x2 = mass.sum(axis=(0, 5))  # (S2, T, X1, X2)
    p_s2tx1x2y = mass.sum(axis=0)  # (S2, T, X1, X2, Y)
    p_s1tx1x2 = mass.sum(axis=(1, 5))  # (S1, T, X1, X2)
    p_s1tx1x2y = mass.sum(axis=1)  # (S1, T, X1, X2, Y)
    p_s1t_x1 = mass.sum(axis=(1, 4, 5))  # (S1, T, X1)
    p_s1t_x1y = mass.sum(axis=(1, 4))  # (S1, T, X1, Y)
    # K-grouped marginals over (K, T, X1, X2, Y)
    p_kt_full = np.zeros((count, nt, nx1, nx2, ny))
    joint_s1_rest = mass.sum(axis=1)  # (S1, T, X1, X2, Y)
    for s1 in range(n1):
        p_kt_full[lab1[s1]] += joint_s1_rest[s1]
    p_kt_x1x2 = p_kt_full.sum(axis=4)
    p_kt_y = p_kt_full.sum(axis=(2, 3))
    p_kt = p_kt_y.sum(axis=2)
    total = 0.0
    for s1, s2, t, x1, x2, y in itertools.product(
        range(n1), range(n2), range(nt), range(nx1), range(nx2), range(ny)
    ):
        w = p_all[s1, s2, t, x1, x2, y]
        if w <= 0:
            continue
        k = lab1[s1]
        h_1_2 = -LOG2(p_s1s2[s1, s2] / p_s2[s2])
        h_2_1 = -LOG2(p_s1s2[s1, s2] / p_s1[s1])
        h_12_k = -LOG2(p_s1s2[s1, s2] / p_k[k])
        h_12 = -LOG2(p_s1s2[s1, s2])
        i_1 = LOG2(
            (p_s2tx1x2y[s2, t, x1, x2, y] * p_s2t_x2[s2, t, x2])
            / (p_s2t_x2y[s2, t, x2, y] * p_s2tx1x2[s2, t, x1, x2])
        )
        i_2 = LOG2(
            (p_s1tx1x2y[s1, t, x1, x2, y] * p_s1t_x1[s1, t, x1])
            / (p_s1t_x1y[s1, t, x1, y] * p_s1tx1x2[s1, t, x1, x2])
        )
        i_12k = LOG2(
            (p_kt_full[k, t, x1, x2, y] * p_kt[k, t])
            / (p_kt_y[k, t, y] * p_kt_x1x2[k, t, x1, x2])
        )
        i_12 = LOG2(p_x1x2y[x1, x2, y] / (p_x1x2[x1, x2] * p_y[y]))
        denom = (
            1.0
            + 2.0 ** (h_1_2 - i_1)
            + 2.0 ** (h_2_1 - i_2)
            + 2.0 ** (h_12_k - i_12k)
            + 2.0 ** (h_12 - i_12)
        )
        total += w / denom
    return total


def jscc_error_ub(mass: np.ndarray, gamma: float) -> float:
    n1, n2, nt, nx1, nx2, ny = mass.shape
    lab1, _, count = brute_common_part(mass.sum(axis=(2, 3, 4, 5)))
    p_s1s2 = mass.sum(axis=(2, 3, 4, 5))
    p_s1 = p_s1s2.sum(axis=1)
    p_s2 = p_s1s2.sum(axis=0)
    p_k = np.zeros(count)
    for s1 in range(n1):
        p_k[lab1[s1]] += p_s1[s1]
    p_s2t_x2 = mass.sum(axis=(0, 3, 5))
    p_s2t_x2y = mass.sum(axis=(0, 3))
    p_x1x2y = mass.sum(axis=(0, 1, 2))
    p_x1x2 = p_x1x2y.sum(axis=2)
    p_y = p_x1x2y.sum(axis=(0, 1))
    p_s2tx1x2 = mass.sum(axis=(0, 5))
    p_s2tx1x2y = mass.sum(axis=0)
    p_s1tx1x2 = mass.sum(axis=(1, 5))
    p_s1tx1x2y = mass.sum(axis=1)
    p_s1t_x1 = mass.sum(axis=(1, 4, 5))
    p_s1t_x1y = mass.sum(axis=(1, 4))
    p_kt_full = np.zeros((count, nt, nx1, nx2, ny))
    joint_s1_rest = mass.sum(axis=1)
    for s1 in range(n1):
        p_kt_full[lab1[s1]] += joint_s1_rest[s1]
    p_kt_x1x2 = p_kt_full.sum(axis=4)
    p_kt_y = p_kt_full.sum(axis=(2, 3))
    p_kt = p_kt_y.sum(axis=2)
    prob = 0.0
    for s1, s2, t, x1, x2, y in itertools.product(
        range(n1), range(n2), range(nt), range(nx1), range(nx2), range(ny)
    ):
        w = mass[s1, s2, t, x1, x2, y]
        if w <= 0:
            continue
        k = lab1[s1]
        h_1_2 = -LOG2(p_s1s2[s1, s2] / p_s2[s2])
        h_2_1 = -LOG2(p_s1s2[s1, s2] / p_s1[s1])
        h_12_k = -LOG2(p_s1s2[s1, s2] / p_k[k])
        h_12 = -LOG2(p_s1s2[s1, s2])
        i_1 = LOG2(
            (p_s2tx1x2y[s2, t, x1, x2, y] * p_s2t_x2[s2, t, x2])
            / (p_s2t_x2y[s2, t, x2, y] * p_s2tx1x2[s2, t, x1, x2])
        )
        i_2 = LOG2(
            (p_s1tx1x2y[s1, t, x1, x2, y] * p_s1t_x1[s1, t, x1])
            / (p_s1t_x1y[s1, t, x1, y] * p_s1tx1x2[s1, t, x1, x2])
        )
        i_12k = LOG2(
            (p_kt_full[k, t, x1, x2, y] * p_kt[k, t])
            / (p_kt_y[k, t, y] * p_kt_x1x2[k, t, x1, x2])
        )
        i_12 = LOG2(p_x1x2y[x1, x2, y] / (p_x1x2[x1, x2] * p_y[y]))
        if (
            i_1 - h_1_2 < gamma
            or i_2 - h_2_1 < gamma
            or i_12k - h_12_k < gamma
            or i_12 - h_12 < gamma
        ):
            prob += w
    return min(1.0, prob + 4.0 * 2.0 ** (-gamma))


# ---------------------------------------------------------------------------
# misc oracles
# ---------------------------------------------------------------------------


def mutual_information_from_entropies(p_xy: np.ndarray) -> float:
    """I(X;Y) = H(X) + H(Y) - H(X,Y), each entropy from its own sum."""

    def ent(p):
        p = p.reshape(-1)
        return -sum(v * LOG2(v) for v in p if v > 0)

    return ent(p_xy.sum(axis=1)) + ent(p_xy.sum(axis=0)) - ent(p_xy)


def mc_normal_cdf(cov: np.ndarray, x: np.ndarray, samples: int, seed: int) -> float:
    """Plain Monte-Carlo estimate of P(N(0, cov) <= x), chunked."""
    rng = np.random.default_rng(seed)
    cov = np.asarray(cov, dtype=float)
    x = np.asarray(x, dtype=float)
    vals, vecs = np.linalg.eigh((cov + cov.T) / 2.0)
    factor = vecs * np.sqrt(np.clip(vals, 0.0, None))
    hits = 0
    left = samples
    while left > 0:
        chunk = min(left, 1_000_000)
        z = rng.standard_normal((chunk, cov.shape[0]))
        g = z @ factor.T
        hits += int(np.all(g <= x, axis=1).sum())
        left -= chunk
    return hits / samples


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF by bisection on math.erfc (independent of
    scipy); absolute error below 1e-9."""
    lo, hi = -40.0, 40.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if 0.5 * math.erfc(-mid / math.sqrt(2.0)) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def p2p_ensemble_success(mass: np.ndarray, m: int) -> float:
    """Exact codebook-ensemble success probability of the stochastic
    mutual-information decoder, by exhaustive enumeration over codebooks,
    messages, and channel outputs."""
    nx, ny = mass.shape
    p_x = mass.sum(axis=1)
    p_y = mass.sum(axis=0)
    cond = np.zeros((nx, ny))
    for x in range(nx):
        if p_x[x] > 0:
            cond[x] = mass[x] / p_x[x]
    total = 0.0
    for codebook in itertools.product(range(nx), repeat=m):
        w_cb = 1.0
        for x in codebook:
            w_cb *= p_x[x]
        if w_cb <= 0:
            continue
        for msg in range(m):
            x_sent = codebook[msg]
            for y in range(ny):
                w = w_cb * (1.0 / m) * cond[x_sent, y]
                if w <= 0:
                    continue
                weights = []
                for cand in codebook:
                    if mass[cand, y] > 0:
                        weights.append(mass[cand, y] / (p_x[cand] * p_y[y]))
                    else:
                        weights.append(0.0)
                denom = sum(weights)
                if denom <= 0:
                    continue  # erasure: counts as error
                total += w * weights[msg] / denom
    return total
