"""Monte-Carlo execution of the stochastic random-coding constructions.

Every scenario follows the same pipeline: draw a fresh random codebook (and
random binning where used) per trial, sample the message/source/state, run
the scenario's stochastic mutual-information / likelihood coder stages, and
score success from index equality and/or distortion thresholds.  Estimates
are therefore unbiased for the codebook-ensemble success probability, which
is exactly the quantity the bound evaluators lower-bound.

Implementation notes:

* all score arithmetic is in the log2 domain with max-subtraction before
  exponentiation; -inf scores are never selected;
* index selection is inverse-CDF over the fixed candidate order, so the
  seed-to-outcome map is bit-stable;
* trials are batched along a leading numpy axis; one ``Generator`` drives a
  fixed draw order (codebooks, message/source, coder stages), so identical
  (seed, trials, config) always produce identical reports;
* degenerate inputs can leave a coder stage with every candidate at weight
  zero; such trials are scored as erasures, i.e. errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bounds import BoundResult, CodeSizes, DistortionSpec, _require_vars, validate_sizes
from .errors import SimError
from .pmf import ConditionalKernel, JointPMF, compute_common_part, _wrap

NEG_INF = float("-inf")


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass
class Codebook:
    """One realized codebook: indexed codeword arrays plus binning maps."""

    scenario: str
    arrays: dict
    binnings: dict = field(default_factory=dict)


@dataclass
class TrialOutcome:
    sent: dict
    decoded: dict
    distortions: dict
    success: bool


@dataclass
class SimulationReport:
    scenario: str
    trials: int
    successes: int
    estimate: float
    stderr: float
    correct_lb: Optional[float] = None
    seed: Optional[int] = None
    trial_outcomes: list = field(default_factory=list)

    @property
    def dominance_ok(self) -> Optional[bool]:
        """estimate + 3*SE >= exact bound (None when no bound was attached)."""
        if self.correct_lb is None:
            return None
        return self.estimate + 3.0 * self.stderr >= self.correct_lb


# ---------------------------------------------------------------------------
# elementary stochastic coders
# ---------------------------------------------------------------------------


def _smc_weights(scores: np.ndarray) -> np.ndarray:
    """Selection weights proportional to 2**score along the last axis."""
    pos = np.isposinf(scores)
    any_pos = pos.any(axis=-1, keepdims=True)
    finite = np.where(np.isfinite(scores), scores, NEG_INF)
    mx = finite.max(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore"):
        w = np.exp2(scores - mx)
    w = np.where(np.isnan(w) | np.isinf(w), 0.0, w)
    # +inf scores dominate in the limit: uniform over the +inf candidates
    return np.where(any_pos, pos.astype(float), w)


def smc_weights(scores) -> np.ndarray:
    """Normalized selection pmf of the stochastic coder for given scores."""
    w = _smc_weights(np.asarray(scores, dtype=float))
    total = w.sum(axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise SimError("ALL_ZERO", "every candidate score is -inf")
    return w / total


def smc_draw(scores, stream: np.random.Generator) -> int:
    """Draw one index with probability proportional to 2**score."""
    w = _smc_weights(np.asarray(scores, dtype=float))
    total = float(w.sum())
    if total <= 0:
        raise SimError("ALL_ZERO", "every candidate score is -inf")
    cum = np.cumsum(w)
    u = stream.random() * total
    return int(min(int((cum < u).sum()), w.size - 1))


def _smc_rows(scores: np.ndarray, stream: np.random.Generator):
    """Batched inverse-CDF draw along the last axis.

    Returns (index, ok); rows whose weights are all zero get index -1 and
    ok=False (erasure).
    """
    w = _smc_weights(scores)
    cum = np.cumsum(w, axis=-1)
    total = cum[..., -1]
    u = stream.random(total.shape) * total
    idx = np.minimum((cum < u[..., None]).sum(axis=-1), w.shape[-1] - 1)
    ok = total > 0
    return np.where(ok, idx, -1), ok


def random_binning(j_count: int, m_count: int, stream: np.random.Generator) -> np.ndarray:
    """Uniform independent map [0:j_count) -> [0:m_count)."""
    if j_count < 1 or m_count < 1:
        raise SimError("SIZE_CONSTRAINT", "binning needs j_count, m_count >= 1")
    return stream.integers(0, m_count, size=j_count)


# ---------------------------------------------------------------------------
# sampling / table helpers (index domain, no symbol lookups in hot loops)
# ---------------------------------------------------------------------------


def _draw_flat(pvec: np.ndarray, stream, shape) -> np.ndarray:
    cum = np.cumsum(pvec)
    u = stream.random(shape)
    return np.minimum(np.searchsorted(cum, u, side="right"), pvec.size - 1)


def _draw_rows(cum_rows: np.ndarray, stream, shape) -> np.ndarray:
    """Inverse-CDF draw per row; rows are unnormalized nonnegative cumsums."""
    u = stream.random(shape) * np.broadcast_to(cum_rows[..., -1], shape)
    idx = (np.broadcast_to(cum_rows, shape + cum_rows.shape[-1:]) < u[..., None]).sum(
        axis=-1
    )
    return np.minimum(idx, cum_rows.shape[-1] - 1)


def _log2(arr):
    with np.errstate(divide="ignore"):
        return np.log2(arr)


def _info_table(q: JointPMF, left: Sequence[str], right: Sequence[str], given: Sequence[str] = ()):
    """i(left; right | given) table with axes ordered (given..., left..., right...)."""
    left, right, given = tuple(left), tuple(right), tuple(given)
    m_all = q.marginal(given + left + right)
    m_g = q.marginal(given) if given else np.array(1.0)
    m_lg = q.marginal(given + left)
    m_rg = q.marginal(given + right)
    ng, nl, nr = len(given), len(left), len(right)
    sh = m_all.shape

    def ex(a, keep_axes):
        full = [1] * (ng + nl + nr)
        for ax, size in zip(keep_axes, a.shape):
            full[ax] = size
        return a.reshape(full)

    g_axes = list(range(ng))
    l_axes = list(range(ng, ng + nl))
    r_axes = list(range(ng + nl, ng + nl + nr))
    with np.errstate(invalid="ignore"):
        t = (_log2(m_all) + ex(_log2(m_g), g_axes)) - (
            ex(_log2(m_lg), g_axes + l_axes) + ex(_log2(m_rg), g_axes + r_axes)
        )
    out = np.where(m_all > 0, t, NEG_INF)
    return np.broadcast_to(out, sh).copy()


def _cond_cum(q: JointPMF, given: Sequence[str], out: Sequence[str]) -> np.ndarray:
    """Unnormalized conditional sampler rows: cumsum of the (given, out)
    marginal over the flattened out axes (zero rows are unreachable)."""
    given, out = tuple(given), tuple(out)
    m = q.marginal(given + out)
    gshape = m.shape[: len(given)]
    return np.cumsum(m.reshape(gshape + (-1,)), axis=-1)


def _det_map(q: JointPMF, given: Sequence[str], out: str) -> np.ndarray:
    """Deterministic map extracted from the joint (argmax of support rows)."""
    m = q.marginal(tuple(given) + (out,))
    return np.argmax(m, axis=-1)


def _recon_index_map(kernel: ConditionalKernel) -> np.ndarray:
    return np.argmax(kernel.table, axis=-1)


def _lead(fresh: bool, n: int) -> int:
    return n if fresh else 1


def _row(arr: np.ndarray, ar: np.ndarray, idx: np.ndarray, fresh: bool):
    """Per-trial row select that also works for a shared (lead=1) codebook."""
    return arr[ar, idx] if fresh else arr[0, idx]


# ---------------------------------------------------------------------------
# per-scenario codebook builders (leading trial axis)
# ---------------------------------------------------------------------------


def _cb_p2p(q, sizes, stream, n):
    (m,) = validate_sizes("p2p", sizes)
    return {"X": _draw_flat(q.marginal(("X",)), stream, (n, m))}, {}


def _cb_gp(q, sizes, stream, n):
    m, j = validate_sizes("gelfand_pinsker", sizes)
    return {"U": _draw_flat(q.marginal(("U",)), stream, (n, m, j))}, {}


def _cb_marton2(q, sizes, stream, n):
    m1, m2, j1, j2 = validate_sizes("marton2", sizes)
    return {
        "U1": _draw_flat(q.marginal(("U1",)), stream, (n, m1, j1)),
        "U2": _draw_flat(q.marginal(("U2",)), stream, (n, m2, j2)),
    }, {}


def _cb_marton3(q, sizes, stream, n):
    m0, m1, m2, j1, j2 = validate_sizes("marton3", sizes)
    u0 = _draw_flat(q.marginal(("U0",)), stream, (n, m0))
    out = {"U0": u0}
    for name, mk, jk in (("U1", m1, j1), ("U2", m2, j2)):
        cum = _cond_cum(q, ("U0",), (name,))
        out[name] = _draw_rows(cum[u0][:, :, None, None, :], stream, (n, m0, mk, jk))
    return out, {}


def _cb_berger_tung(q, sizes, stream, n):
    m1, m2, j1, j2 = validate_sizes("berger_tung", sizes)
    arrays = {
        "U1": _draw_flat(q.marginal(("U1",)), stream, (n, j1)),
        "U2": _draw_flat(q.marginal(("U2",)), stream, (n, j2)),
    }
    binnings = {
        "B1": stream.integers(0, m1, size=(n, j1)),
        "B2": stream.integers(0, m2, size=(n, j2)),
    }
    return arrays, binnings


def _cb_hb(q, sizes, stream, n):
    m1, m2, j2 = validate_sizes("hb_kaspi", sizes)
    w = _draw_flat(q.marginal(("W",)), stream, (n, m1))
    cum = _cond_cum(q, ("W",), ("U",))
    u = _draw_rows(cum[w][:, :, None, :], stream, (n, m1, j2))
    return {"W": w, "U": u}, {"B": stream.integers(0, m2, size=(n, j2))}


def _cb_md(q, sizes, stream, n):
    m1, m2, j0 = validate_sizes("multiple_description", sizes)
    j1, j2 = m1 // j0, m2 // j0
    u0 = _draw_flat(q.marginal(("U0",)), stream, (n, j0))
    out = {"U0": u0}
    for name, jk in (("U1", j1), ("U2", j2)):
        cum = _cond_cum(q, ("U0",), (name,))
        out[name] = _draw_rows(cum[u0][:, :, None, :], stream, (n, j0, jk))
    return out, {}


def _cb_jscc(q, sizes, stream, n):
    labeling = compute_common_part(_pair(q, "S1", "S2"))
    t_cb = _draw_flat(q.marginal(("T",)), stream, (n, labeling.count))
    out = {"T": t_cb}
    for xname, sname, lab in (
        ("X1", "S1", labeling.index_labels1),
        ("X2", "S2", labeling.index_labels2),
    ):
        cum = _cond_cum(q, (sname, "T"), (xname,))
        n_s = cum.shape[0]
        tsel = t_cb[:, lab]  # (n, |S|): the shared T draw of each symbol's class
        rows = cum[np.arange(n_s)[None, :], tsel]
        out[xname] = _draw_rows(rows, stream, (n, n_s))
    return out, {}


def _pair(q: JointPMF, a: str, b: str) -> JointPMF:
    return _wrap((q.variable(a), q.variable(b)), q.marginal((a, b)))


_BUILDERS = {
    "p2p": _cb_p2p,
    "gelfand_pinsker": _cb_gp,
    "marton2": _cb_marton2,
    "marton3": _cb_marton3,
    "berger_tung": _cb_berger_tung,
    "hb_kaspi": _cb_hb,
    "multiple_description": _cb_md,
    "jscc_mac": _cb_jscc,
}


def build_codebook(scenario: str, q: JointPMF, sizes: Optional[CodeSizes], stream) -> Codebook:
    """Draw one codebook (and binning) exactly as the simulator does."""
    if scenario not in _BUILDERS:
        raise SimError("SCENARIO_SHAPE", f"unknown scenario {scenario!r}")
    _require_vars(q, scenario)
    arrays, binnings = _BUILDERS[scenario](q, sizes, stream, 1)
    return Codebook(
        scenario,
        {k: v[0] for k, v in arrays.items()},
        {k: v[0] for k, v in binnings.items()},
    )


# ---------------------------------------------------------------------------
# per-scenario trial pipelines
# ---------------------------------------------------------------------------


def _sim_p2p(q, sizes, recon, dist, stream, n, fresh):
    (m,) = validate_sizes("p2p", sizes)
    iota = _info_table(q, ("X",), ("Y",))
    cum_y = _cond_cum(q, ("X",), ("Y",))
    cb, _ = _cb_p2p(q, sizes, stream, _lead(fresh, n))
    ar = np.arange(n)
    msg = stream.integers(0, m, size=n)
    x = _row(cb["X"], ar, msg, fresh)
    y = _draw_rows(cum_y[x], stream, (n,))
    scores = iota[cb["X"] if fresh else cb["X"][0][None, :], y[:, None]]
    dec, ok = _smc_rows(scores, stream)
    succ = ok & (dec == msg)
    return succ, {"sent": {"m": msg}, "decoded": {"m": dec}, "dist": {}}


def _sim_gp(q, sizes, recon, dist, stream, n, fresh):
    m, j = validate_sizes("gelfand_pinsker", sizes)
    i_us = _info_table(q, ("U",), ("S",))
    i_uy = _info_table(q, ("U",), ("Y",))
    xmap = _det_map(q, ("U", "S"), "X")
    cum_y = _cond_cum(q, ("X", "S"), ("Y",))
    cb, _ = _cb_gp(q, sizes, stream, _lead(fresh, n))
    ar = np.arange(n)
    msg = stream.integers(0, m, size=n)
    s = _draw_flat(q.marginal(("S",)), stream, (n,))
    urow = _row(cb["U"], ar, msg, fresh)  # (n, J)
    jsel, ok_e = _smc_rows(i_us[urow, s[:, None]], stream)
    j0 = np.where(ok_e, jsel, 0)
    u = urow[ar, j0]
    x = xmap[u, s]
    y = _draw_rows(cum_y[x, s], stream, (n,))
    cand = cb["U"].reshape(_lead(fresh, n), m * j)
    dec, ok_d = _smc_rows(i_uy[cand, y[:, None]], stream)
    succ = ok_e & ok_d & (dec == msg * j + jsel)
    return succ, {
        "sent": {"m": msg, "j": jsel},
        "decoded": {"m": np.where(ok_d, dec // j, -1), "j": np.where(ok_d, dec % j, -1)},
        "dist": {},
    }


def _sim_marton2(q, sizes, recon, dist, stream, n, fresh):
    m1, m2, j1, j2 = validate_sizes("marton2", sizes)
    i_uu = _info_table(q, ("U1",), ("U2",))
    i_1 = _info_table(q, ("U1",), ("Y1",))
    i_2 = _info_table(q, ("U2",), ("Y2",))
    xmap = _det_map(q, ("U1", "U2"), "X")
    cum_y = _cond_cum(q, ("X",), ("Y1", "Y2"))
    ny2 = q.variable("Y2").alphabet.size
    cb, _ = _cb_marton2(q, sizes, stream, _lead(fresh, n))
    ar = np.arange(n)
    msg1 = stream.integers(0, m1, size=n)
    msg2 = stream.integers(0, m2, size=n)
    u1row = _row(cb["U1"], ar, msg1, fresh)
    u2row = _row(cb["U2"], ar, msg2, fresh)
    enc, ok_e = _smc_rows(
        i_uu[u1row[:, :, None], u2row[:, None, :]].reshape(n, j1 * j2), stream
    )
    enc0 = np.where(ok_e, enc, 0)
    jj1, jj2 = enc0 // j2, enc0 % j2
    x = xmap[u1row[ar, jj1], u2row[ar, jj2]]
    y12 = _draw_rows(cum_y[x], stream, (n,))
    y1, y2 = y12 // ny2, y12 % ny2
    c1 = cb["U1"].reshape(_lead(fresh, n), m1 * j1)
    c2 = cb["U2"].reshape(_lead(fresh, n), m2 * j2)
    d1, ok1 = _smc_rows(i_1[c1, y1[:, None]], stream)
    d2, ok2 = _smc_rows(i_2[c2, y2[:, None]], stream)
    succ = (
        ok_e
        & ok1
        & ok2
        & (d1 == msg1 * j1 + jj1)
        & (d2 == msg2 * j2 + jj2)
    )
    return succ, {
        "sent": {"m1": msg1, "j1": jj1, "m2": msg2, "j2": jj2},
        "decoded": {"d1": d1, "d2": d2},
        "dist": {},
    }


def _sim_marton3(q, sizes, recon, dist, stream, n, fresh):
    m0, m1, m2, j1, j2 = validate_sizes("marton3", sizes)
    i_uu0 = _info_table(q, ("U1",), ("U2",), ("U0",))  # (U0, U1, U2)
    i_01 = _info_table(q, ("U0", "U1"), ("Y1",))  # (U0, U1, Y1)
    i_02 = _info_table(q, ("U0", "U2"), ("Y2",))
    xmap = _det_map(q, ("U0", "U1", "U2"), "X")
    cum_y = _cond_cum(q, ("X",), ("Y1", "Y2"))
    ny2 = q.variable("Y2").alphabet.size
    lead = _lead(fresh, n)
    cb, _ = _cb_marton3(q, sizes, stream, lead)
    ar = np.arange(n)
    msg0 = stream.integers(0, m0, size=n)
    msg1 = stream.integers(0, m1, size=n)
    msg2 = stream.integers(0, m2, size=n)
    u0 = _row(cb["U0"], ar, msg0, fresh)
    u1row = cb["U1"][ar, msg0, msg1] if fresh else cb["U1"][0, msg0, msg1]  # (n, J1)
    u2row = cb["U2"][ar, msg0, msg2] if fresh else cb["U2"][0, msg0, msg2]
    enc, ok_e = _smc_rows(
        i_uu0[u0[:, None, None], u1row[:, :, None], u2row[:, None, :]].reshape(
            n, j1 * j2
        ),
        stream,
    )
    enc0 = np.where(ok_e, enc, 0)
    jj1, jj2 = enc0 // j2, enc0 % j2
    x = xmap[u0, u1row[ar, jj1], u2row[ar, jj2]]
    y12 = _draw_rows(cum_y[x], stream, (n,))
    y1, y2 = y12 // ny2, y12 % ny2
    succ = ok_e.copy()
    decoded = {}
    for tag, cbk, ik, yk, mk, jk, msgk, jjk in (
        ("1", cb["U1"], i_01, y1, m1, j1, msg1, jj1),
        ("2", cb["U2"], i_02, y2, m2, j2, msg2, jj2),
    ):
        u0c = np.broadcast_to(cb["U0"][:, :, None, None], cbk.shape).reshape(lead, -1)
        ukc = cbk.reshape(lead, -1)
        dec, ok_d = _smc_rows(ik[u0c, ukc, yk[:, None]], stream)
        want = (msg0 * mk + msgk) * jk + jjk
        succ = succ & ok_d & (dec == want)
        decoded[f"d{tag}"] = dec
    return succ, {
        "sent": {"m0": msg0, "m1": msg1, "j1": jj1, "m2": msg2, "j2": jj2},
        "decoded": decoded,
        "dist": {},
    }


def _sim_berger_tung(q, sizes, recon, dist, stream, n, fresh):
    m1, m2, j1, j2 = validate_sizes("berger_tung", sizes)
    i_s1u1 = _info_table(q, ("S1",), ("U1",))
    i_s2u2 = _info_table(q, ("S2",), ("U2",))
    i_uu = _info_table(q, ("U1",), ("U2",))
    r1 = _recon_index_map(recon[0])
    r2 = _recon_index_map(recon[1])
    lead = _lead(fresh, n)
    cb, bins = _cb_berger_tung(q, sizes, stream, lead)
    ar = np.arange(n)
    src = q.marginal(("S1", "S2"))
    flat = _draw_flat(src.reshape(-1), stream, (n,))
    s1, s2 = np.unravel_index(flat, src.shape)
    je1, ok_e1 = _smc_rows(i_s1u1[s1[:, None], cb["U1"] if fresh else cb["U1"][0][None]], stream)
    je2, ok_e2 = _smc_rows(i_s2u2[s2[:, None], cb["U2"] if fresh else cb["U2"][0][None]], stream)
    j1sel = np.where(ok_e1, je1, 0)
    j2sel = np.where(ok_e2, je2, 0)
    msg1 = _row(bins["B1"], ar, j1sel, fresh)
    msg2 = _row(bins["B2"], ar, j2sel, fresh)
    pair_scores = i_uu[cb["U1"][:, :, None], cb["U2"][:, None, :]]
    in_bin = (bins["B1"][:, :, None] == msg1[:, None, None]) & (
        bins["B2"][:, None, :] == msg2[:, None, None]
    )
    masked = np.where(in_bin, pair_scores, NEG_INF).reshape(n, j1 * j2)
    dec, ok_d = _smc_rows(masked, stream)
    dec0 = np.where(ok_d, dec, 0)
    jd1, jd2 = dec0 // j2, dec0 % j2
    u1 = _row(cb["U1"], ar, j1sel, fresh)
    u2 = _row(cb["U2"], ar, j2sel, fresh)
    d1 = dist[0].measure[s1, r1[u1, u2]]
    d2 = dist[1].measure[s2, r2[u1, u2]]
    succ = (
        ok_e1
        & ok_e2
        & ok_d
        & (jd1 == j1sel)
        & (jd2 == j2sel)
        & (d1 <= dist[0].level)
        & (d2 <= dist[1].level)
    )
    return succ, {
        "sent": {"s1": s1, "s2": s2, "j1": j1sel, "j2": j2sel},
        "decoded": {"j1": jd1, "j2": jd2},
        "dist": {"d1": d1, "d2": d2},
    }


def _sim_hb(q, sizes, recon, dist, stream, n, fresh):
    m1, m2, j2 = validate_sizes("hb_kaspi", sizes)
    i_s_wu = _info_table(q, ("S",), ("W", "U"))  # (S, W, U)
    i_yu_w = _info_table(q, ("U",), ("Y",), ("W",))  # (W, U, Y)
    r1 = _recon_index_map(recon[0])
    r2 = _recon_index_map(recon[1])
    lead = _lead(fresh, n)
    cb, bins = _cb_hb(q, sizes, stream, lead)
    ar = np.arange(n)
    src = q.marginal(("S", "Y"))
    flat = _draw_flat(src.reshape(-1), stream, (n,))
    s, y = np.unravel_index(flat, src.shape)
    enc_scores = i_s_wu[
        s[:, None, None], cb["W"][:, :, None], cb["U"]
    ].reshape(n, m1 * j2) if fresh else i_s_wu[
        s[:, None, None], cb["W"][0][None, :, None], cb["U"][0][None]
    ].reshape(n, m1 * j2)
    enc, ok_e = _smc_rows(enc_scores, stream)
    enc0 = np.where(ok_e, enc, 0)
    msg1, j2sel = enc0 // j2, enc0 % j2
    msg2 = _row(bins["B"], ar, j2sel, fresh)
    w = _row(cb["W"], ar, msg1, fresh)
    urow = _row(cb["U"], ar, msg1, fresh)  # (n, J2)
    brow = bins["B"] if fresh else np.broadcast_to(bins["B"][0], (n, j2))
    dec_scores = np.where(
        brow == msg2[:, None], i_yu_w[w[:, None], urow, y[:, None]], NEG_INF
    )
    jd, ok_d = _smc_rows(dec_scores, stream)
    u = urow[ar, j2sel]
    d1 = dist[0].measure[s, r1[w]]
    d2 = dist[1].measure[s, r2[w, u, y]]
    succ = (
        ok_e
        & ok_d
        & (jd == j2sel)
        & (d1 <= dist[0].level)
        & (d2 <= dist[1].level)
    )
    return succ, {
        "sent": {"s": s, "m1": msg1, "j2": j2sel, "m2": msg2},
        "decoded": {"j2": jd},
        "dist": {"d1": d1, "d2": d2},
    }


def _sim_md(q, sizes, recon, dist, stream, n, fresh):
    m1, m2, j0 = validate_sizes("multiple_description", sizes)
    j1, j2 = m1 // j0, m2 // j0
    i_s_u = _info_table(q, ("S",), ("U0", "U1", "U2"))  # (S, U0, U1, U2)
    i_uu0 = _info_table(q, ("U1",), ("U2",), ("U0",))  # (U0, U1, U2)
    r0 = _recon_index_map(recon[0])
    r1 = _recon_index_map(recon[1])
    r2 = _recon_index_map(recon[2])
    lead = _lead(fresh, n)
    cb, _ = _cb_md(q, sizes, stream, lead)
    ar = np.arange(n)
    s = _draw_flat(q.marginal(("S",)), stream, (n,))
    u0g = cb["U0"][:, :, None, None]
    u1g = cb["U1"][:, :, :, None]
    u2g = cb["U2"][:, :, None, :]
    scores = (
        i_s_u[s[:, None, None, None], u0g, u1g, u2g] + i_uu0[u0g, u1g, u2g]
    ).reshape(n, j0 * j1 * j2)
    enc, ok_e = _smc_rows(scores, stream)
    enc0 = np.where(ok_e, enc, 0)
    jj0 = enc0 // (j1 * j2)
    jj1 = (enc0 // j2) % j1
    jj2 = enc0 % j2
    u0 = _row(cb["U0"], ar, jj0, fresh)
    u1 = cb["U1"][ar, jj0, jj1] if fresh else cb["U1"][0, jj0, jj1]
    u2 = cb["U2"][ar, jj0, jj2] if fresh else cb["U2"][0, jj0, jj2]
    d0 = dist[0].measure[s, r0[u0, u1, u2]]
    d1 = dist[1].measure[s, r1[u0, u1]]
    d2 = dist[2].measure[s, r2[u0, u2]]
    succ = (
        ok_e
        & (d0 <= dist[0].level)
        & (d1 <= dist[1].level)
        & (d2 <= dist[2].level)
    )
    return succ, {
        "sent": {"s": s, "j0": jj0, "j1": jj1, "j2": jj2},
        "decoded": {},
        "dist": {"d0": d0, "d1": d1, "d2": d2},
    }


def _sim_jscc(q, sizes, recon, dist, stream, n, fresh):
    n_s1 = q.variable("S1").alphabet.size
    n_s2 = q.variable("S2").alphabet.size
    if n_s1 * n_s2 > 10_000:
        raise SimError(
            "SIZE_LIMIT", "jscc decoder enumerates source pairs; limit is 10^4 pairs"
        )
    src = q.marginal(("S1", "S2"))
    logq12 = np.where(src > 0, _log2(src), NEG_INF)
    i_xy = _info_table(q, ("X1", "X2"), ("Y",))  # (X1, X2, Y)
    cum_y = _cond_cum(q, ("X1", "X2"), ("Y",))
    cb, _ = _cb_jscc(q, sizes, stream, _lead(fresh, n))
    ar = np.arange(n)
    flat = _draw_flat(src.reshape(-1), stream, (n,))
    s1, s2 = np.unravel_index(flat, src.shape)
    x1all = cb["X1"] if fresh else np.broadcast_to(cb["X1"][0], (n, n_s1))
    x2all = cb["X2"] if fresh else np.broadcast_to(cb["X2"][0], (n, n_s2))
    x1 = x1all[ar, s1]
    x2 = x2all[ar, s2]
    y = _draw_rows(cum_y[x1, x2], stream, (n,))
    scores = (
        logq12[None, :, :]
        + i_xy[x1all[:, :, None], x2all[:, None, :], y[:, None, None]]
    ).reshape(n, n_s1 * n_s2)
    dec, ok_d = _smc_rows(scores, stream)
    succ = ok_d & (dec == s1 * n_s2 + s2)
    return succ, {
        "sent": {"s1": s1, "s2": s2},
        "decoded": {"s1": np.where(ok_d, dec // n_s2, -1), "s2": np.where(ok_d, dec % n_s2, -1)},
        "dist": {},
    }


_PIPELINES = {
    "p2p": _sim_p2p,
    "gelfand_pinsker": _sim_gp,
    "marton2": _sim_marton2,
    "marton3": _sim_marton3,
    "berger_tung": _sim_berger_tung,
    "hb_kaspi": _sim_hb,
    "multiple_description": _sim_md,
    "jscc_mac": _sim_jscc,
}

_NEEDS_RECON = {"berger_tung": 2, "hb_kaspi": 2, "multiple_description": 3}


def simulate(
    scenario: str,
    q: JointPMF,
    sizes: Optional[CodeSizes] = None,
    *,
    recon: Optional[Sequence[ConditionalKernel]] = None,
    dist: Optional[Sequence[DistortionSpec]] = None,
    trials: int,
    seed: int,
    fresh_codebook: bool = True,
    bound: Optional[BoundResult] = None,
    keep_trials: int = 0,
) -> SimulationReport:
    """Seeded Monte-Carlo estimate of the ensemble success probability.

    ``fresh_codebook=False`` reuses a single codebook realization for every
    trial (exploratory mode; the bounds speak about the fresh-codebook
    ensemble, so dominance is only guaranteed with the default).
    """
    if scenario not in _PIPELINES:
        raise SimError("SCENARIO_SHAPE", f"unknown scenario {scenario!r}")
    _require_vars(q, scenario)
    want = _NEEDS_RECON.get(scenario, 0)
    have = 0 if recon is None else len(recon)
    if have != want or (want and (dist is None or len(dist) != want)):
        raise SimError(
            "SCENARIO_SHAPE",
            f"{scenario} needs {want} reconstruction kernels and distortion specs",
        )
    if trials < 1:
        raise SimError("SIZE_CONSTRAINT", "trials must be >= 1")
    stream = np.random.default_rng(seed)
    succ, detail = _PIPELINES[scenario](q, sizes, recon, dist, stream, int(trials), fresh_codebook)
    successes = int(succ.sum())
    est = successes / trials
    stderr = math.sqrt(est * (1.0 - est) / trials)
    outcomes = []
    for t in range(min(keep_trials, trials)):
        outcomes.append(
            TrialOutcome(
                sent={k: int(v[t]) for k, v in detail["sent"].items()},
                decoded={k: int(v[t]) for k, v in detail["decoded"].items()},
                distortions={k: float(v[t]) for k, v in detail["dist"].items()},
                success=bool(succ[t]),
            )
        )
    return SimulationReport(
        scenario=scenario,
        trials=int(trials),
        successes=successes,
        estimate=est,
        stderr=stderr,
        correct_lb=None if bound is None else bound.correct_lb,
        seed=int(seed),
        trial_outcomes=outcomes,
    )
