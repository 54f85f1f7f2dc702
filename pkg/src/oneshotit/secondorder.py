"""Finite-blocklength (second-order) rate machinery.

Pieces: exact information-density moments over a design joint, a
deterministic multivariate normal CDF for dimensions up to three, the
quantile region Qinv(V, eps) = {x : P(N(0,V) <= x) >= 1 - eps}, the
state-dependent-channel second-order rate, and broadcast rate-pair
membership.

The normal CDF uses dimension-recursive adaptive quadrature over the
conditioned coordinates (Cholesky order), absolute error well under 1e-6;
degenerate directions (eigenvalue below 1e-10) are eliminated and replaced
by exact inequality checks.  Region membership is boundary-inclusive with a
1e-9 slack, so ties resolve to "achievable".

Finite-n corrections: the log-over-n term carries an unspecified universal
constant; we implement correction * log2(n)/n (per rate coordinate for the
broadcast region, uniformly) with ``correction`` defaulting to 1 and exposed
as a keyword on both rate searches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import ndtr, ndtri

from .bounds import _require_vars, check_factorization
from .densities import DensitySpec, density_exponents
from .errors import DensityError, GeometryError
from .pmf import JointPMF

DEGENERATE_EIG = 1e-10
MEMBER_TOL = 1e-9  # boundary slack: cdf >= 1 - eps - MEMBER_TOL counts as inside
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MomentResult:
    """Mean vector and covariance (bits, bits^2) of a signed density vector."""

    mean: np.ndarray
    cov: np.ndarray
    labels: tuple
    signs: tuple


@dataclass(frozen=True)
class RateQuery:
    n: int
    epsilon: float

    def __post_init__(self):
        if int(self.n) < 1:
            raise GeometryError("DIMENSION_LIMIT", "blocklength n must be >= 1")
        if not 0.0 < float(self.epsilon) < 1.0:
            raise GeometryError("DIMENSION_LIMIT", "epsilon must lie in (0, 1)")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "epsilon", float(self.epsilon))


def density_moments(
    q: JointPMF, specs: Sequence[DensitySpec], signs: Optional[Sequence[int]] = None
) -> MomentResult:
    """Exact first/second moments of density values by support enumeration."""
    specs = tuple(specs)
    signs = tuple(signs) if signs is not None else (1,) * len(specs)
    if len(signs) != len(specs):
        raise DensityError("SHAPE_MISMATCH", "one sign per density spec required")
    sup = q.mass > 0
    w = q.mass[sup]
    rows = []
    for spec, sign in zip(specs, signs):
        arr = np.broadcast_to(density_exponents(q, spec), q.shape)[sup]
        if not np.all(np.isfinite(arr)):
            raise DensityError(
                "INFINITE_DENSITY_ON_SUPPORT",
                f"{spec} is infinite somewhere on the support",
            )
        rows.append(float(sign) * arr)
    vals = np.stack(rows) if rows else np.zeros((0, w.size))
    mean = vals @ w
    centered = vals - mean[:, None]
    cov = (centered * w) @ centered.T
    cov = (cov + cov.T) / 2.0
    return MomentResult(mean=mean, cov=cov, labels=specs, signs=signs)


# ---------------------------------------------------------------------------
# multivariate normal CDF
# ---------------------------------------------------------------------------


def _phi(t: float) -> float:
    return math.exp(-0.5 * t * t) * _INV_SQRT_2PI


def _Phi(t: float) -> float:
    return 0.5 * math.erfc(-t / _SQRT2)


def _quad(f, lo: float, hi: float, tol: float) -> float:
    if hi <= lo:
        return 0.0
    val, _ = integrate.quad(f, lo, hi, epsabs=tol, epsrel=tol, limit=200)
    return val


def _cdf_chol(R: np.ndarray, y: np.ndarray) -> float:
    """P(G <= y) for standardized positive-definite correlation R (dim 2 or 3)
    via the triangular recursion G = L Z."""
    L = np.linalg.cholesky(R)
    if y.size == 2:
        hi = min(y[0], 9.0)

        def f(t):
            return _phi(t) * _Phi((y[1] - L[1, 0] * t) / L[1, 1])

        return _quad(f, -9.0, hi, 1e-9)
    hi = min(y[0], 9.0)

    def inner(t):
        u_hi = min((y[1] - L[1, 0] * t) / L[1, 1], 9.0)

        def g(u):
            return _phi(u) * _Phi((y[2] - L[2, 0] * t - L[2, 1] * u) / L[2, 2])

        return _quad(g, -9.0, u_hi, 1e-10)

    def outer(t):
        return _phi(t) * inner(t)

    return _quad(outer, -9.0, hi, 5e-8)


def _halfspace_prob(A: np.ndarray, y: np.ndarray) -> float:
    """P(A Z <= y) for Z standard normal of dimension rank(A) in {1, 2}.

    Used for singular correlation matrices: degenerate eigendirections have
    been dropped from A, so rows with (near-)zero coefficients are exact
    deterministic constraints.
    """
    tol = 1e-9
    rank = A.shape[1]
    if rank == 1:
        lo, hi = -math.inf, math.inf
        for a, c in zip(A[:, 0], y):
            if a > tol:
                hi = min(hi, c / a)
            elif a < -tol:
                lo = max(lo, c / a)
            elif c < -1e-12:
                return 0.0
        return max(0.0, _Phi(min(hi, 9.0)) - _Phi(max(lo, -9.0)))
    # rank 2: adaptive quadrature over z1 with an interval in z2
    z1_lo, z1_hi = -9.0, 9.0
    live = []
    for (a1, a2), c in zip(A, y):
        if abs(a2) > tol:
            live.append((a1, a2, c))
        elif a1 > tol:
            z1_hi = min(z1_hi, c / a1)
        elif a1 < -tol:
            z1_lo = max(z1_lo, c / a1)
        elif c < -1e-12:
            return 0.0

    def f(z1):
        lo, hi = -9.0, 9.0
        for a1, a2, c in live:
            b = (c - a1 * z1) / a2
            if a2 > 0:
                hi = min(hi, b)
            else:
                lo = max(lo, b)
        if hi <= lo:
            return 0.0
        return _phi(z1) * (_Phi(hi) - _Phi(lo))

    return _quad(f, z1_lo, z1_hi, 1e-9)


def mvn_cdf(cov, x) -> float:
    """P(G <= x componentwise) for G ~ N(0, cov); absolute error <= 1e-6."""
    V = np.atleast_2d(np.asarray(cov, dtype=float))
    xv = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    d = xv.size
    if V.shape != (d, d):
        raise GeometryError("DIMENSION_LIMIT", f"cov shape {V.shape} does not match x of size {d}")
    if d > 3:
        raise GeometryError("DIMENSION_LIMIT", "dimension must be <= 3")
    scale = max(1.0, float(np.abs(V).max()))
    if float(np.abs(V - V.T).max()) > 1e-8 * scale:
        raise GeometryError("NOT_PSD", "covariance is not symmetric")
    V = (V + V.T) / 2.0
    if float(np.linalg.eigvalsh(V).min()) < -1e-8 * scale:
        raise GeometryError("NOT_PSD", "covariance has a negative eigenvalue")
    # deterministic coordinates: zero variance means the coordinate is 0 a.s.
    keep = [i for i in range(d) if V[i, i] > DEGENERATE_EIG]
    for i in range(d):
        if i not in keep and xv[i] < -1e-12:
            return 0.0
    if not keep:
        return 1.0
    V = V[np.ix_(keep, keep)]
    xv = xv[keep]
    s = np.sqrt(np.diag(V))
    y = xv / s
    if y.size == 1:
        return _Phi(float(y[0]))
    if float(np.min(y)) < -8.5:
        return 0.0
    if float(np.min(y)) > 8.5:
        return 1.0
    R = V / np.outer(s, s)
    eigvals, eigvecs = np.linalg.eigh(R)
    if float(eigvals[0]) > DEGENERATE_EIG:
        return min(1.0, max(0.0, _cdf_chol(R, y)))
    cols = eigvals > DEGENERATE_EIG
    A = eigvecs[:, cols] * np.sqrt(eigvals[cols])
    return min(1.0, max(0.0, _halfspace_prob(A, y)))


def qinv_contains(cov, epsilon: float, x) -> bool:
    """Membership in {x : P(N(0,cov) <= x) >= 1 - eps}, boundary inclusive."""
    if not 0.0 < float(epsilon) < 1.0:
        raise GeometryError("DIMENSION_LIMIT", "epsilon must lie in (0, 1)")
    return mvn_cdf(cov, x) >= 1.0 - float(epsilon) - MEMBER_TOL


# ---------------------------------------------------------------------------
# tail helpers shared by the rate searches
# ---------------------------------------------------------------------------


def _coordinate_tails(x: np.ndarray, sig: np.ndarray) -> np.ndarray:
    """Per-coordinate upper-tail probabilities, exact for zero variance."""
    out = np.empty_like(x)
    pos = sig > math.sqrt(DEGENERATE_EIG)
    out[pos] = 1.0 - ndtr(x[pos] / sig[pos])
    out[~pos] = np.where(x[~pos] >= -1e-12, 0.0, 1.0)
    return out


# ---------------------------------------------------------------------------
# state-dependent channel second-order rate
# ---------------------------------------------------------------------------


@dataclass
class GpRate:
    rate: float
    witness: float
    first_order: float
    backoff: float
    moments: MomentResult


def _feasible_split(V: np.ndarray, eps: float, total: float, npts: int):
    """Does some split (x1, total - x1) lie in Qinv(V, eps)?  Returns the
    witnessing x1 or None.  Linear witness scan plus golden refinement; cheap
    union-bound/per-coordinate filters avoid most exact CDF calls."""
    sig = np.sqrt(np.diag(V))
    zlo = float(ndtri(1.0 - eps))
    lo = sig[0] * zlo if sig[0] > math.sqrt(DEGENERATE_EIG) else 0.0
    hi = total - (sig[1] * zlo if sig[1] > math.sqrt(DEGENERATE_EIG) else 0.0)
    if lo > hi + 1e-15:
        return None
    grid = np.linspace(lo, hi, npts) if hi > lo else np.array([lo])
    xs = np.stack([grid, total - grid], axis=1)
    tails = np.stack(
        [_coordinate_tails(xs[:, i], np.repeat(sig[i], xs.shape[0])) for i in (0, 1)],
        axis=1,
    )
    tot = tails.sum(axis=1)
    certain = tot <= eps
    if certain.any():
        return float(grid[int(np.argmax(certain))])
    thresh = 1.0 - eps - MEMBER_TOL
    vals = np.array([mvn_cdf(V, xrow) for xrow in xs])
    best = int(np.argmax(vals))
    if vals[best] >= thresh:
        return float(grid[best])
    if grid.size < 3:
        return None
    # golden refine around the grid best (cdf is log-concave along the line)
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, grid.size - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c, dpt = b - invphi * (b - a), a + invphi * (b - a)
    fc = mvn_cdf(V, [c, total - c])
    fd = mvn_cdf(V, [dpt, total - dpt])
    for _ in range(40):
        if fc >= thresh:
            return float(c)
        if fd >= thresh:
            return float(dpt)
        if fc < fd:
            a, c, fc = c, dpt, fd
            dpt = a + invphi * (b - a)
            fd = mvn_cdf(V, [dpt, total - dpt])
        else:
            b, dpt, fd = dpt, c, fc
            c = b - invphi * (b - a)
            fc = mvn_cdf(V, [c, total - c])
    return None


def gp_rate(
    q: JointPMF,
    query: RateQuery,
    *,
    correction: float = 1.0,
    witness_points: int = 129,
    strict_factorization: bool = True,
) -> GpRate:
    """Second-order achievable rate for coding over a state-dependent channel.

    rate = (I(U;Y) - I(U;S)) - backoff/sqrt(n) - correction*log2(n)/n, where
    backoff is the smallest x1 + x2 with (x1, x2) in Qinv(V, eps) and V the
    covariance of (i(U;S), i(U;Y)); the witness is the achieving x1.
    """
    _require_vars(q, "gelfand_pinsker")
    check_factorization(q, "gelfand_pinsker", strict=strict_factorization)
    mom = density_moments(
        q, [DensitySpec.info("U", "S"), DensitySpec.info("U", "Y")]
    )
    first_order = float(mom.mean[1] - mom.mean[0])
    V = mom.cov
    sig = np.sqrt(np.diag(V))
    zlo = float(ndtri(1.0 - query.epsilon))
    zhi = float(ndtri(1.0 - query.epsilon / 2.0))
    live = sig > math.sqrt(DEGENERATE_EIG)
    lo = float((sig * zlo)[live].sum())  # below this no split can be feasible
    hi = float((sig * zhi)[live].sum())  # union bound makes this feasible
    wit = _feasible_split(V, query.epsilon, lo, witness_points)
    if wit is None:
        wh = _feasible_split(V, query.epsilon, hi, witness_points)
        while wh is None:  # union bound says hi is feasible; guard grid effects
            hi += max(1.0, 0.5 * float(sig.sum()))
            wh = _feasible_split(V, query.epsilon, hi, witness_points)
        while hi - lo > 1e-6:
            mid = 0.5 * (lo + hi)
            wm = _feasible_split(V, query.epsilon, mid, witness_points)
            if wm is None:
                lo = mid
            else:
                hi, wh = mid, wm
        backoff, wit = hi, wh
    else:
        backoff = lo
    n = query.n
    rate = first_order - backoff / math.sqrt(n) - correction * math.log2(n) / n
    return GpRate(
        rate=rate,
        witness=float(wit),
        first_order=first_order,
        backoff=float(backoff),
        moments=mom,
    )


# ---------------------------------------------------------------------------
# broadcast rate-pair membership
# ---------------------------------------------------------------------------

_BC_SPECS = (
    DensitySpec.info("U1", "U2"),
    DensitySpec.info("U1", "Y1"),
    DensitySpec.info("U2", "Y2"),
)
_BC_SIGNS = (1, -1, -1)


def bc_moments(q: JointPMF) -> MomentResult:
    """Mean/covariance of [i(U1;U2), -i(U1;Y1), -i(U2;Y2)]."""
    return density_moments(q, _BC_SPECS, _BC_SIGNS)


def bc_region_witness(
    q: JointPMF,
    query: RateQuery,
    point,
    *,
    grid_step: float = 1e-3,
    correction: float = 1.0,
    rtilde_cap: Optional[float] = None,
    strict_factorization: bool = True,
):
    """Witness pair (rt1, rt2) certifying that the rate pair is achievable,
    or None.

    The test vector is [rt1 + rt2, -R1 - rt1, -R2 - rt2]; membership requires
    sqrt(n) * (vector - mean - correction*log2(n)/n) in Qinv(cov, eps).
    Witnesses are scanned on a nonnegative grid of the given resolution
    (nonnegative splits mirror the asymptotic region's redundancy split).
    """
    _require_vars(q, "marton2")
    check_factorization(q, "marton2", strict=strict_factorization)
    if grid_step <= 0:
        raise GeometryError("DIMENSION_LIMIT", "grid_step must be positive")
    mom = bc_moments(q)
    ibc = mom.mean
    V = mom.cov
    sig = np.sqrt(np.diag(V))
    n, eps = query.n, query.epsilon
    rn = math.sqrt(n)
    corr = correction * math.log2(n) / n
    r1, r2 = float(point[0]), float(point[1])
    zlo = float(ndtri(1.0 - eps))

    def floor_x(i):
        return sig[i] * zlo if sig[i] > math.sqrt(DEGENERATE_EIG) else 0.0

    cap1 = (-r1 - ibc[1] - corr) - floor_x(1) / rn
    cap2 = (-r2 - ibc[2] - corr) - floor_x(2) / rn
    smin = (ibc[0] + corr) + floor_x(0) / rn
    if rtilde_cap is not None:
        cap1 = min(cap1, float(rtilde_cap))
        cap2 = min(cap2, float(rtilde_cap))
    if cap1 < -1e-12 or cap2 < -1e-12 or smin > cap1 + cap2 + 1e-12:
        return None
    g1 = np.arange(0.0, max(cap1, 0.0) + grid_step / 2.0, grid_step)
    g2 = np.arange(0.0, max(cap2, 0.0) + grid_step / 2.0, grid_step)

    def coords(a, b):
        x1 = rn * (a + b - ibc[0] - corr)
        x2 = rn * (-r1 - a - ibc[1] - corr)
        x3 = rn * (-r2 - b - ibc[2] - corr)
        return x1, x2, x3

    thresh = 1.0 - eps - MEMBER_TOL
    chunk = max(1, 2_000_000 // max(1, g2.size))
    belt: list = []
    for start in range(0, g1.size, chunk):
        a = g1[start : start + chunk][:, None]
        b = g2[None, :]
        xs = coords(a, b)
        shape = np.broadcast_shapes(*(x.shape for x in xs))
        tails = [
            _coordinate_tails(
                np.broadcast_to(x, shape).ravel(), np.full(int(np.prod(shape)), s)
            ).reshape(shape)
            for x, s in zip(xs, sig)
        ]
        feas = tails[0] + tails[1] + tails[2] <= eps  # union bound: certain
        if feas.any():
            i, j = np.unravel_index(int(np.argmax(feas)), feas.shape)
            return float(g1[start + i]), float(g2[j])
        # union bound inconclusive but every coordinate individually passes:
        # these need the exact CDF
        cand = (tails[0] <= eps) & (tails[1] <= eps) & (tails[2] <= eps)
        for i, j in zip(*np.nonzero(cand)):
            belt.append((start + int(i), int(j)))
    for i, j in belt:
        x = coords(float(g1[i]), float(g2[j]))
        if mvn_cdf(V, np.array(x)) >= thresh:
            return float(g1[i]), float(g2[j])
    return None


def bc_region_membership(
    q: JointPMF,
    query: RateQuery,
    point,
    *,
    grid_step: float = 1e-3,
    correction: float = 1.0,
    rtilde_cap: Optional[float] = None,
    strict_factorization: bool = True,
) -> bool:
    """True iff some witness grid point certifies the rate pair."""
    return (
        bc_region_witness(
            q,
            query,
            point,
            grid_step=grid_step,
            correction=correction,
            rtilde_cap=rtilde_cap,
            strict_factorization=strict_factorization,
        )
        is not None
    )
