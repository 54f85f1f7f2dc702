"""Exact one-shot achievability bound evaluators.

Each evaluator takes a design joint pmf (canonical variable names, see
``SCENARIOS``), checks the scenario's required factorization numerically,
and returns a :class:`BoundResult` holding

* ``correct_lb`` -- the exact correct-probability (or no-excess-distortion)
  lower bound, evaluated by exhaustive summation over the joint support,
  never by sampling; this is the trust anchor for the Monte-Carlo codecs;
* ``error_ub_by_gamma`` -- for each requested gamma, the loosened error
  upper bound: probability of the scenario's union of density/distortion
  events plus the scenario constant times 2**-gamma (constants implemented
  exactly as 3, 7, 17, 15, 5, 4 and 4);
* ``terms`` -- the mean of each denominator load, as diagnostics.

Density conventions: 2**iota with iota = -inf contributes exactly 0, and an
infinite load forces that outcome's integrand to 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .densities import DensitySpec, density_exponents
from .errors import BoundError
from .pmf import Alphabet, ConditionalKernel, JointPMF, Variable, compose, compute_common_part

FACTORIZATION_TOL = 1e-9


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CodeSizes:
    """Per-scenario codebook/bin counts; unused indices stay None."""

    m: Optional[int] = None
    m0: Optional[int] = None
    m1: Optional[int] = None
    m2: Optional[int] = None
    j: Optional[int] = None
    j0: Optional[int] = None
    j1: Optional[int] = None
    j2: Optional[int] = None

    @classmethod
    def from_mapping(cls, mapping: Mapping) -> "CodeSizes":
        kw = {}
        for key, val in mapping.items():
            name = str(key).lower()
            if name not in cls.__dataclass_fields__:
                raise BoundError("SIZE_CONSTRAINT", f"unknown code size {key!r}")
            kw[name] = int(val)
        return cls(**kw)

    def require(self, *names: str) -> tuple:
        out = []
        for name in names:
            val = getattr(self, name)
            if val is None:
                raise BoundError("SIZE_CONSTRAINT", f"scenario requires size {name.upper()}")
            val = int(val)
            if val < 1:
                raise BoundError("SIZE_CONSTRAINT", f"size {name.upper()} must be >= 1")
            out.append(val)
        return tuple(out)


@dataclass(frozen=True, eq=False)
class DistortionSpec:
    """Distortion measure table d(source, reconstruction) plus a level."""

    source: str
    recon: str
    measure: np.ndarray
    level: float

    def __post_init__(self):
        arr = np.asarray(self.measure, dtype=float)
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise BoundError("SIZE_CONSTRAINT", "distortion measure must be finite and >= 0")
        if float(self.level) < 0:
            raise BoundError("SIZE_CONSTRAINT", "distortion level must be >= 0")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "measure", arr)
        object.__setattr__(self, "level", float(self.level))


@dataclass
class BoundResult:
    """Exact bound value, loosened per-gamma error bounds, diagnostics."""

    scenario: str
    correct_lb: float
    error_ub_by_gamma: dict = field(default_factory=dict)
    terms: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# scenario registry: canonical variables plus required factorization chain
# ---------------------------------------------------------------------------

# chain entries: (given names, produced names, must-be-deterministic)
SCENARIOS = {
    "p2p": {
        "variables": ("X", "Y"),
        "chain": ((("X",), ("Y",), False),),
        "prior": ("X",),
        "sizes": ("m",),
    },
    "gelfand_pinsker": {
        "variables": ("U", "S", "X", "Y"),
        "chain": (
            (("S",), ("U",), False),
            (("U", "S"), ("X",), True),
            (("X", "S"), ("Y",), False),
        ),
        "prior": ("S",),
        "sizes": ("m", "j"),
    },
    "marton2": {
        "variables": ("U1", "U2", "X", "Y1", "Y2"),
        "chain": (
            (("U1", "U2"), ("X",), True),
            (("X",), ("Y1", "Y2"), False),
        ),
        "prior": ("U1", "U2"),
        "sizes": ("m1", "m2", "j1", "j2"),
    },
    "marton3": {
        "variables": ("U0", "U1", "U2", "X", "Y1", "Y2"),
        "chain": (
            (("U0", "U1", "U2"), ("X",), True),
            (("X",), ("Y1", "Y2"), False),
        ),
        "prior": ("U0", "U1", "U2"),
        "sizes": ("m0", "m1", "m2", "j1", "j2"),
    },
    "berger_tung": {
        "variables": ("S1", "S2", "U1", "U2"),
        "chain": (
            (("S1",), ("U1",), False),
            (("S2",), ("U2",), False),
        ),
        "prior": ("S1", "S2"),
        "sizes": ("m1", "m2", "j1", "j2"),
    },
    "hb_kaspi": {
        "variables": ("S", "Y", "W", "U"),
        "chain": ((("S",), ("W", "U"), False),),
        "prior": ("S", "Y"),
        "sizes": ("m1", "m2", "j2"),
    },
    "multiple_description": {
        "variables": ("S", "U0", "U1", "U2"),
        "chain": (),
        "prior": ("S",),
        "sizes": ("m1", "m2", "j0"),
    },
    "jscc_mac": {
        "variables": ("S1", "S2", "T", "X1", "X2", "Y"),
        "chain": (
            ((), ("T",), False),
            (("S1", "T"), ("X1",), False),
            (("S2", "T"), ("X2",), False),
            (("X1", "X2"), ("Y",), False),
        ),
        "prior": ("S1", "S2"),
        "sizes": (),
    },
}


def scenario_variables(scenario: str) -> tuple:
    try:
        return SCENARIOS[scenario]["variables"]
    except KeyError:
        raise BoundError("SCENARIO_SHAPE", f"unknown scenario {scenario!r}") from None


def _require_vars(q: JointPMF, scenario: str) -> None:
    want = set(scenario_variables(scenario))
    have = set(q.names)
    if have != want:
        raise BoundError(
            "SCENARIO_SHAPE",
            f"{scenario} needs variables {sorted(want)}, got {sorted(have)}",
        )


def _cond_keepdims(q: JointPMF, given: tuple, produced: tuple) -> np.ndarray:
    """q(produced | given) broadcastable against the joint; 0 where the
    conditioning marginal vanishes (those cells carry no mass anyway)."""
    m_gp = q.marginal_keepdims(given + produced)
    m_g = q.marginal_keepdims(given)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = m_gp / m_g
    return np.where(m_g > 0, c, 0.0)


def check_factorization(q: JointPMF, scenario: str, *, strict: bool = True) -> None:
    """Compare the joint against the recomposed product of its extracted
    conditionals (max-abs tolerance 1e-9); deterministic links must have
    one-hot rows.  With ``strict=False`` violations downgrade to warnings."""
    info = SCENARIOS[scenario]
    recomposed = q.marginal_keepdims(info["prior"]).astype(float)
    problems = []
    for given, produced, det in info["chain"]:
        c = _cond_keepdims(q, given, produced)
        recomposed = recomposed * c
        if det:
            m_g = q.marginal_keepdims(given)
            paxes = tuple(q.axis(n) for n in produced)
            row_max = c.max(axis=paxes, keepdims=True)
            if np.any((m_g > 0) & (row_max < 1.0 - 1e-9)):
                problems.append(
                    f"map {'x'.join(given)} -> {'x'.join(produced)} is not deterministic"
                )
    gap = float(np.max(np.abs(np.broadcast_to(recomposed, q.shape) - q.mass)))
    if gap > FACTORIZATION_TOL:
        problems.insert(0, f"joint differs from required factorization by {gap:.3g}")
    if problems:
        msg = f"{scenario}: " + "; ".join(problems)
        if strict:
            raise BoundError("FACTORIZATION_VIOLATION", msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=3)


def validate_sizes(scenario: str, sizes: Optional[CodeSizes]) -> tuple:
    """Check presence and the scenario's arithmetic constraints; return the
    required sizes in registry order."""
    need = SCENARIOS[scenario]["sizes"]
    if not need:
        return ()
    if sizes is None:
        raise BoundError("SIZE_CONSTRAINT", f"{scenario} requires sizes {need}")
    vals = sizes.require(*need)
    named = dict(zip(need, vals))
    if scenario == "berger_tung":
        if named["j1"] < named["m1"] or named["j2"] < named["m2"]:
            raise BoundError("SIZE_CONSTRAINT", "berger_tung requires J_k >= M_k")
    if scenario == "hb_kaspi":
        if named["j2"] < named["m2"]:
            raise BoundError("SIZE_CONSTRAINT", "hb_kaspi requires J2 >= M2")
        if sizes.m is not None and sizes.m != named["m1"] * named["m2"]:
            raise BoundError("SIZE_CONSTRAINT", "hb_kaspi requires M = M1*M2")
    if scenario == "multiple_description":
        if named["m1"] % named["j0"] or named["m2"] % named["j0"]:
            raise BoundError(
                "DIVISIBILITY", "multiple_description requires J0 | M1 and J0 | M2"
            )
    return vals


def validate_design(
    q: JointPMF,
    scenario: str,
    sizes: Optional[CodeSizes] = None,
    *,
    strict_factorization: bool = True,
    factorization: bool = True,
) -> tuple:
    """Shared entry: variable shape, size constraints, factorization check."""
    _require_vars(q, scenario)
    vals = validate_sizes(scenario, sizes)
    if factorization:
        check_factorization(q, scenario, strict=strict_factorization)
    return vals


# ---------------------------------------------------------------------------
# evaluation helpers
# ---------------------------------------------------------------------------


def _pow2(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.exp2(x)


def _load(coef: float, exponent: np.ndarray) -> np.ndarray:
    """coef * 2**exponent with a vanishing coefficient killing the term even
    against an infinite exponent (an absent term, not a 0*inf accident)."""
    if coef == 0:
        return np.zeros_like(exponent)
    return coef * _pow2(exponent)


def _expect(q: JointPMF, arr) -> float:
    with np.errstate(invalid="ignore"):
        contrib = np.where(q.mass > 0, q.mass * np.broadcast_to(arr, q.shape), 0.0)
    return float(contrib.sum())


def _union_minmargin(margins: Sequence[np.ndarray], violated=None) -> np.ndarray:
    """Pointwise minimum of the event margins; outcomes with a violated
    (gamma-independent) event get -inf so they sit in the union for all gamma."""
    mm = margins[0]
    for m in margins[1:]:
        mm = np.minimum(mm, m)
    if violated is not None:
        mm = np.where(violated, -np.inf, mm)
    return mm


def _loosened(q: JointPMF, minmargin: np.ndarray, constant: float, gammas) -> dict:
    out = {}
    for g in gammas or ():
        g = float(g)
        p_union = _expect(q, (minmargin < g).astype(float))
        out[g] = min(1.0, p_union + constant * 2.0 ** (-g))
    return out


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def _recon_map(kernel: ConditionalKernel) -> np.ndarray:
    """Deterministic reconstruction kernel -> integer index map over its
    given axes (argmax of the one-hot rows)."""
    if len(kernel.produced) != 1:
        raise BoundError("SCENARIO_SHAPE", "reconstruction kernel must produce one variable")
    table = kernel.table
    if np.any(table.max(axis=-1) < 1.0 - 1e-9):
        raise BoundError(
            "SCENARIO_SHAPE",
            f"reconstruction kernel {kernel!r} must be deterministic (one-hot rows)",
        )
    return np.argmax(table, axis=-1)


def _aligned(q: JointPMF, names: Sequence[str], arr: np.ndarray) -> np.ndarray:
    """Array whose axes follow ``names`` -> keepdims array aligned to host axes."""
    names = tuple(names)
    order = sorted(range(len(names)), key=lambda i: q.axis(names[i]))
    arr_t = np.transpose(arr, order)
    shape = [1] * len(q.names)
    for i in order:
        shape[q.axis(names[i])] = arr.shape[i]
    return np.ascontiguousarray(arr_t).reshape(shape)


def _distortion_ok(
    q: JointPMF,
    dist: DistortionSpec,
    recon: ConditionalKernel,
) -> np.ndarray:
    """Boolean keepdims array: distortion of the reconstruction within level."""
    given_names = tuple(v.name for v in recon.given)
    src = q.variable(dist.source)
    rmap = _recon_map(recon)
    if recon.produced[0].alphabet.size != dist.measure.shape[1]:
        raise BoundError("SCENARIO_SHAPE", "distortion table does not match reconstruction alphabet")
    if src.alphabet.size != dist.measure.shape[0]:
        raise BoundError("SCENARIO_SHAPE", "distortion table does not match source alphabet")
    # distortion value over (source, given...) then aligned to host axes
    vals = dist.measure[
        np.arange(src.alphabet.size).reshape((-1,) + (1,) * rmap.ndim), rmap[None, ...]
    ]
    return _aligned(q, (dist.source,) + given_names, vals) <= dist.level


def _info(q, left, right, given=()):
    return density_exponents(q, DensitySpec.info(left, right, given))


def _entropy(q, left, given=()):
    return density_exponents(q, DensitySpec.entropy(left, given))


# ---------------------------------------------------------------------------
# the eight evaluators
# ---------------------------------------------------------------------------


def p2p_bound(q: JointPMF, sizes: CodeSizes, gammas: Iterable[float] = ()) -> BoundResult:
    """Point-to-point: E[ 1 / (1 + (M-1) 2**-i(X;Y)) ].

    No loosened form is defined for this scenario, so the gamma map stays
    empty regardless of ``gammas``.
    """
    _require_vars(q, "p2p")
    (m,) = validate_sizes("p2p", sizes)
    i_xy = _info(q, "X", "Y")
    load = _load(m - 1, -i_xy)
    correct = _expect(q, 1.0 / (1.0 + load))
    return BoundResult(
        "p2p",
        _clamp01(correct),
        {},
        {"packing": _expect(q, load)},
    )


def gp_bound(
    q: JointPMF,
    sizes: CodeSizes,
    gammas: Iterable[float] = (),
    *,
    strict_factorization: bool = True,
) -> BoundResult:
    """Gelfand-Pinsker: E[ 1 / ((1 + J**-1 2**i(U;S)) (1 + M J 2**-i(U;Y))) ];
    loosened: P[log J - i(U;S) < g or i(U;Y) - log MJ < g] + 3 * 2**-g."""
    _require_vars(q, "gelfand_pinsker")
    m, j = validate_sizes("gelfand_pinsker", sizes)
    check_factorization(q, "gelfand_pinsker", strict=strict_factorization)
    i_us = _info(q, "U", "S")
    i_uy = _info(q, "U", "Y")
    cover = _load(1.0 / j, i_us)
    pack = _load(m * j, -i_uy)
    correct = _expect(q, 1.0 / ((1.0 + cover) * (1.0 + pack)))
    mm = _union_minmargin([math.log2(j) - i_us, i_uy - math.log2(m * j)])
    return BoundResult(
        "gelfand_pinsker",
        _clamp01(correct),
        _loosened(q, mm, 3.0, gammas),
        {"covering": _expect(q, cover), "packing": _expect(q, pack)},
    )


def marton2_bound(
    q: JointPMF,
    sizes: CodeSizes,
    gammas: Iterable[float] = (),
    *,
    strict_factorization: bool = True,
) -> BoundResult:
    """Two-auxiliary broadcast inner bound:
    E[ ((1 + (J1 J2)**-1 2**i(U1;U2)) prod_k (1 + Mk Jk 2**-i(Uk;Yk)))**-1 ];
    loosened with three density events and constant 7."""
    _require_vars(q, "marton2")
    m1, m2, j1, j2 = validate_sizes("marton2", sizes)
    check_factorization(q, "marton2", strict=strict_factorization)
    i_uu = _info(q, "U1", "U2")
    i_1 = _info(q, "U1", "Y1")
    i_2 = _info(q, "U2", "Y2")
    cover = _load(1.0 / (j1 * j2), i_uu)
    pack1 = _load(m1 * j1, -i_1)
    pack2 = _load(m2 * j2, -i_2)
    correct = _expect(q, 1.0 / ((1.0 + cover) * (1.0 + pack1) * (1.0 + pack2)))
    mm = _union_minmargin(
        [
            math.log2(j1 * j2) - i_uu,
            i_1 - math.log2(m1 * j1),
            i_2 - math.log2(m2 * j2),
        ]
    )
    return BoundResult(
        "marton2",
        _clamp01(correct),
        _loosened(q, mm, 7.0, gammas),
        {
            "mutual_covering": _expect(q, cover),
            "packing_1": _expect(q, pack1),
            "packing_2": _expect(q, pack2),
        },
    )


def marton3_bound(
    q: JointPMF,
    sizes: CodeSizes,
    gammas: Iterable[float] = (),
    *,
    strict_factorization: bool = True,
) -> BoundResult:
    """Three-auxiliary (common message) broadcast inner bound:
    E[ ((1 + (J1 J2)**-1 2**i(U1;U2|U0))
        prod_k (1 + Mk Jk 2**-i(Uk;Yk|U0) + M0 Jk Mk 2**-i(U0 Uk;Yk)))**-1 ];
    loosened with five density events and constant 17."""
    _require_vars(q, "marton3")
    m0, m1, m2, j1, j2 = validate_sizes("marton3", sizes)
    check_factorization(q, "marton3", strict=strict_factorization)
    i_uu = _info(q, "U1", "U2", "U0")
    loads = {"mutual_covering": _load(1.0 / (j1 * j2), i_uu)}
    denom = 1.0 + loads["mutual_covering"]
    margins = [math.log2(j1 * j2) - i_uu]
    for k, (mk, jk) in (("1", (m1, j1)), ("2", (m2, j2))):
        i_priv = _info(q, f"U{k}", f"Y{k}", "U0")
        i_full = _info(q, ("U0", f"U{k}"), f"Y{k}")
        priv = _load(mk * jk, -i_priv)
        full = _load(m0 * jk * mk, -i_full)
        loads[f"packing_private_{k}"] = priv
        loads[f"packing_common_{k}"] = full
        denom = denom * (1.0 + priv + full)
        margins.append(i_priv - math.log2(mk * jk))
        margins.append(i_full - math.log2(m0 * mk * jk))
    correct = _expect(q, 1.0 / denom)
    mm = _union_minmargin(margins)
    return BoundResult(
        "marton3",
        _clamp01(correct),
        _loosened(q, mm, 17.0, gammas),
        {name: _expect(q, arr) for name, arr in loads.items()},
    )


def berger_tung_bound(
    q: JointPMF,
    recon: Sequence[ConditionalKernel],
    dist: Sequence[DistortionSpec],
    sizes: CodeSizes,
    gammas: Iterable[float] = (),
    *,
    strict_factorization: bool = True,
) -> BoundResult:
    """Distributed lossy compression:
    E[ 1{d1 <= D1, d2 <= D2} /
       ((1 + J1**-1 2**i(S1;U1)) (1 + J2**-1 2**i(S2;U2))
        (1 + (J2/M2 + J1/M1 + J1 J2/(M1 M2)) 2**-i(U1;U2))) ];
    loosened with two distortion and three density events, constant 15."""
    _require_vars(q, "berger_tung")
    m1, m2, j1, j2 = validate_sizes("berger_tung", sizes)
    check_factorization(q, "berger_tung", strict=strict_factorization)
    ok1 = _distortion_ok(q, dist[0], recon[0])
    ok2 = _distortion_ok(q, dist[1], recon[1])
    ok = ok1 & ok2
    i_s1u1 = _info(q, "S1", "U1")
    i_s2u2 = _info(q, "S2", "U2")
    i_uu = _info(q, "U1", "U2")
    cover1 = _load(1.0 / j1, i_s1u1)
    cover2 = _load(1.0 / j2, i_s2u2)
    pack_coeff = j2 / m2 + j1 / m1 + (j1 * j2) / (m1 * m2)
    pack = _load(pack_coeff, -i_uu)
    integrand = np.where(ok, 1.0, 0.0) / ((1.0 + cover1) * (1.0 + cover2) * (1.0 + pack))
    correct = _expect(q, integrand)
    mm = _union_minmargin(
        [
            math.log2(j1) - i_s1u1,
            math.log2(j2) - i_s2u2,
            i_uu - math.log2((j1 * j2) / (m1 * m2)),
        ],
        violated=~ok,
    )
    return BoundResult(
        "berger_tung",
        _clamp01(correct),
        _loosened(q, mm, 15.0, gammas),
        {
            "covering_1": _expect(q, cover1),
            "covering_2": _expect(q, cover2),
            "mutual_packing": _expect(q, pack),
            "indicator": _expect(q, ok.astype(float)),
        },
    )


def hb_kaspi_bound(
    q: JointPMF,
    recon: Sequence[ConditionalKernel],
    dist: Sequence[DistortionSpec],
    sizes: CodeSizes,
    gammas: Iterable[float] = (),
    *,
    strict_factorization: bool = True,
) -> BoundResult:
    """Lossy coding with side information that may be absent:
    E[ 1{d1 <= D1, d2 <= D2} /
       ((1 + M1**-1 2**i(S;W) + (M1 J2)**-1 2**i(S;W,U))
        (1 + (J2/M2) 2**-i(Y;U|W))) ];
    loosened with two distortion and three density events, constant 5."""
    _require_vars(q, "hb_kaspi")
    m1, m2, j2 = validate_sizes("hb_kaspi", sizes)
    check_factorization(q, "hb_kaspi", strict=strict_factorization)
    ok1 = _distortion_ok(q, dist[0], recon[0])
    ok2 = _distortion_ok(q, dist[1], recon[1])
    ok = ok1 & ok2
    i_sw = _info(q, "S", "W")
    i_swu = _info(q, "S", ("W", "U"))
    i_yu_w = _info(q, "Y", "U", "W")
    cover_w = _load(1.0 / m1, i_sw)
    cover_wu = _load(1.0 / (m1 * j2), i_swu)
    pack = _load(j2 / m2, -i_yu_w)
    integrand = np.where(ok, 1.0, 0.0) / ((1.0 + cover_w + cover_wu) * (1.0 + pack))
    correct = _expect(q, integrand)
    mm = _union_minmargin(
        [
            math.log2(m1) - i_sw,
            math.log2(m1 * j2) - i_swu,
            i_yu_w - math.log2(j2 / m2),
        ],
        violated=~ok,
    )
    return BoundResult(
        "hb_kaspi",
        _clamp01(correct),
        _loosened(q, mm, 5.0, gammas),
        {
            "covering_w": _expect(q, cover_w),
            "covering_wu": _expect(q, cover_wu),
            "packing": _expect(q, pack),
            "indicator": _expect(q, ok.astype(float)),
        },
    )


def md_bound(
    q: JointPMF,
    recon: Sequence[ConditionalKernel],
    dist: Sequence[DistortionSpec],
    sizes: CodeSizes,
    gammas: Iterable[float] = (),
) -> BoundResult:
    """Multiple descriptions:
    E[ 1{d0 <= D0, d1 <= D1, d2 <= D2} /
       (1 + J0**-1 2**i(S;U0) + M1**-1 2**i(S;U0 U1) + M2**-1 2**i(S;U0 U2)
          + J0 (M1 M2)**-1 2**(i(S;U0 U1 U2) + i(U1;U2|U0))) ];
    loosened with three distortion and four density events, constant 4.
    Any joint over (S, U0, U1, U2) is admissible; the only arithmetic
    constraint is that J0 divides both M1 and M2."""
    _require_vars(q, "multiple_description")
    m1, m2, j0 = validate_sizes("multiple_description", sizes)
    ok0 = _distortion_ok(q, dist[0], recon[0])
    ok1 = _distortion_ok(q, dist[1], recon[1])
    ok2 = _distortion_ok(q, dist[2], recon[2])
    ok = ok0 & ok1 & ok2
    i_0 = _info(q, "S", "U0")
    i_01 = _info(q, "S", ("U0", "U1"))
    i_02 = _info(q, "S", ("U0", "U2"))
    i_full = _info(q, "S", ("U0", "U1", "U2")) + _info(q, "U1", "U2", "U0")
    c0 = _load(1.0 / j0, i_0)
    c1 = _load(1.0 / m1, i_01)
    c2 = _load(1.0 / m2, i_02)
    cf = _load(j0 / (m1 * m2), i_full)
    integrand = np.where(ok, 1.0, 0.0) / (1.0 + c0 + c1 + c2 + cf)
    correct = _expect(q, integrand)
    mm = _union_minmargin(
        [
            math.log2(j0) - i_0,
            math.log2(m1) - i_01,
            math.log2(m2) - i_02,
            math.log2((m1 * m2) / j0) - i_full,
        ],
        violated=~ok,
    )
    return BoundResult(
        "multiple_description",
        _clamp01(correct),
        _loosened(q, mm, 4.0, gammas),
        {
            "covering_0": _expect(q, c0),
            "covering_01": _expect(q, c1),
            "covering_02": _expect(q, c2),
            "covering_full": _expect(q, cf),
            "indicator": _expect(q, ok.astype(float)),
        },
    )


def _k_variable(count: int) -> Variable:
    return Variable("K", Alphabet("K", tuple(str(i) for i in range(count))), "common-part")


def jscc_mac_bound(
    q: JointPMF,
    gammas: Iterable[float] = (),
    *,
    strict_factorization: bool = True,
) -> BoundResult:
    """Lossless joint source-channel coding over a two-user MAC:
    E[ (1 + 2**(h(S1|S2) - i(Y;X1|X2,S2,T)) + 2**(h(S2|S1) - i(Y;X2|X1,S1,T))
          + 2**(h(S1,S2|K) - i(Y;X1,X2|K,T)) + 2**(h(S1,S2) - i(Y;X1,X2)))**-1 ],
    where K is the maximal common part of (S1, S2), adjoined internally as a
    derived variable; loosened with four density events and constant 4."""
    _require_vars(q, "jscc_mac")
    check_factorization(q, "jscc_mac", strict=strict_factorization)
    pair = _ordered_pair(q, "S1", "S2")
    labeling = compute_common_part(pair)
    kvar = _k_variable(labeling.count)
    s1 = q.variable("S1")
    kmap = ConditionalKernel.from_function(
        (s1,), kvar, lambda sym: str(labeling.labels1[sym])
    )
    qk = compose(q, kmap)
    h_s1_s2 = _entropy(qk, "S1", "S2")
    h_s2_s1 = _entropy(qk, "S2", "S1")
    h_12_k = _entropy(qk, ("S1", "S2"), "K")
    h_12 = _entropy(qk, ("S1", "S2"))
    i_1 = _info(qk, "Y", "X1", ("X2", "S2", "T"))
    i_2 = _info(qk, "Y", "X2", ("X1", "S1", "T"))
    i_12_k = _info(qk, "Y", ("X1", "X2"), ("K", "T"))
    i_12 = _info(qk, "Y", ("X1", "X2"))
    t1 = _pow2(h_s1_s2 - i_1)
    t2 = _pow2(h_s2_s1 - i_2)
    t3 = _pow2(h_12_k - i_12_k)
    t4 = _pow2(h_12 - i_12)
    correct = _expect(qk, 1.0 / (1.0 + t1 + t2 + t3 + t4))
    mm = _union_minmargin(
        [i_1 - h_s1_s2, i_2 - h_s2_s1, i_12_k - h_12_k, i_12 - h_12]
    )
    return BoundResult(
        "jscc_mac",
        _clamp01(correct),
        _loosened(qk, mm, 4.0, gammas),
        {
            "term_s1_given_s2": _expect(qk, t1),
            "term_s2_given_s1": _expect(qk, t2),
            "term_joint_given_k": _expect(qk, t3),
            "term_joint": _expect(qk, t4),
        },
    )


def _ordered_pair(q: JointPMF, a: str, b: str) -> JointPMF:
    """Two-variable marginal pmf with axes ordered exactly (a, b)."""
    from .pmf import _wrap

    arr = q.marginal((a, b))
    return _wrap((q.variable(a), q.variable(b)), arr)
