"""Information-density and entropy-density functionals.

All logarithms are base two; rates and densities are in bits.  Extended-real
results are explicit floats: ``-inf`` encodes a zero numerator (so that
``2**value`` multiplies as exactly 0) and ``+inf`` a zero conditional mass
under a positive conditioning event.  NaN is never returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DensityError
from .pmf import JointPMF

NEG_INF = float("-inf")
POS_INF = float("inf")


def _names(x) -> tuple:
    if isinstance(x, str):
        return (x,)
    return tuple(x)


@dataclass(frozen=True)
class DensitySpec:
    """Argument pattern of a density: left/right variable sets plus conditioning.

    ``kind="info"`` is the conditional information density
    log2 p(l, r | g) / (p(l | g) p(r | g)); ``kind="entropy"`` is the
    conditional self-information -log2 p(l | g) (``right`` must be empty).
    """

    left: tuple
    right: tuple = ()
    given: tuple = ()
    kind: str = "info"

    def __post_init__(self):
        object.__setattr__(self, "left", _names(self.left))
        object.__setattr__(self, "right", _names(self.right))
        object.__setattr__(self, "given", _names(self.given))
        if self.kind not in ("info", "entropy"):
            raise DensityError("SHAPE_MISMATCH", f"unknown density kind {self.kind!r}")
        if not self.left:
            raise DensityError("SHAPE_MISMATCH", "left variable set is empty")
        if self.kind == "info" and not self.right:
            raise DensityError("SHAPE_MISMATCH", "information density needs a right set")
        if self.kind == "entropy" and self.right:
            raise DensityError("SHAPE_MISMATCH", "entropy density takes no right set")
        all_names = self.left + self.right + self.given
        if len(set(all_names)) != len(all_names):
            raise DensityError(
                "SHAPE_MISMATCH", f"density variable sets overlap: {all_names}"
            )

    @staticmethod
    def info(left, right, given=()) -> "DensitySpec":
        return DensitySpec(_names(left), _names(right), _names(given), "info")

    @staticmethod
    def entropy(left, given=()) -> "DensitySpec":
        return DensitySpec(_names(left), (), _names(given), "entropy")

    @property
    def involved(self) -> tuple:
        return self.left + self.right + self.given


def _log2(arr: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log2(arr)


def density_exponents(p: JointPMF, spec: DensitySpec) -> np.ndarray:
    """Density values as an array broadcastable against ``p.mass``.

    Cells whose numerator marginal is zero get -inf (info) or +inf (entropy),
    including cells where the conditioning itself has zero mass; the scalar
    entry points below additionally reject zero-mass conditioning.
    """
    key = ("density", spec)
    hit = p._cache.get(key)
    if hit is not None:
        return hit
    for n in spec.involved:
        p.axis(n)
    g = spec.given
    if spec.kind == "info":
        m_num = p.marginal_keepdims(spec.left + spec.right + g)
        with np.errstate(invalid="ignore"):
            # sum the two subtracted logs first so swapping left/right is
            # exactly symmetric in floating point
            val = (_log2(m_num) + _log2(p.marginal_keepdims(g))) - (
                _log2(p.marginal_keepdims(spec.left + g))
                + _log2(p.marginal_keepdims(spec.right + g))
            )
        out = np.where(m_num > 0, val, NEG_INF)
    else:
        m_num = p.marginal_keepdims(spec.left + g)
        with np.errstate(invalid="ignore"):
            val = _log2(p.marginal_keepdims(g)) - _log2(m_num)
        out = np.where(m_num > 0, val, POS_INF)
    out.flags.writeable = False
    p._cache[key] = out
    return out


def _scalar(p: JointPMF, spec: DensitySpec, outcome) -> float:
    for n in spec.involved:
        if n not in outcome:
            raise DensityError("UNKNOWN_VARIABLE", f"outcome is missing {n!r}")
    # exponent arrays keep singleton axes for uninvolved variables, so index 0
    # is valid wherever the outcome does not (need to) name a symbol
    idx = tuple(
        p.variable(n).alphabet.index(outcome[n]) if n in outcome else 0
        for n in p.names
    )
    if spec.given:
        cond = p.marginal_keepdims(spec.given)
        cpick = tuple(min(i, s - 1) for i, s in zip(idx, cond.shape))
        if not cond[cpick] > 0:
            raise DensityError(
                "ZERO_CONDITIONING", f"conditioning event has zero mass at {outcome!r}"
            )
    arr = density_exponents(p, spec)
    pick = tuple(min(i, s - 1) for i, s in zip(idx, arr.shape))
    return float(arr[pick])


def info_density(p: JointPMF, spec: DensitySpec, outcome) -> float:
    """log2 p(l, r | g) / (p(l | g) p(r | g)) at one outcome (bits)."""
    if spec.kind != "info":
        raise DensityError("SHAPE_MISMATCH", "spec is not an information density")
    return _scalar(p, spec, outcome)


def entropy_density(p: JointPMF, spec: DensitySpec, outcome) -> float:
    """-log2 p(l | g) at one outcome (bits); +inf off the support."""
    if spec.kind != "entropy":
        raise DensityError("SHAPE_MISMATCH", "spec is not an entropy density")
    return _scalar(p, spec, outcome)


def density_table(p: JointPMF, spec: DensitySpec) -> dict:
    """All density values, keyed by tuples of involved-variable symbols.

    Key order follows the host pmf's variable order restricted to the
    involved variables; values agree exactly with the scalar operations.
    """
    arr = density_exponents(p, spec)
    involved = [v for v in p.variables if v.name in set(spec.involved)]
    axes = [p.axis(v.name) for v in involved]
    out = {}
    for combo in np.ndindex(*(v.alphabet.size for v in involved)):
        pick = [0] * len(p.names)
        for ax, i in zip(axes, combo):
            pick[ax] = i
        pick = tuple(min(i, s - 1) for i, s in zip(pick, arr.shape))
        key = tuple(v.alphabet.symbols[i] for v, i in zip(involved, combo))
        out[key] = float(arr[pick])
    return out
