"""Exact algebra over dense finite joint distributions.

A :class:`JointPMF` stores one probability mass per cell of a dense numpy
array, one axis per named variable.  Everything downstream (densities, bound
evaluators, codec simulators) works off this single carrier, so the rules here
are strict: construction rejects negative or badly normalized mass, accepted
mass is renormalized to machine precision, and instances are immutable and
safe to share between workers.

Alphabets are small by design (the intended regime is a handful of variables
with at most a few dozen symbols each); joints above ``MAX_CELLS`` cells are
refused rather than silently thrashing memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import PmfError

#: refuse dense joints above this many cells
MAX_CELLS = 10_000_000

#: |total mass - 1| beyond this is rejected at construction; accepted mass is
#: renormalized exactly (decimal text input loses bits, so small drift is fine)
ACCEPT_TOL = 1e-9

ROLES = (
    "source",
    "state",
    "input",
    "output",
    "auxiliary",
    "time-sharing",
    "common-part",
)


@dataclass(frozen=True)
class Alphabet:
    """Named, ordered set of distinct symbol labels."""

    name: str
    symbols: tuple

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(self.symbols) < 1:
            raise PmfError("SHAPE_MISMATCH", f"alphabet {self.name!r} is empty")
        if len(set(self.symbols)) != len(self.symbols):
            raise PmfError(
                "SHAPE_MISMATCH", f"alphabet {self.name!r} has duplicate symbols"
            )

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise PmfError(
                "UNKNOWN_VARIABLE",
                f"symbol {symbol!r} not in alphabet {self.name!r}",
            ) from None


@dataclass(frozen=True)
class Variable:
    """A named coordinate of a joint pmf, tied to an alphabet and a role."""

    name: str
    alphabet: Alphabet
    role: str = "auxiliary"

    def __post_init__(self):
        if self.role not in ROLES:
            raise PmfError(
                "SHAPE_MISMATCH",
                f"variable {self.name!r} has unknown role {self.role!r}",
            )


class JointPMF:
    """Immutable dense joint distribution over named finite variables.

    Use :func:`build_joint` (strict validation of user input) or the algebra
    functions (:func:`marginalize`, :func:`compose`) to obtain instances.
    """

    __slots__ = ("variables", "mass", "_axis", "_cache", "_flat_cum")

    def __init__(self, variables: Iterable[Variable], mass, _validated: bool = False):
        variables = tuple(variables)
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise PmfError("VARIABLE_COLLISION", f"duplicate variable names: {names}")
        shape = tuple(v.alphabet.size for v in variables)
        cells = int(np.prod(shape, dtype=np.int64)) if shape else 1
        if cells > MAX_CELLS:
            raise PmfError(
                "SIZE_LIMIT", f"joint has {cells} cells (limit {MAX_CELLS})"
            )
        arr = np.asarray(mass, dtype=float)
        if arr.size != cells:
            raise PmfError(
                "SHAPE_MISMATCH",
                f"mass has {arr.size} entries, expected {cells} for shape {shape}",
            )
        arr = arr.reshape(shape).copy()
        if not _validated:
            if np.any(arr < 0):
                raise PmfError("NEGATIVE_MASS", "mass entries must be >= 0")
            total = float(arr.sum())
            if not math.isfinite(total) or abs(total - 1.0) > ACCEPT_TOL:
                raise PmfError(
                    "NOT_NORMALIZED", f"total mass {total!r} is not 1 within {ACCEPT_TOL}"
                )
        total = float(arr.sum())
        if total <= 0:
            raise PmfError("NOT_NORMALIZED", "total mass is zero")
        arr /= total
        arr.flags.writeable = False
        self.variables = variables
        self.mass = arr
        self._axis = {v.name: i for i, v in enumerate(variables)}
        self._cache = {}
        self._flat_cum = None

    # ---- introspection -------------------------------------------------

    @property
    def names(self) -> tuple:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple:
        return self.mass.shape

    def axis(self, name: str) -> int:
        try:
            return self._axis[name]
        except KeyError:
            raise PmfError("UNKNOWN_VARIABLE", f"no variable named {name!r}") from None

    def variable(self, name: str) -> Variable:
        return self.variables[self.axis(name)]

    def outcome(self, indices) -> dict:
        """Map an index tuple (host variable order) to {name: symbol}."""
        return {
            v.name: v.alphabet.symbols[i] for v, i in zip(self.variables, indices)
        }

    def indices_of(self, outcome: Mapping) -> tuple:
        """Map {name: symbol} (must cover every variable) to an index tuple."""
        idx = []
        for v in self.variables:
            if v.name not in outcome:
                raise PmfError(
                    "UNKNOWN_VARIABLE", f"outcome is missing variable {v.name!r}"
                )
            idx.append(v.alphabet.index(outcome[v.name]))
        return tuple(idx)

    # ---- cached marginals ----------------------------------------------

    def marginal_keepdims(self, names: Iterable[str]) -> np.ndarray:
        """Sum out all variables not in ``names``; keep singleton axes.

        Returned arrays broadcast against ``self.mass`` and are cached, since
        the bound evaluators hit the same variable subsets in tight loops.
        """
        key = frozenset(names)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        for n in key:
            self.axis(n)
        drop = tuple(i for i, v in enumerate(self.variables) if v.name not in key)
        out = self.mass.sum(axis=drop, keepdims=True) if drop else self.mass
        out.flags.writeable = False
        self._cache[key] = out
        return out

    def marginal(self, names: Iterable[str]) -> np.ndarray:
        """Dense marginal array with axes ordered exactly as ``names``."""
        names = tuple(names)
        kept = self.marginal_keepdims(names)
        # drop only the non-requested (summed-out) singleton axes; requested
        # variables keep their axes even when their alphabet has one symbol
        host_order = [n for n in self.names if n in set(names)]
        host_shape = tuple(self.variable(n).alphabet.size for n in host_order)
        arr = kept.reshape(host_shape)
        perm = [host_order.index(n) for n in names]
        return arr.transpose(perm) if len(names) > 1 else arr

    # ---- sampling -------------------------------------------------------

    def sample_indices(self, stream: np.random.Generator, size=None) -> np.ndarray:
        """Draw outcome index tuples i.i.d. from the pmf (inverse CDF on the
        flattened cell order, so the seed-to-outcome map is fixed)."""
        if self._flat_cum is None:
            cum = np.cumsum(self.mass.reshape(-1))
            cum.flags.writeable = False
            self._flat_cum = cum
        n = 1 if size is None else int(size)
        u = stream.random(n)
        flat = np.minimum(
            np.searchsorted(self._flat_cum, u, side="right"), self._flat_cum.size - 1
        )
        idx = np.stack(np.unravel_index(flat, self.shape), axis=-1)
        return idx[0] if size is None else idx

    def __repr__(self):
        return f"JointPMF({', '.join(self.names)}; shape={self.shape})"


def _wrap(variables, arr) -> JointPMF:
    """Internal constructor for algebra results (already-valid mass)."""
    return JointPMF(variables, arr, _validated=True)


def build_joint(variables: Iterable[Variable], mass) -> JointPMF:
    """Validate and build a joint pmf from flat row-major mass entries."""
    return JointPMF(variables, mass)


def marginalize(p: JointPMF, keep: Iterable[str]) -> JointPMF:
    """Sum the mass over every variable not in ``keep`` (host order kept)."""
    keep = {k if isinstance(k, str) else k.name for k in keep}
    if not keep:
        raise PmfError("SHAPE_MISMATCH", "keep set must be nonempty")
    for name in keep:
        p.axis(name)
    kept_vars = tuple(v for v in p.variables if v.name in keep)
    drop = tuple(i for i, v in enumerate(p.variables) if v.name not in keep)
    arr = p.mass.sum(axis=drop) if drop else p.mass
    return _wrap(kept_vars, arr)


class ConditionalKernel:
    """Row-stochastic map attaching new variables to existing ones.

    ``table`` is indexed by (given symbols..., produced symbols...).  Every
    given-row must sum to 1 within ``ACCEPT_TOL`` and is renormalized after
    acceptance.  Deterministic maps are ordinary kernels with one-hot rows,
    so composition has a single code path.
    """

    __slots__ = ("given", "produced", "table")

    def __init__(self, given: Iterable[Variable], produced: Iterable[Variable], table):
        given = tuple(given)
        produced = tuple(produced)
        if not produced:
            raise PmfError("SHAPE_MISMATCH", "kernel must produce at least one variable")
        names = [v.name for v in given + produced]
        if len(set(names)) != len(names):
            raise PmfError("VARIABLE_COLLISION", f"kernel reuses variable names: {names}")
        gshape = tuple(v.alphabet.size for v in given)
        pshape = tuple(v.alphabet.size for v in produced)
        arr = np.asarray(table, dtype=float)
        want = int(np.prod(gshape + pshape, dtype=np.int64))
        if arr.size != want:
            raise PmfError(
                "SHAPE_MISMATCH",
                f"kernel table has {arr.size} entries, expected {want}",
            )
        arr = arr.reshape(gshape + pshape).copy()
        if np.any(arr < 0):
            raise PmfError("NEGATIVE_MASS", "kernel entries must be >= 0")
        paxes = tuple(range(len(gshape), len(gshape) + len(pshape)))
        row_sums = arr.sum(axis=paxes, keepdims=True)
        if np.any(np.abs(row_sums - 1.0) > ACCEPT_TOL):
            worst = float(np.max(np.abs(row_sums - 1.0)))
            raise PmfError(
                "NOT_NORMALIZED",
                f"kernel rows must each sum to 1 (worst |sum-1| = {worst:g})",
            )
        arr /= row_sums
        arr.flags.writeable = False
        self.given = given
        self.produced = produced
        self.table = arr

    @classmethod
    def from_function(cls, given: Iterable[Variable], produced: Variable, fn):
        """Deterministic kernel from a symbol-level function.

        ``fn`` receives one symbol per given variable (in order) and returns a
        symbol of ``produced``; the table is the matching one-hot encoding.
        """
        given = tuple(given)
        gshape = tuple(v.alphabet.size for v in given)
        out = np.zeros(gshape + (produced.alphabet.size,))
        for idx in np.ndindex(*gshape) if gshape else [()]:
            sym = fn(*(v.alphabet.symbols[i] for v, i in zip(given, idx)))
            out[idx + (produced.alphabet.index(sym),)] = 1.0
        return cls(given, (produced,), out)

    def __repr__(self):
        g = ",".join(v.name for v in self.given)
        p = ",".join(v.name for v in self.produced)
        return f"ConditionalKernel({g} -> {p})"


def compose(p: JointPMF, k: ConditionalKernel) -> JointPMF:
    """Chain-rule product: extend ``p`` with ``k``'s produced variables."""
    for v in k.given:
        ax = p.axis(v.name)
        if p.variables[ax].alphabet.size != v.alphabet.size:
            raise PmfError(
                "SHAPE_MISMATCH",
                f"kernel given variable {v.name!r} disagrees with host alphabet size",
            )
    for v in k.produced:
        if v.name in p._axis:
            raise PmfError(
                "VARIABLE_COLLISION", f"kernel produces existing variable {v.name!r}"
            )
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if len(p.variables) + len(k.produced) > len(letters):
        raise PmfError("SIZE_LIMIT", "too many joint variables to compose")
    sub = {v.name: letters[i] for i, v in enumerate(p.variables)}
    nxt = len(p.variables)
    for v in k.produced:
        sub[v.name] = letters[nxt]
        nxt += 1
    p_sub = "".join(sub[v.name] for v in p.variables)
    k_sub = "".join(sub[v.name] for v in k.given + k.produced)
    out_sub = p_sub + "".join(sub[v.name] for v in k.produced)
    arr = np.einsum(f"{p_sub},{k_sub}->{out_sub}", p.mass, k.table)
    return _wrap(p.variables + k.produced, arr)


def expectation(p: JointPMF, f) -> float:
    """Sum of ``p(outcome) * f(outcome)`` over the support.

    Zero-mass outcomes contribute exactly 0 even where ``f`` is infinite
    (the 0*inf := 0 convention); an expectation mixing +inf and -inf on the
    support is undefined and raises ``NAN_FUNCTIONAL``.
    """
    total = 0.0
    pos_inf = neg_inf = False
    for idx in zip(*np.nonzero(p.mass)):
        val = float(f(p.outcome(idx)))
        if math.isnan(val):
            raise PmfError(
                "NAN_FUNCTIONAL", f"functional returned NaN at {p.outcome(idx)!r}"
            )
        if val == math.inf:
            pos_inf = True
        elif val == -math.inf:
            neg_inf = True
        else:
            total += float(p.mass[idx]) * val
    if pos_inf and neg_inf:
        raise PmfError(
            "NAN_FUNCTIONAL", "expectation mixes +inf and -inf on the support"
        )
    if pos_inf:
        return math.inf
    if neg_inf:
        return -math.inf
    return total


def sample(p: JointPMF, stream: np.random.Generator) -> dict:
    """Draw one outcome, returned as {variable name: symbol}."""
    return p.outcome(tuple(p.sample_indices(stream)))


@dataclass(frozen=True, eq=False)
class CommonPartLabeling:
    """Maximal common random variable of a two-variable pmf.

    Two support symbols share a component id exactly when they are connected
    in the bipartite graph whose edges are the support pairs.  Symbols with
    zero marginal probability get fresh singleton ids.
    """

    labels1: dict
    labels2: dict
    count: int
    index_labels1: np.ndarray
    index_labels2: np.ndarray


def compute_common_part(p12: JointPMF) -> CommonPartLabeling:
    """Connected-component labeling of the bipartite support graph."""
    if len(p12.variables) != 2:
        raise PmfError(
            "WRONG_ARITY",
            f"common part needs exactly two variables, got {len(p12.variables)}",
        )
    n1, n2 = p12.shape
    parent = list(range(n1 + n2))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for i, j in zip(*np.nonzero(p12.mass)):
        union(int(i), n1 + int(j))

    ids: dict = {}
    lab1 = np.empty(n1, dtype=np.int64)
    lab2 = np.empty(n2, dtype=np.int64)
    for i in range(n1):
        lab1[i] = ids.setdefault(find(i), len(ids))
    for j in range(n2):
        lab2[j] = ids.setdefault(find(n1 + j), len(ids))
    v1, v2 = p12.variables
    return CommonPartLabeling(
        labels1={v1.alphabet.symbols[i]: int(lab1[i]) for i in range(n1)},
        labels2={v2.alphabet.symbols[j]: int(lab2[j]) for j in range(n2)},
        count=len(ids),
        index_labels1=lab1,
        index_labels2=lab2,
    )
