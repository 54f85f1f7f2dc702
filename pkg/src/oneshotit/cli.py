"""Batch front end: parse scenario configs, run bounds / simulations /
rate queries, emit CSV or JSON-lines rows.

Config files are JSON.  Probabilities are flat row-major lists (decimal
strings or numbers) under ``distributions``; each scenario wires its named
blocks to fixed variable names, see ``_BLOCKS``.  Outputs are rows with the
fixed columns scenario,mode,key,value,seed,config_digest and are bit-stable
for a fixed config: rerunning the same file yields identical bytes.

The environment variable ONESHOT_THREADS caps the worker count; evaluation
is deterministic and single-threaded, so any value produces identical
results.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bounds as _bounds
from . import codecsim as _codecsim
from . import secondorder as _secondorder
from .bounds import CodeSizes, DistortionSpec
from .errors import ConfigError, OneshotError
from .pmf import Alphabet, ConditionalKernel, JointPMF, Variable, build_joint, compose

TOOL_VERSION = "0.1.0"

# block name -> (given variables, produced variables); first block seeds the joint
_BLOCKS = {
    "p2p": (("input", (), ("X",)), ("channel", ("X",), ("Y",))),
    "gelfand_pinsker": (
        ("state", (), ("S",)),
        ("aux", ("S",), ("U",)),
        ("input_map", ("U", "S"), ("X",)),
        ("channel", ("X", "S"), ("Y",)),
    ),
    "marton2": (
        ("aux", (), ("U1", "U2")),
        ("input_map", ("U1", "U2"), ("X",)),
        ("channel", ("X",), ("Y1", "Y2")),
    ),
    "marton3": (
        ("aux", (), ("U0", "U1", "U2")),
        ("input_map", ("U0", "U1", "U2"), ("X",)),
        ("channel", ("X",), ("Y1", "Y2")),
    ),
    "berger_tung": (
        ("source", (), ("S1", "S2")),
        ("test1", ("S1",), ("U1",)),
        ("test2", ("S2",), ("U2",)),
    ),
    "hb_kaspi": (("source", (), ("S", "Y")), ("aux", ("S",), ("W", "U"))),
    "multiple_description": (
        ("source", (), ("S",)),
        ("aux", ("S",), ("U0", "U1", "U2")),
    ),
    "jscc_mac": (
        ("source", (), ("S1", "S2")),
        ("timeshare", (), ("T",)),
        ("enc1", ("S1", "T"), ("X1",)),
        ("enc2", ("S2", "T"), ("X2",)),
        ("channel", ("X1", "X2"), ("Y",)),
    ),
}

# reconstruction kernels: block name, given variables, paired distortion index
_RECON = {
    "berger_tung": (("recon1", ("U1", "U2")), ("recon2", ("U1", "U2"))),
    "hb_kaspi": (("recon1", ("W",)), ("recon2", ("W", "U", "Y"))),
    "multiple_description": (
        ("recon0", ("U0", "U1", "U2")),
        ("recon1", ("U0", "U1")),
        ("recon2", ("U0", "U2")),
    ),
}

_DIST_SOURCES = {
    "berger_tung": ("S1", "S2"),
    "hb_kaspi": ("S", "S"),
    "multiple_description": ("S", "S", "S"),
}

_ROLE_DEFAULTS = {
    "X": "input", "X1": "input", "X2": "input",
    "Y": "output", "Y1": "output", "Y2": "output",
    "S": "source", "S1": "source", "S2": "source",
    "U": "auxiliary", "U0": "auxiliary", "U1": "auxiliary", "U2": "auxiliary",
    "W": "auxiliary", "T": "time-sharing",
}


@dataclass
class ScenarioConfig:
    scenario: str
    design: JointPMF
    sizes: Optional[CodeSizes]
    recon: list
    dist: list
    gammas: list
    mc: Optional[dict]
    rate_query: Optional[dict]
    variables: dict
    effective: dict  # normalized dict the digest is computed from
    digest: str = ""

    def __post_init__(self):
        blob = json.dumps(self.effective, sort_keys=True, separators=(",", ":"))
        self.digest = hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class ReportRow:
    scenario: str
    mode: str
    key: str
    value: float
    seed: Optional[int]
    config_digest: str


def _fail(code, where, msg):
    raise ConfigError(code, f"{where}: {msg}")


def _floats(where, raw):
    try:
        return [float(v) for v in raw]
    except (TypeError, ValueError) as exc:
        _fail("PARSE_ERROR", where, f"expected a list of numbers: {exc}")


def config_from_dict(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        _fail("PARSE_ERROR", "<root>", "config must be a JSON object")
    scenario = raw.get("scenario")
    if scenario not in _BLOCKS:
        _fail("VALIDATION_ERROR", "scenario", f"unknown scenario {scenario!r}")
    alphabets = {}
    for name, symbols in (raw.get("alphabets") or {}).items():
        try:
            alphabets[name] = Alphabet(name, tuple(str(s) for s in symbols))
        except OneshotError as exc:
            _fail("VALIDATION_ERROR", f"alphabets.{name}", exc.message)
    variables = {}
    for name, spec in (raw.get("variables") or {}).items():
        if not isinstance(spec, dict) or "alphabet" not in spec:
            _fail("VALIDATION_ERROR", f"variables.{name}", "needs an 'alphabet' field")
        if spec["alphabet"] not in alphabets:
            _fail(
                "VALIDATION_ERROR",
                f"variables.{name}",
                f"alphabet {spec['alphabet']!r} is not declared",
            )
        role = spec.get("role", _ROLE_DEFAULTS.get(name, "auxiliary"))
        try:
            variables[name] = Variable(name, alphabets[spec["alphabet"]], role)
        except OneshotError as exc:
            _fail("VALIDATION_ERROR", f"variables.{name}", exc.message)

    dists_raw = raw.get("distributions") or {}

    def need_var(where, name):
        if name not in variables:
            _fail("VALIDATION_ERROR", where, f"variable {name!r} is not declared")
        return variables[name]

    def block_probs(name):
        if name not in dists_raw:
            _fail("VALIDATION_ERROR", f"distributions.{name}", "required block is missing")
        block = dists_raw[name]
        if not isinstance(block, dict) or "probs" not in block:
            _fail("VALIDATION_ERROR", f"distributions.{name}", "needs a 'probs' list")
        return _floats(f"distributions.{name}", block["probs"])

    design = None
    for bname, given, produced in _BLOCKS[scenario]:
        where = f"distributions.{bname}"
        probs = block_probs(bname)
        gvars = tuple(need_var(where, n) for n in given)
        pvars = tuple(need_var(where, n) for n in produced)
        try:
            if design is None and not given:
                design = build_joint(pvars, probs)
            else:
                kern = ConditionalKernel(gvars, pvars, probs)
                design = compose(design, kern)
        except OneshotError as exc:
            _fail("VALIDATION_ERROR", where, exc.message)

    recon, dist = [], []
    if scenario in _RECON:
        d_raw = raw.get("distortions")
        want = len(_RECON[scenario])
        if not isinstance(d_raw, list) or len(d_raw) != want:
            _fail("VALIDATION_ERROR", "distortions", f"{scenario} needs {want} entries")
        for k, (bname, given) in enumerate(_RECON[scenario]):
            where = f"distributions.{bname}"
            if bname not in dists_raw:
                _fail("VALIDATION_ERROR", where, "required reconstruction block is missing")
            block = dists_raw[bname]
            out_name = block.get("produced")
            if isinstance(out_name, list):
                out_name = out_name[0] if out_name else None
            if not out_name:
                _fail("VALIDATION_ERROR", where, "reconstruction needs a 'produced' variable")
            gvars = tuple(need_var(where, n) for n in given)
            pvar = need_var(where, str(out_name))
            try:
                kern = ConditionalKernel(gvars, (pvar,), _floats(where, block["probs"]))
            except (OneshotError, KeyError) as exc:
                _fail("VALIDATION_ERROR", where, getattr(exc, "message", str(exc)))
            recon.append(kern)
            dwhere = f"distortions[{k}]"
            entry = d_raw[k]
            if not isinstance(entry, dict):
                _fail("VALIDATION_ERROR", dwhere, "must be an object")
            src_name = entry.get("source")
            if src_name != _DIST_SOURCES[scenario][k]:
                _fail(
                    "VALIDATION_ERROR",
                    dwhere,
                    f"source must be {_DIST_SOURCES[scenario][k]!r}",
                )
            if entry.get("recon") != pvar.name:
                _fail(
                    "VALIDATION_ERROR",
                    dwhere,
                    f"recon must name the produced variable {pvar.name!r}",
                )
            src = need_var(dwhere, src_name)
            measure = _floats(dwhere, entry.get("measure", []))
            if len(measure) != src.alphabet.size * pvar.alphabet.size:
                _fail(
                    "VALIDATION_ERROR",
                    dwhere,
                    f"measure needs {src.alphabet.size * pvar.alphabet.size} entries",
                )
            try:
                dist.append(
                    DistortionSpec(
                        source=src.name,
                        recon=pvar.name,
                        measure=np.asarray(measure).reshape(
                            src.alphabet.size, pvar.alphabet.size
                        ),
                        level=float(entry.get("level", 0.0)),
                    )
                )
            except OneshotError as exc:
                _fail("VALIDATION_ERROR", dwhere, exc.message)

    sizes = None
    if raw.get("sizes"):
        try:
            sizes = CodeSizes.from_mapping(raw["sizes"])
        except OneshotError as exc:
            _fail("VALIDATION_ERROR", "sizes", exc.message)
    try:
        _bounds.validate_design(design, scenario, sizes, factorization=True)
    except OneshotError as exc:
        _fail("VALIDATION_ERROR", "distributions", exc.message)

    rate_query = raw.get("rate_query")
    if rate_query is not None:
        if "n" not in rate_query or "epsilon" not in rate_query:
            _fail("VALIDATION_ERROR", "rate_query", "needs 'n' and 'epsilon'")
    gammas = raw.get("gammas")
    if gammas is None:
        gammas = [float(g) for g in range(1, 21)]
        if rate_query is not None:
            gammas.append(0.5 * math.log2(float(rate_query["n"])))
    else:
        gammas = _floats("gammas", gammas)
    mc = raw.get("mc")
    if mc is not None and ("trials" not in mc or "seed" not in mc):
        _fail("VALIDATION_ERROR", "mc", "needs 'trials' and 'seed'")

    effective = json.loads(json.dumps(raw))  # normalized deep copy
    effective["gammas"] = gammas
    return ScenarioConfig(
        scenario=scenario,
        design=design,
        sizes=sizes,
        recon=recon,
        dist=dist,
        gammas=gammas,
        mc=mc,
        rate_query=rate_query,
        variables=variables,
        effective=effective,
    )


def parse_scenario(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError("PARSE_ERROR", f"{path}: cannot read ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            "PARSE_ERROR", f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return config_from_dict(raw)


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


def _run_bound(cfg: ScenarioConfig):
    sc = cfg.scenario
    if sc == "p2p":
        return _bounds.p2p_bound(cfg.design, cfg.sizes, cfg.gammas)
    if sc == "gelfand_pinsker":
        return _bounds.gp_bound(cfg.design, cfg.sizes, cfg.gammas)
    if sc == "marton2":
        return _bounds.marton2_bound(cfg.design, cfg.sizes, cfg.gammas)
    if sc == "marton3":
        return _bounds.marton3_bound(cfg.design, cfg.sizes, cfg.gammas)
    if sc == "berger_tung":
        return _bounds.berger_tung_bound(cfg.design, cfg.recon, cfg.dist, cfg.sizes, cfg.gammas)
    if sc == "hb_kaspi":
        return _bounds.hb_kaspi_bound(cfg.design, cfg.recon, cfg.dist, cfg.sizes, cfg.gammas)
    if sc == "multiple_description":
        return _bounds.md_bound(cfg.design, cfg.recon, cfg.dist, cfg.sizes, cfg.gammas)
    return _bounds.jscc_mac_bound(cfg.design, cfg.gammas)


def _lift_p2p_to_gp(q: JointPMF) -> JointPMF:
    """Embed a plain channel as a state-dependent one with a constant state
    and the auxiliary equal to the input, so the rate search applies as-is."""
    x, y = q.variable("X"), q.variable("Y")
    u = Variable("U", Alphabet("UX", x.alphabet.symbols), "auxiliary")
    s = Variable("S", Alphabet("S1pt", ("*",)), "state")
    nx, ny = x.alphabet.size, y.alphabet.size
    arr = np.zeros((nx, 1, nx, ny))
    for i in range(nx):
        arr[i, 0, i, :] = q.mass[i, :]
    return JointPMF((u, s, x, y), arr, _validated=True)


def run_scenario(cfg: ScenarioConfig, mode: str) -> list:
    """Execute one mode and return report rows (deterministic given config)."""
    rows: list = []
    seed = None

    def add(key, value):
        rows.append(ReportRow(cfg.scenario, mode, key, float(value), seed, cfg.digest))

    if mode == "bound":
        res = _run_bound(cfg)
        add("correct_lb", res.correct_lb)
        for name in sorted(res.terms):
            add(f"term:{name}", res.terms[name])
        for g in cfg.gammas if res.error_ub_by_gamma else ():
            add(f"error_ub@gamma={g:g}", res.error_ub_by_gamma[float(g)])
        return rows

    if mode == "simulate":
        if cfg.mc is None:
            raise ConfigError("MODE_UNSUPPORTED", "simulate needs an 'mc' block")
        seed = int(cfg.mc["seed"])
        res = _run_bound(cfg)
        rep = _codecsim.simulate(
            cfg.scenario,
            cfg.design,
            cfg.sizes,
            recon=cfg.recon or None,
            dist=cfg.dist or None,
            trials=int(cfg.mc["trials"]),
            seed=seed,
            fresh_codebook=bool(cfg.mc.get("fresh_codebook", True)),
            bound=res,
        )
        add("estimate", rep.estimate)
        add("stderr", rep.stderr)
        add("trials", rep.trials)
        add("successes", rep.successes)
        add("correct_lb", res.correct_lb)
        add("dominance", 1.0 if rep.dominance_ok else 0.0)
        return rows

    if mode in ("rate", "region"):
        if cfg.rate_query is None:
            raise ConfigError("MODE_UNSUPPORTED", f"{mode} needs a 'rate_query' block")
        query = _secondorder.RateQuery(
            n=int(cfg.rate_query["n"]), epsilon=float(cfg.rate_query["epsilon"])
        )
        correction = float(cfg.rate_query.get("correction", 1.0))
        if cfg.scenario in ("p2p", "gelfand_pinsker") and mode == "rate":
            q = cfg.design if cfg.scenario == "gelfand_pinsker" else _lift_p2p_to_gp(cfg.design)
            res = _secondorder.gp_rate(q, query, correction=correction)
            add("rate_bits", res.rate)
            add("witness_rtilde", res.witness)
            add("first_order_bits", res.first_order)
            add("backoff", res.backoff)
            return rows
        if cfg.scenario == "marton2":
            point = cfg.rate_query.get("point")
            if not point or len(point) != 2:
                raise ConfigError(
                    "MODE_UNSUPPORTED", f"{mode} on marton2 needs rate_query.point = [R1, R2]"
                )
            witness = _secondorder.bc_region_witness(
                cfg.design,
                query,
                (float(point[0]), float(point[1])),
                grid_step=float(cfg.rate_query.get("grid", 1e-3)),
                correction=correction,
                rtilde_cap=cfg.rate_query.get("rtilde_cap"),
            )
            add("membership", 0.0 if witness is None else 1.0)
            add("witness_rtilde1", math.nan if witness is None else witness[0])
            add("witness_rtilde2", math.nan if witness is None else witness[1])
            return rows
        raise ConfigError(
            "MODE_UNSUPPORTED",
            f"{mode} supports p2p/gelfand_pinsker (rate) and marton2 (region), not {cfg.scenario}",
        )

    raise ConfigError("MODE_UNSUPPORTED", f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def _fmt_value(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def emit(rows, fmt: str, path: Optional[str]) -> None:
    """Write rows as CSV (fixed column order) or JSON lines; bit-stable."""
    if fmt == "csv":
        lines = ["scenario,mode,key,value,seed,config_digest"]
        for r in rows:
            seed = "" if r.seed is None else str(r.seed)
            lines.append(
                f"{r.scenario},{r.mode},{r.key},{_fmt_value(r.value)},{seed},{r.config_digest}"
            )
        text = "\n".join(lines) + "\n"
    elif fmt == "jsonl":
        out = []
        for r in rows:
            v = r.value
            payload = {
                "scenario": r.scenario,
                "mode": r.mode,
                "key": r.key,
                "value": _fmt_value(v) if (math.isnan(v) or math.isinf(v)) else v,
                "seed": r.seed,
                "config_digest": r.config_digest,
            }
            out.append(json.dumps(payload, sort_keys=True))
        text = "\n".join(out) + ("\n" if out else "")
    else:
        raise ConfigError("VALIDATION_ERROR", f"unknown format {fmt!r}")
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError("IO_ERROR", f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="oneshotit",
        description="One-shot achievability bounds, codec simulation, and "
        "finite-blocklength rates for finite-alphabet coding scenarios.",
    )
    sub = ap.add_subparsers(dest="mode", required=True)
    for mode in ("bound", "simulate", "rate", "region"):
        p = sub.add_parser(mode)
        p.add_argument("--config", required=True, help="scenario config (JSON)")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--format", default="csv", choices=("csv", "jsonl"))
        p.add_argument("--trials", type=int, default=None, help="override mc.trials")
        p.add_argument("--seed", type=int, default=None, help="override mc.seed")
        p.add_argument("--gamma", default=None, help="comma list, overrides gammas")
    return ap


def max_workers() -> int:
    """Worker-count cap from ONESHOT_THREADS; results never depend on it."""
    try:
        return max(1, int(os.environ.get("ONESHOT_THREADS", "1")))
    except ValueError:
        return 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    max_workers()
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        print(f"PARSE_ERROR: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(
            f"PARSE_ERROR: {args.config}: line {exc.lineno} column {exc.colno}: {exc.msg}",
            file=sys.stderr,
        )
        return 2
    if isinstance(raw, dict):
        if args.trials is not None:
            raw.setdefault("mc", {})["trials"] = args.trials
        if args.seed is not None:
            raw.setdefault("mc", {})["seed"] = args.seed
        if args.gamma is not None:
            try:
                raw["gammas"] = [float(g) for g in args.gamma.split(",") if g.strip()]
            except ValueError:
                print(f"PARSE_ERROR: bad --gamma list {args.gamma!r}", file=sys.stderr)
                return 2
    try:
        cfg = config_from_dict(raw)
        rows = run_scenario(cfg, args.mode)
        emit(rows, args.format, args.out)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 3 if exc.code == "IO_ERROR" else 2
    except OneshotError as exc:
        validation = exc.code in (
            "NEGATIVE_MASS", "NOT_NORMALIZED", "SHAPE_MISMATCH", "UNKNOWN_VARIABLE",
            "VARIABLE_COLLISION", "WRONG_ARITY", "SIZE_LIMIT", "SCENARIO_SHAPE",
            "FACTORIZATION_VIOLATION", "SIZE_CONSTRAINT", "DIVISIBILITY",
        )
        print(str(exc), file=sys.stderr)
        return 2 if validation else 3
    except Exception as exc:  # numeric failures inside numpy/scipy
        print(f"RUNTIME_ERROR: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
