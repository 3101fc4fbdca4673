"""Command-line front end: verify / partition / gibbs / tannaka / spectrum.

Exit codes: 0 all checks pass, 1 some check failed, 2 usage or config error.
Every float is written with repr(), so reports round-trip exactly, and
identical inputs give byte-identical output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import jsonschema

from . import bcdata, exactalg, qsmrep, tannaka, thermo
from .bcdata import Datum
from .errors import BCError, ConfigError, DivergentParameter, NotAdmissible
from .ghom import ghom_from_spec

DATUM_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"type": "string"},
        "q": {"type": "integer", "minimum": 2},
        "galois_level": {"type": "integer", "minimum": 1},
        "generators": {"type": "array", "items": {"type": ["string", "number"]}},
    },
    "additionalProperties": False,
}

# a config file is either a bare datum or this wrapper around one
CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "run config",
    "type": "object",
    "required": ["datum"],
    "properties": {
        "datum": DATUM_SCHEMA,
        "trunc": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1, "maxItems": 3},
        "beta": {"type": "array", "items": {"type": "number"}},
        "g": {"oneOf": [{"type": "string"}, {"type": "object", "additionalProperties": {"type": "number"}}]},
        "gamma": {"type": "array", "items": {"type": "string"}},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer"},
        "nmax": {"type": "integer", "minimum": 2},
        "samples": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "report",
    "type": "object",
    "required": ["command", "datum", "ok"],
    "properties": {
        "command": {"enum": ["verify", "partition", "gibbs", "tannaka", "spectrum"]},
        "datum": DATUM_SCHEMA,
        "ok": {"type": "boolean"},
        "seed": {"type": "integer"},
        "suites": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["suite", "ok", "checks", "failures"],
                "properties": {
                    "suite": {"type": "string"},
                    "ok": {"type": "boolean"},
                    "checks": {"type": "integer", "minimum": 0},
                    "failures": {"type": "integer", "minimum": 0},
                    "witnesses": {"type": "array"},
                    "details": {"type": "array"},
                },
            },
        },
        "columns": {"type": "array", "items": {"type": "string"}},
        "rows": {"type": "array", "items": {"type": "array", "items": {"type": "string"}}},
    },
}


@dataclass
class RunConfig:
    datum: Datum
    command: str
    trunc: tuple = ()
    beta: tuple = (2.0,)
    g: object = "builtin:n"
    gamma: tuple = ()
    tol: float = 1e-12
    seed: int = 0
    nmax: int = 64
    samples: int = 8
    fmt: str = "json"
    out: str | None = None
    extras: dict = field(default_factory=dict)

    @property
    def rng(self) -> random.Random:
        return random.Random(self.seed)


# ---------------------------------------------------------------- config


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def _validate(obj, schema, what: str) -> None:
    v = jsonschema.Draft202012Validator(schema)
    errs = sorted(v.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errs:
        e = errs[0]
        path = "$" + "".join(f"[{p!r}]" for p in e.absolute_path)
        raise ConfigError(f"{what} fails schema at {path}: {e.message}")


def _parse_list(text: str, conv) -> tuple:
    try:
        return tuple(conv(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse {text!r}: {exc}") from exc


def build_config(args) -> RunConfig:
    raw = _load_json(args.datum)
    if isinstance(raw, dict) and "datum" in raw:
        _validate(raw, CONFIG_SCHEMA, args.datum)
        file_cfg = raw
    else:
        _validate(raw, DATUM_SCHEMA, args.datum)
        file_cfg = {"datum": raw}
    datum = bcdata.datum_from_json(file_cfg["datum"])
    cfg = RunConfig(datum, args.command)
    for key in ("trunc", "beta", "gamma"):
        if key in file_cfg:
            setattr(cfg, key, tuple(file_cfg[key]))
    for key in ("g", "tol", "seed", "nmax", "samples"):
        if key in file_cfg:
            setattr(cfg, key, file_cfg[key])
    if args.trunc:
        cfg.trunc = _parse_list(args.trunc, int)
    if args.beta:
        cfg.beta = _parse_list(args.beta, float)
    if args.g:
        cfg.g = args.g
    if args.gamma:
        cfg.gamma = _parse_list(args.gamma, str)
    if args.tol is not None:
        cfg.tol = args.tol
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "nmax", None) is not None:
        cfg.nmax = args.nmax
    if getattr(args, "samples", None) is not None:
        cfg.samples = args.samples
    cfg.fmt, cfg.out = args.format, args.out
    cfg.beta = tuple(sorted(float(b) for b in cfg.beta))
    if len(cfg.trunc) > 3 or any(x < 0 for x in cfg.trunc) or (cfg.trunc and cfg.trunc[0] < 1):
        raise ConfigError("--trunc takes n_max[,depth[,R]] with n_max >= 1")
    return cfg


def _trunc(cfg: RunConfig, default: tuple) -> qsmrep.TruncSpec:
    t = cfg.trunc or default
    n_max = t[0]
    depth = t[1] if len(t) > 1 else (default[1] if len(default) > 1 else 0)
    R = t[2] if len(t) > 2 else None
    d = cfg.datum
    if not d.rank:
        return qsmrep.TruncSpec(n_max)
    if d.kind == "alg_num_model" and R is None:
        R = min(2, len(d.generators))
    return qsmrep.TruncSpec.for_datum(d, n_max, depth, R)


def _gamma(cfg: RunConfig, text: str) -> bcdata.GaloisElem:
    """'u' or 'u:-1' at the datum's Galois level."""
    try:
        parts = text.split(":")
        unit = int(parts[0])
        sign = int(parts[1]) if len(parts) > 1 else 1
        return bcdata.GaloisElem(cfg.datum.galois_level, unit, sign)
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"bad gamma {text!r}: {exc}") from exc


def _num(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------- verify


def _suite(name, checks, failures, witnesses=(), details=()) -> dict:
    return {"suite": name, "ok": failures == 0, "checks": int(checks), "failures": int(failures),
            "witnesses": list(witnesses)[:10], "details": list(details)}


def cmd_verify(cfg: RunConfig) -> dict:
    d = cfg.datum
    rng = cfg.rng
    suites = []
    dr = bcdata.check_datum(d, min(cfg.nmax, 12))
    suites.append(_suite("datum_laws", dr.checks, len(dr.failures), dr.failures, dr.notes))

    checks = fails = 0
    wit = []
    for _ in range(cfg.samples):
        n = rng.randint(1, 12)
        a = exactalg.random_algebra_elem(d, rng, n=n)
        a = exactalg.AlgebraElem([(s, c) for s, c in a if bcdata.in_image(d, n, s)])
        checks += 1
        if not exactalg.check_sigma_rho(d, n, a):
            fails += 1
            wit.append({"n": n, "element": a.to_json()})
    suites.append(_suite("sigma_rho", checks, fails, wit))

    if d.concrete:
        # relation instances reach fibers of denominator up to 720
        iota = bcdata.Embedding(math.lcm(d.galois_level, 720))
        checks = fails = 0
        wit = []
        elems = [s for s in bcdata.grid_elements(d, 12)][:: max(1, len(bcdata.grid_elements(d, 12)) // 24)]
        for s in elems:
            for n in range(1, 7):
                if not bcdata.in_image(d, n, s):
                    continue
                for m in range(1, 7):
                    checks += 1
                    if not exactalg.zero_sum_identity(d, iota, n, m, s):
                        fails += 1
                        wit.append({"n": n, "m": m, "s": str(s)})
        suites.append(_suite("zero_sum", checks, fails, wit))

        tr = _trunc(cfg, (cfg.nmax, 24))
        samples = qsmrep.relation_samples(d, random.Random(cfg.seed), R=tr.R)
        reps = qsmrep.check_relations(d, iota, trunc=tr, samples=samples)
        suites.append(_suite("relations", sum(r.interior_count for r in reps),
                             sum(len(r.witnesses) for r in reps),
                             [w for r in reps for w in r.witnesses],
                             [r.to_json() for r in reps]))
        rep = qsmrep.Representation(d, iota, tr)
        pool = qsmrep.generator_pool(rep, samples)
        words = pool + [pool[rng.randrange(len(pool))] * pool[rng.randrange(len(pool))] for _ in range(50)]
        worst, checks, wit = 0.0, 0, []
        for t in (0.0, 1.0, math.pi):
            for w in words:
                dev = qsmrep.check_covariance(rep, t, w)
                checks += 1
                if dev > 1e-9:
                    wit.append({"t": _num(t), "word": str(w), "deviation": _num(dev)})
                worst = max(worst, dev)
        suites.append(_suite("covariance", checks, len(wit), wit, [{"max_deviation": _num(worst)}]))
        prs = qsmrep.check_projections(d, tr, 2, iota)
        suites.append(_suite("projections", sum(p.interior_count for p in prs), sum(not p.ok for p in prs),
                             [w for p in prs for w in p.witnesses], [p.to_json() for p in prs]))

    checks = fails = 0
    wit = []
    for n in range(1, 9):
        for _ in range(3):
            grades = bcdata.sample_elements(d, 3, rng)
            grades = [s for s in grades if bcdata.in_image(d, n, s)] or [bcdata.identity(d)]
            V = tannaka.GradedSpace(d, {s: rng.randint(1, 3) for s in grades})
            checks += 1
            if not tannaka.check_sigma_rho_cat(d, n, V):
                fails += 1
                wit.append({"n": n, "space": str(V)})
    suites.append(_suite("sigma_rho_cat", checks, fails, wit))
    return {"command": "verify", "datum": bcdata.datum_to_json(d), "seed": cfg.seed,
            "ok": all(s["ok"] for s in suites), "suites": suites}


# ---------------------------------------------------------------- tables


PARTITION_COLUMNS = ["case", "s", "beta", "form", "closed_value", "trace_value", "deviation", "tail_bound", "status"]


def cmd_partition(cfg: RunConfig) -> dict:
    d = cfg.datum
    g = ghom_from_spec(cfg.g)
    case = thermo.case_of(d)
    tr = _trunc(cfg, (100000, 0) if not d.rank else (200, 40))
    R = tr.R if case == "infinite" else None
    forms = ["geometric", "polylog"] if case == "weil" and g.is_identity else ["geometric"]
    rows = []
    for beta in cfg.beta:
        for form in forms:
            try:
                closed = thermo.partition_closed(d, beta, g, cfg.tol, form=form, R=R)
            except DivergentParameter as exc:
                rows.append([case, "", _num(beta), form, "", "", "", "", f"divergent: {exc}"])
                continue
            trace = thermo.partition_trace(d, tr, beta, g, closed=closed)
            dev = closed.value - trace.value
            ok = -closed.tail_bound <= dev
            rows.append([case, "", _num(beta), form, _num(closed.value), _num(trace.value), _num(dev),
                         _num(closed.tail_bound), "ok" if ok else "FAIL"])
    return {"command": "partition", "datum": bcdata.datum_to_json(d), "seed": cfg.seed,
            "ok": all(r[-1] != "FAIL" for r in rows), "columns": PARTITION_COLUMNS, "rows": rows}


GIBBS_COLUMNS = ["case", "s", "beta", "gamma", "closed_re", "closed_im", "trace_re", "trace_im",
                 "deviation", "tail_bound", "ground_re", "ground_im", "status"]


def _gibbs_elements(cfg: RunConfig) -> list:
    d = cfg.datum
    out = [bcdata.identity(d)]
    if d.kind == "weil":
        out.append(bcdata.WeilCycElem(bcdata.QmodZ(Fraction(1, 3)), 1, d.q))
    out += bcdata.sample_elements(d, cfg.samples, cfg.rng, level=math.gcd(d.galois_level, 12), max_weight=1)
    return list(dict.fromkeys(out))


def cmd_gibbs(cfg: RunConfig) -> dict:
    d = cfg.datum
    case = thermo.case_of(d)
    iota = bcdata.standard_embedding(d)
    tr = _trunc(cfg, (100000, 0) if not d.rank else (400, 40))
    rep = qsmrep.Representation(d, iota, tr)
    R = tr.R if case == "infinite" else None
    gammas = [_gamma(cfg, t) for t in cfg.gamma]
    rows = []
    for beta in cfg.beta:
        try:
            Z = thermo.partition_closed(d, beta, tol=cfg.tol, R=R)
        except DivergentParameter as exc:
            rows.append([case, "", _num(beta), "id"] + [""] * 8 + [f"divergent: {exc}"])
            continue
        Zt = thermo.partition_trace(d, tr, beta, closed=Z)
        # diagonal entries have modulus <= 1, so the truncation moves the state by at most this
        bound = 2 * Zt.tail_bound / Zt.value
        for s in _gibbs_elements(cfg):
            label = json.dumps(bcdata.elem_to_json(s), sort_keys=True)
            v = thermo.gibbs_closed(d, s, beta, iota, cfg.tol, R=R)
            try:
                t = qsmrep.gibbs_trace(rep, qsmrep.word(qsmrep.S(s)), beta)
            except BCError:
                t = complex("nan")
            gs = thermo.ground_state(d, s, iota)
            dev = abs(v - t)
            rows.append([case, label, _num(beta), "id", _num(v.real), _num(v.imag), _num(t.real), _num(t.imag),
                         _num(dev), _num(bound), _num(gs.real), _num(gs.imag),
                         "ok" if dev <= bound + 1e-9 else "FAIL"])
            for gam in gammas:
                try:
                    iota_g = bcdata.compose_embedding(d, iota, gam)
                except NotAdmissible as exc:
                    rows.append([case, label, _num(beta), f"{gam.unit}:{gam.sqrtq_sign}"] + [""] * 8 + [f"not admissible: {exc}"])
                    continue
                lhs = thermo.gibbs_closed(d, bcdata.galois_apply(d, gam, s), beta, iota, cfg.tol, R=R)
                rhs = thermo.gibbs_closed(d, s, beta, iota_g, cfg.tol, R=R)
                gsg = thermo.ground_state(d, s, iota_g)
                dev = abs(lhs - rhs)
                rows.append([case, label, _num(beta), f"{gam.unit}:{gam.sqrtq_sign}", _num(rhs.real), _num(rhs.imag),
                             _num(lhs.real), _num(lhs.imag), _num(dev), _num(1e-10),
                             _num(gsg.real), _num(gsg.imag), "ok" if dev <= 1e-10 else "FAIL"])
    return {"command": "gibbs", "datum": bcdata.datum_to_json(d), "seed": cfg.seed,
            "ok": all(r[-1] != "FAIL" for r in rows), "columns": GIBBS_COLUMNS, "rows": rows}


TANNAKA_COLUMNS = ["check", "n", "input", "result", "status"]


def cmd_tannaka(cfg: RunConfig) -> dict:
    d = cfg.datum
    rng = cfg.rng
    rows = []
    for n in range(1, 9):
        grades = [s for s in bcdata.sample_elements(d, 3, rng) if bcdata.in_image(d, n, s)] or [bcdata.identity(d)]
        V = tannaka.GradedSpace(d, {s: rng.randint(1, 3) for s in grades})
        ok = tannaka.check_sigma_rho_cat(d, n, V)
        rows.append(["sigma_rho_cat", str(n), str(V), f"factor {bcdata.alpha_of(d, n)}", "ok" if ok else "FAIL"])
    if d.kind in ("qmodz", "weil_zero"):
        for den in range(1, 13):
            for a in range(den):
                s = bcdata.QmodZ(Fraction(a, den))
                for n in range(1, 7):
                    ok = tannaka.check_verschiebung_diag(d, s, n)
                    if not ok or (a == 1 and n <= 3):
                        rows.append(["verschiebung_diag", str(n), str(s), f"lambda^{n} - iota({s})",
                                     "ok" if ok else "FAIL"])
    for _ in range(cfg.samples):
        n = rng.randint(1, 6)
        V = {rng.randint(-10, 10): rng.randint(1, 3) for _ in range(rng.randint(1, 4))}
        Vp = {rng.randint(-10, 10): rng.randint(1, 3) for _ in range(rng.randint(1, 4))}
        try:
            a, b = tannaka.orbit_hom_dim(V, Vp, n)
            status = "ok"
        except BCError:
            a = b = -1
            status = "FAIL"
        rows.append(["orbit_hom_dim", str(n), json.dumps([sorted(V.items()), sorted(Vp.items())]), f"{a}={b}", status])
    return {"command": "tannaka", "datum": bcdata.datum_to_json(d), "seed": cfg.seed,
            "ok": all(r[-1] == "ok" for r in rows), "columns": TANNAKA_COLUMNS, "rows": rows}


SPECTRUM_COLUMNS = ["n", "k", "alpha", "energy", "boltzmann_weight"]


def cmd_spectrum(cfg: RunConfig) -> dict:
    d = cfg.datum
    g = ghom_from_spec(cfg.g)
    tr = _trunc(cfg, (32, 4))
    rep = qsmrep.Representation(d, trunc=tr, g=g)
    E = rep.energies()
    beta = cfg.beta[0]
    order = sorted(range(rep.B), key=lambda j: (E[j], j))
    rows = []
    for j in order[: cfg.extras.get("limit", 200)]:
        b = rep.basis_idx(j)
        rows.append([str(b.n), json.dumps(list(b.k)), str(bcdata.alpha_of(d, b.n)), _num(E[j]),
                     _num(math.exp(-beta * E[j]))])
    return {"command": "spectrum", "datum": bcdata.datum_to_json(d), "seed": cfg.seed, "ok": True,
            "columns": SPECTRUM_COLUMNS, "rows": rows}


COMMANDS = {"verify": cmd_verify, "partition": cmd_partition, "gibbs": cmd_gibbs,
            "tannaka": cmd_tannaka, "spectrum": cmd_spectrum}


# ---------------------------------------------------------------- output


def render(report: dict, fmt: str) -> str:
    _validate(report, REPORT_SCHEMA, "report")
    if fmt == "json" or "rows" not in report:
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report["columns"])
    w.writerows(report["rows"])
    return buf.getvalue()


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bostconnes", description="Bost-Connes data, operators and states.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--datum", required=True, help="datum or run-config JSON file")
        sp.add_argument("--trunc", help="n_max[,depth[,R]]")
        sp.add_argument("--beta", help="comma-separated inverse temperatures")
        sp.add_argument("--g", help="builtin:n or a JSON file {prime: lambda}")
        sp.add_argument("--gamma", help="comma-separated Galois elements u or u:sign")
        sp.add_argument("--format", choices=("csv", "json"), default="json" if name == "verify" else "csv")
        sp.add_argument("--tol", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--nmax", type=int)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--out", help="write here instead of stdout")
        if name == "spectrum":
            sp.add_argument("--limit", type=int, default=200)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = build_config(args)
        if args.command == "spectrum":
            cfg.extras["limit"] = args.limit
        report = COMMANDS[args.command](cfg)
        text = render(report, cfg.fmt)
    except (ConfigError, DivergentParameter, NotAdmissible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BCError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
