"""Config-driven experiment runner.

Usage::

    statverify --config experiment.yaml [--seed N] [--trials N]
               [--output PATH] [--format csv|json]

Exit status is 0 when every claim passes, 2 when some claim fails and 1 on
configuration or runtime errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import yaml

from . import catalog
from .hypotheses import (
    And, Band, ClosedComplement, FSigma, Or, Partition, SubBasic, closed_band, is_open_form,
)
from .measures import (
    COIN, REAL_LINE, SampleSpace, bernoulli, finite_world, parse_interval, real_world,
    to_fraction, uniform, weak_convergence_check,
)
from .montecarlo import GroundTruthMismatch, TrialPlan, certify, run_trials
from .propositional import EXAMPLES, Stream, simulate_inquiry, stabilised
from .verifiers import build_verifier, limiting_verifier, solver

log = logging.getLogger("statverify")

EXPERIMENTS = ("verify", "limit", "solve", "prop", "weak-convergence")
CSV_HEADER = ["n", "accept_rate", "ci_low", "ci_high", "cum_error"]

TOP_KEYS = {
    "experiment", "worlds", "hypothesis", "partition", "construction", "alpha", "n_max",
    "trials", "seed", "claims", "output", "example", "stages", "limit", "sequence",
    "events", "tol", "workers",
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# loading with line numbers
# ---------------------------------------------------------------------------

class _Doc:
    """Plain YAML data plus the source line of every mapping key / item."""

    def __init__(self, text: str):
        try:
            root = yaml.compose(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config is not valid YAML: {exc}") from None
        self.lines: dict[tuple, int] = {}
        self.data = self._build(root, ()) if root is not None else {}

    def _build(self, node, path):
        self.lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            out = {}
            for knode, vnode in node.value:
                key = knode.value
                self.lines[path + (key,)] = knode.start_mark.line + 1
                out[key] = self._build(vnode, path + (key,))
            return out
        if isinstance(node, yaml.SequenceNode):
            return [self._build(v, path + (i,)) for i, v in enumerate(node.value)]
        return yaml.safe_load(yaml.serialize(node))

    def error(self, path: tuple, msg: str) -> ConfigError:
        line = None
        p = tuple(path)
        while p and line is None:
            line = self.lines.get(p)
            p = p[:-1]
        key = ".".join(str(x) for x in path) or "<root>"
        where = f" (line {line})" if line else ""
        return ConfigError(f"{key}{where}: {msg}")


class _Parser:
    def __init__(self, doc: _Doc):
        self.doc = doc
        self.space: Optional[SampleSpace] = None

    def fail(self, path, msg):
        raise self.doc.error(path, msg)

    def keys(self, obj, path, allowed, required=()):
        if not isinstance(obj, dict):
            self.fail(path, "expected a mapping")
        for k in obj:
            if k not in allowed:
                self.fail(tuple(path) + (k,), f"unknown key {k!r}")
        for k in required:
            if k not in obj:
                self.fail(path, f"missing key {k!r}")

    def single(self, obj, path, kinds):
        if not isinstance(obj, dict) or len(obj) != 1:
            self.fail(path, f"expected a one-key mapping with one of {sorted(kinds)}")
        (kind, body), = obj.items()
        if kind not in kinds:
            self.fail(tuple(path) + (kind,), f"unknown key {kind!r}")
        return kind, body

    def rational(self, value, path) -> Fraction:
        try:
            return to_fraction(value)
        except (TypeError, ValueError, ZeroDivisionError):
            self.fail(path, f"expected a rational number, got {value!r}")

    def integer(self, value, path, minimum=1) -> int:
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            self.fail(path, f"expected an integer >= {minimum}, got {value!r}")
        return value

    # worlds

    def world(self, obj, path):
        label = ""
        if isinstance(obj, dict) and "label" in obj and len(obj) == 2:
            obj = dict(obj)
            label = str(obj.pop("label"))
        if isinstance(obj, str):
            obj = {"named": obj}
        kind, body = self.single(obj, path, {"bernoulli", "finite", "uniform", "real", "named"})
        p = tuple(path) + (kind,)
        try:
            if kind == "bernoulli":
                return bernoulli(self.rational(body, p), label)
            if kind == "named":
                if body not in catalog.WORLDS:
                    self.fail(p, f"unknown named world {body!r}")
                return catalog.WORLDS[body]()
            if kind == "uniform":
                lo, hi = body
                return uniform(self.rational(lo, p), self.rational(hi, p), label)
            if kind == "finite":
                self.keys(body, p, {"symbols", "probs"}, ("symbols", "probs"))
                space = SampleSpace.finite(body["symbols"])
                return finite_world(space, [self.rational(x, p + ("probs",)) for x in body["probs"]],
                                    label)
            self.keys(body, p, {"density", "atoms"})
            pieces = []
            for i, piece in enumerate(body.get("density", [])):
                pp = p + ("density", i)
                self.keys(piece, pp, {"interval", "coeffs"}, ("interval", "coeffs"))
                lo, hi = piece["interval"]
                pieces.append((self.rational(lo, pp), self.rational(hi, pp),
                               [self.rational(c, pp) for c in piece["coeffs"]]))
            atoms = [(self.rational(x, p), self.rational(m, p)) for x, m in body.get("atoms", [])]
            return real_world(pieces, atoms, label)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            self.fail(p, str(exc))

    def worlds(self, obj, path):
        if not isinstance(obj, list) or not obj:
            self.fail(path, "expected a nonempty list of worlds")
        ws = [self.world(w, tuple(path) + (i,)) for i, w in enumerate(obj)]
        spaces = {w.space for w in ws}
        if len(spaces) != 1:
            self.fail(path, "all worlds must share one sample space")
        self.space = ws[0].space
        return ws

    # events and hypotheses

    def event(self, obj, path):
        space = self.space or COIN
        if not isinstance(obj, list):
            self.fail(path, "an event is a list of symbols or interval literals")
        try:
            if space.is_finite:
                return space.event(obj)
            return space.event([parse_interval(str(s)) for s in obj])
        except ValueError as exc:
            self.fail(path, str(exc))

    def hypothesis(self, obj, path):
        if isinstance(obj, str):
            obj = {"named": obj}
        kinds = {"subbasic", "band", "and", "or", "closed", "fsigma", "closed-band",
                 "band-union", "named"}
        kind, body = self.single(obj, path, kinds)
        p = tuple(path) + (kind,)
        if kind == "named":
            if body not in catalog.HYPOTHESES:
                self.fail(p, f"unknown named hypothesis {body!r}")
            return catalog.HYPOTHESES[body]()
        if kind == "subbasic":
            self.keys(body, p, {"event", "b"}, ("event", "b"))
            return SubBasic(self.event(body["event"], p + ("event",)), self.rational(body["b"], p + ("b",)))
        if kind in ("band", "closed-band", "band-union"):
            lo_key, hi_key = ("a", "b") if kind == "band" else ("lo", "hi")
            self.keys(body, p, {"event", lo_key, hi_key}, ("event", lo_key, hi_key))
            ev = self.event(body["event"], p + ("event",))
            lo = self.rational(body[lo_key], p + (lo_key,))
            hi = self.rational(body[hi_key], p + (hi_key,))
            if not lo < hi:
                self.fail(p, "band needs lower < upper")
            if kind == "band":
                return Band(ev, lo, hi)
            if kind == "closed-band":
                return closed_band(ev, lo, hi)
            return catalog.band_union(ev, lo, hi)
        if kind in ("and", "or"):
            if not isinstance(body, list) or not body:
                self.fail(p, "expected a nonempty list")
            kids = tuple(self.hypothesis(c, p + (i,)) for i, c in enumerate(body))
            return And(kids) if kind == "and" else Or(kids)
        if kind == "closed":
            inner = self.hypothesis(body, p)
            if not is_open_form(inner):
                self.fail(p, "closed wraps an open-form hypothesis")
            return ClosedComplement(inner)
        if not isinstance(body, list) or not body:
            self.fail(p, "expected a nonempty list of closed pieces")
        pieces = []
        for i, c in enumerate(body):
            piece = self.hypothesis(c, p + (i,))
            if not isinstance(piece, ClosedComplement):
                self.fail(p + (i,), "fsigma pieces must be closed")
            pieces.append(piece)
        return FSigma.of(pieces)

    def partition(self, obj, path):
        if isinstance(obj, str):
            if obj not in catalog.PARTITIONS:
                self.fail(path, f"unknown named partition {obj!r}")
            return catalog.PARTITIONS[obj]()
        if not isinstance(obj, list) or not obj:
            self.fail(path, "expected a named partition or a list of answers")
        answers, labels = [], []
        for i, a in enumerate(obj):
            p = tuple(path) + (i,)
            self.keys(a, p, {"label", "hypothesis"}, ("label", "hypothesis"))
            h = self.hypothesis(a["hypothesis"], p + ("hypothesis",))
            if isinstance(h, ClosedComplement):
                h = FSigma.of([h], str(a["label"]))
            if not isinstance(h, FSigma):
                self.fail(p, "answers must be closed or fsigma")
            answers.append(h)
            labels.append(str(a["label"]))
        return Partition(answers, labels)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

CLAIM_KEYS = {"sv3-bound": {"alpha"}, "sv4-eventual": {"target"},
              "convergence": {"target", "horizon"}}


def _claims(parser, cfg, worlds):
    out = []
    for i, c in enumerate(cfg.get("claims", []) or []):
        p = ("claims", i)
        if not isinstance(c, dict) or "kind" not in c:
            parser.fail(p, "a claim needs a 'kind'")
        kind = c["kind"]
        if kind not in CLAIM_KEYS:
            parser.fail(p + ("kind",), f"unknown claim kind {kind!r}")
        parser.keys(c, p, CLAIM_KEYS[kind] | {"kind", "world"})
        which = c.get("world")
        if which is None:
            targets = list(range(len(worlds)))
        elif isinstance(which, int) and 0 <= which < len(worlds):
            targets = [which]
        else:
            labels = [w.label for w in worlds]
            if which not in labels:
                parser.fail(p + ("world",), f"no world {which!r}")
            targets = [labels.index(which)]
        params = {k: v for k, v in c.items() if k not in ("world",)}
        if "alpha" in params:
            a = parser.rational(params["alpha"], p + ("alpha",))
            if a < 0:
                parser.fail(p + ("alpha",), "claim alpha must be >= 0")
            params["alpha"] = float(a)
        out.append((targets, params))
    return out


def _alpha(parser, cfg):
    if "alpha" not in cfg:
        parser.fail(("alpha",), "missing key 'alpha'")
    a = parser.rational(cfg["alpha"], ("alpha",))
    if not 0 < a < 1:
        parser.fail(("alpha",), "alpha must lie in (0,1)")
    return a


def _trial_experiment(parser, cfg, kind):
    for key in ("worlds", "n_max", "trials", "seed"):
        if key not in cfg:
            parser.fail((key,), f"missing key {key!r}")
    worlds = parser.worlds(cfg["worlds"], ("worlds",))
    alpha = _alpha(parser, cfg)
    n_max = parser.integer(cfg["n_max"], ("n_max",))
    trials = parser.integer(cfg["trials"], ("trials",))
    seed = parser.integer(cfg["seed"], ("seed",), minimum=0)
    workers = parser.integer(cfg.get("workers", 1), ("workers",))
    if kind == "solve":
        if "partition" not in cfg:
            parser.fail(("partition",), "missing key 'partition'")
        problem = parser.partition(cfg["partition"], ("partition",))
        fam = solver(problem, alpha)
    else:
        if "hypothesis" not in cfg:
            parser.fail(("hypothesis",), "missing key 'hypothesis'")
        h = parser.hypothesis(cfg["hypothesis"], ("hypothesis",))
        construction = cfg.get("construction", "auto")
        if kind == "limit":
            if isinstance(h, ClosedComplement):
                h = FSigma.of([h])
            if not isinstance(h, FSigma):
                parser.fail(("hypothesis",), "limit experiments need a closed or fsigma hypothesis")
            fam = limiting_verifier(h, alpha)
        elif construction == "dyadic-union":
            if not isinstance(h, SubBasic):
                parser.fail(("construction",), "dyadic-union needs a subbasic hypothesis")
            fam = catalog.dyadic_union(h.event, h.b, alpha)
        elif construction == "auto":
            if not is_open_form(h):
                parser.fail(("hypothesis",), "verify experiments need an open-form hypothesis")
            fam = build_verifier(h, alpha)
        else:
            parser.fail(("construction",), f"unknown construction {construction!r}")
    claims = _claims(parser, cfg, worlds)
    reports, results = [], []
    for idx, w in enumerate(worlds):
        plan = TrialPlan(fam, w, n_max, trials, seed)
        rep = run_trials(plan, workers=workers)
        reports.append(rep)
        for targets, params in claims:
            if idx in targets:
                for r in certify(rep, [params]):
                    results.append({"world": idx, **_claim_row(r)})
    return reports, results


def _claim_row(r):
    return {"kind": r.kind, "passed": r.passed, "value": r.value, "bound": r.bound}


def _prop_experiment(parser, cfg):
    name = cfg.get("example")
    if name not in EXAMPLES:
        parser.fail(("example",), f"unknown example {name!r}; choose from {sorted(EXAMPLES)}")
    raw = cfg.get("worlds")
    if not isinstance(raw, list) or not raw:
        parser.fail(("worlds",), "expected a nonempty list of binary stream literals")
    stages = parser.integer(cfg.get("stages", 20), ("stages",))
    make, expect = EXAMPLES[name]
    method = make()
    rows, summary = [], []
    for i, lit in enumerate(raw):
        try:
            stream = Stream.parse(str(lit))
        except ValueError as exc:
            parser.fail(("worlds", i), str(exc))
        outs = simulate_inquiry(stream, method, stages)
        for n, o in enumerate(outs):
            rows.append({"world": str(stream), "stage": n, "prefix": stream.first(n), "output": o})
        summary.append({"world": str(stream), "stable_output": stabilised(outs),
                        "expected_limit": expect(stream)})
    return rows, summary


def _weak_experiment(parser, cfg):
    if "limit" not in cfg:
        parser.fail(("limit",), "missing key 'limit'")
    limit = parser.world(cfg["limit"], ("limit",))
    parser.space = limit.space
    seq = cfg.get("sequence")
    if seq is not None:
        kind, body = parser.single(seq, ("sequence",), {"coin-shift"})
        parser.keys(body, ("sequence", kind), {"base", "k_max"})
        worlds = catalog.coin_sequence(
            parser.rational(body.get("base", "1/2"), ("sequence", kind, "base")),
            parser.integer(body.get("k_max", 20), ("sequence", kind, "k_max")))
    else:
        worlds = parser.worlds(cfg.get("worlds"), ("worlds",))
    parser.space = limit.space
    ev_cfg = cfg.get("events", "algebra")
    if ev_cfg == "algebra":
        if not limit.space.is_finite:
            parser.fail(("events",), "the full algebra is only enumerable on finite alphabets")
        from itertools import combinations
        syms = limit.space.symbols
        events = [limit.space.event(c) for r in range(len(syms) + 1) for c in combinations(syms, r)]
    else:
        if not isinstance(ev_cfg, list):
            parser.fail(("events",), "expected 'algebra' or a list of events")
        events = [parser.event(e, ("events", i)) for i, e in enumerate(ev_cfg)]
    tol = float(parser.rational(cfg.get("tol", "1/100"), ("tol",)))
    if tol <= 0:
        parser.fail(("tol",), "tol must be positive")
    ok, report = weak_convergence_check(worlds, limit, events, tol)
    rows = [{"event": k, "max_tail_deviation": v, "ok": v < tol} for k, v in report.items()]
    return ok, rows


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(x):
    return repr(float(x))


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _numbered(path: Path, i: int, count: int) -> Path:
    if count == 1:
        return path
    return path.with_name(f"{path.stem}.{i}{path.suffix}")


def run_cli(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="statverify", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, type=Path)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--output", type=Path)
    ap.add_argument("--format", choices=("csv", "json"))
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        return _main(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (GroundTruthMismatch, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _main(args) -> int:
    try:
        text = args.config.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    doc = _Doc(text)
    cfg = doc.data
    parser = _Parser(doc)
    parser.keys(cfg, (), TOP_KEYS, ("experiment",))
    kind = cfg["experiment"]
    if kind not in EXPERIMENTS:
        parser.fail(("experiment",), f"unknown experiment {kind!r}; choose from {EXPERIMENTS}")
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.trials is not None:
        cfg["trials"] = args.trials
    out_cfg = cfg.get("output", {}) or {}
    parser.keys(out_cfg, ("output",), {"path", "format"})
    fmt = args.format or out_cfg.get("format", "csv")
    if fmt not in ("csv", "json"):
        parser.fail(("output", "format"), "format must be csv or json")
    out_path = args.output or (Path(out_cfg["path"]) if "path" in out_cfg else None)

    status = 0
    if kind in ("verify", "limit", "solve"):
        reports, results = _trial_experiment(parser, cfg, kind)
        if any(not r["passed"] for r in results):
            status = 2
        if fmt == "json":
            payload = {"experiment": kind, "reports": [r.to_dict() for r in reports],
                       "claims": results}
            outputs = [json.dumps(payload, sort_keys=True, indent=1) + "\n"]
        else:
            outputs = [_csv_text(CSV_HEADER, [(n, _fmt(a), _fmt(l), _fmt(h), _fmt(c))
                                              for n, a, l, h, c in r.rows()]) for r in reports]
        for r in reports:
            log.info("%s on %s: final accept_rate=%.4f cum_error=%.4f eventual_rate=%.4f",
                     kind, r.world, r.accept_rate[-1], r.cum_error, r.eventual_rate)
        for c in results:
            log.info("claim %-13s world %d: %s (value %.6g, bound %.6g)", c["kind"], c["world"],
                     "PASS" if c["passed"] else "FAIL", c["value"], c["bound"])
    elif kind == "prop":
        rows, summary = _prop_experiment(parser, cfg)
        if fmt == "json":
            outputs = [json.dumps({"experiment": kind, "table": rows, "summary": summary},
                                  sort_keys=True, indent=1) + "\n"]
        else:
            outputs = [_csv_text(["world", "stage", "prefix", "output"],
                                 [(r["world"], r["stage"], r["prefix"], r["output"]) for r in rows])]
        for s in summary:
            log.info("world %s: stabilises at %s (expected %s)", s["world"], s["stable_output"],
                     s["expected_limit"])
    else:
        ok, rows = _weak_experiment(parser, cfg)
        status = 0 if ok else 2
        if fmt == "json":
            outputs = [json.dumps({"experiment": kind, "converges": ok, "events": rows},
                                  sort_keys=True, indent=1) + "\n"]
        else:
            outputs = [_csv_text(["event", "max_tail_deviation", "ok"],
                                 [(r["event"], _fmt(r["max_tail_deviation"]), r["ok"]) for r in rows])]
        log.info("weak convergence: %s", "PASS" if ok else "FAIL")

    if out_path is None:
        for text in outputs:
            sys.stdout.write(text)
    else:
        for i, text in enumerate(outputs):
            _write(_numbered(out_path, i, len(outputs)), text)
    return status


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
