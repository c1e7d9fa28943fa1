"""Command line front end: ``cfprobe check | corpus | axis-dump``.

Exit codes: 0 consistent with a characteristic function, 1 not one,
2 inconclusive, 3 usage or input error.  For ``corpus`` 0 means every
builtin met its expectation and 1 lists the mismatches.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, harmonic
from .criteria import (
    IS_CF_CONSISTENT,
    NOT_CF,
    VERDICT_INCONCLUSIVE,
    CheckPolicy,
    aggregate_verdict,
    corollary3_check,
    egorov_check,
    finite_difference_cm_check,
    theorem2_check,
)
from .funcmodel import (
    BUILTIN_CATALOG,
    IS_CF,
    CandidateFunction,
    catalog_entry,
    from_expression,
    load_samples,
    validate,
)
from .oracles import FourierGrid, adversarial_points, bochner_fft_check, psd_gram_check, random_points
from .quadrature import QuadratureConfig
from .reports import CriterionReport

SCHEMA = "cfprobe.report/1"
EXIT = {IS_CF_CONSISTENT: 0, NOT_CF: 1, VERDICT_INCONCLUSIVE: 2}
USAGE_ERROR = 3

CRITERIA = {
    "theorem2": theorem2_check,
    "finite_difference": finite_difference_cm_check,
    "corollary3": corollary3_check,
    "egorov": egorov_check,
}
ORACLES = ("bochner", "psd")
CSV_HEADER = "y,k,value,error_bound,imag_residual"

log = logging.getLogger("cfprobe")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    candidate: tuple[str, str]  # (builtin | expr | samples, text)
    criteria: tuple[str, ...] = tuple(CRITERIA)
    oracles: tuple[str, ...] = ORACLES
    policy: CheckPolicy = field(default_factory=CheckPolicy)
    seed: int = 0
    out: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if not self.criteria and not self.oracles:
            raise UsageError("select at least one criterion or oracle")
        unknown = [c for c in self.criteria if c not in CRITERIA] + [o for o in self.oracles if o not in ORACLES]
        if unknown:
            raise UsageError(f"unknown check(s): {', '.join(unknown)}")

    def echo(self) -> dict[str, Any]:
        """Everything that affects results; output path and parallelism excluded."""
        pol = dataclasses.asdict(self.policy)
        pol.pop("jobs")
        return {
            "candidate": {"kind": self.candidate[0], "spec": self.candidate[1]},
            "criteria": list(self.criteria),
            "oracles": list(self.oracles),
            "policy": pol,
            "seed": self.seed,
        }


# serialisation -----------------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def dumps(obj: Any, indent: int = 0) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_str(str(k))}: {dumps(v, indent + 1)}" for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return "null" if obj is None else ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return _json_str(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _json_str(s: str) -> str:
    return json.dumps(s, ensure_ascii=True)


def report_dict(r: CriterionReport) -> dict[str, Any]:
    return {
        "criterion": r.criterion,
        "status": r.status,
        "certificates": [
            {
                "index": c.index,
                "y": c.y,
                "observed": c.observed,
                "error_bound": c.error_bound,
                "margin": c.margin,
                **({"extra": c.extra} if c.extra else {}),
            }
            for c in r.certificates
        ],
        "cells_evaluated": r.cells_evaluated,
        "cells_inconclusive": r.cells_inconclusive,
        "worst_margin": r.worst_margin,
        "completeness": r.completeness,
        "notes": list(r.notes),
    }


# running -----------------------------------------------------------------------------


def load_candidate(kind: str, spec: str) -> CandidateFunction:
    if kind == "builtin":
        try:
            return catalog_entry(spec).candidate
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    try:
        if kind == "expr":
            return from_expression(spec)
        return load_samples(spec)
    except OSError as exc:
        raise UsageError(f"cannot read {spec}: {exc.strerror or exc}") from None
    except ValueError as exc:
        # parse errors carry their position in the message
        raise UsageError(str(exc)) from None


def run_oracle(name: str, f: CandidateFunction, cfg: RunConfig) -> CriterionReport:
    if name == "bochner":
        return bochner_fft_check(f, FourierGrid(), cfg=cfg.policy.quadrature)
    # psd: 16 seeded random points, then a seeded search over jittered lattices
    # differences x_i - x_j must stay inside a sampled range
    span = f.support if f.support is not None else math.inf
    rng = np.random.default_rng(cfg.seed)
    pts = random_points(rng, 16, min(8.0, 0.45 * span))
    first = psd_gram_check(f, pts)
    adv, _ = adversarial_points(f, cfg.seed, span=span)
    second = psd_gram_check(f, adv - adv.mean())
    chosen = second if (second.worst_margin or 0) < (first.worst_margin or 0) else first
    completeness = dict(chosen.completeness, seed=cfg.seed, search="random 16 points + 200 jittered 64-point lattices")
    return dataclasses.replace(chosen, completeness=completeness)


def run_check(f: CandidateFunction, cfg: RunConfig) -> dict[str, Any]:
    started = time.perf_counter()
    policy = dataclasses.replace(cfg.policy, jobs=cfg.jobs)
    _, issues = validate(f)
    crit = [CRITERIA[c](f, policy) for c in cfg.criteria]
    orc = [run_oracle(o, f, cfg) for o in cfg.oracles]
    try:
        v = aggregate_verdict(crit, orc)
        verdict = {"label": v.label, "contributing": list(v.contributing), "failed": list(v.failed)}
    except ValueError as exc:
        verdict = {"label": VERDICT_INCONCLUSIVE, "contributing": [], "failed": [], "reason": str(exc)}
    log.info("%s: %s in %.2fs", f.name, verdict["label"], time.perf_counter() - started)
    return {
        "schema": SCHEMA,
        "version": __version__,
        "config": cfg.echo(),
        "candidate": {"name": f.name, "validation_issues": issues},
        "criteria": [report_dict(r) for r in crit],
        "oracles": [report_dict(r) for r in orc],
        "verdict": verdict,
    }


def write_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror or exc}") from None


def cmd_check(cfg: RunConfig) -> int:
    f = load_candidate(*cfg.candidate)
    report = run_check(f, cfg)
    write_text(dumps(report) + "\n", cfg.out)
    return EXIT[report["verdict"]["label"]]


def expected_label(entry_verdict: str) -> str:
    return IS_CF_CONSISTENT if entry_verdict == IS_CF else NOT_CF


def cmd_corpus(cfg: RunConfig, names=None, expect=None) -> int:
    expect = expect or {}
    names = list(BUILTIN_CATALOG) if not names else names
    entries, rows, mismatches = [], [], []
    for name in names:
        try:
            entry = catalog_entry(name)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
        run_cfg = dataclasses.replace(cfg, candidate=("builtin", name))
        report = run_check(entry.candidate, run_cfg)
        want = expected_label(expect.get(name, entry.expected_verdict))
        got = report["verdict"]["label"]
        entries.append(report)
        rows.append({"name": name, "expected": want, "verdict": got, "match": want == got})
        if want != got:
            mismatches.append(name)
    width = max(len(r["name"]) for r in rows)
    for r in rows:
        flag = "ok" if r["match"] else "MISMATCH"
        print(f"{r['name']:<{width}}  expected {r['expected']:<16}  got {r['verdict']:<16}  {flag}")
    if mismatches:
        print("mismatches: " + ", ".join(mismatches))
    if cfg.out is not None:
        doc = {"schema": SCHEMA, "version": __version__, "entries": entries, "summary": rows}
        write_text(dumps(doc) + "\n", cfg.out)
    return 1 if mismatches else 0


def axis_csv(f: CandidateFunction, cfg: RunConfig) -> str:
    pol = cfg.policy
    table = harmonic.axis_derivatives(f, pol.y_grid, pol.k_max, pol.quadrature, cfg.jobs)
    lines = [CSV_HEADER]
    for k in range(table.max_order + 1):
        for j, y in enumerate(table.y_grid):
            cells = (y, table.values[k, j], table.error_bounds[k, j], table.imag_residuals[k, j])
            lines.append(",".join([_fmt_float(cells[0]), str(k)] + [_fmt_float(float(c)) for c in cells[1:]]))
    return "\n".join(lines) + "\n"


def cmd_axis_dump(cfg: RunConfig) -> int:
    f = load_candidate(*cfg.candidate)
    try:
        text = axis_csv(f, cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_text(text, cfg.out)
    return 0


# argument parsing ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _list(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(s) for s in _list(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cfprobe", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"cfprobe {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, with_candidate=True, kmax_default=8):
        if with_candidate:
            g = sp.add_mutually_exclusive_group(required=True)
            g.add_argument("--builtin", help="catalog name, e.g. gaussian or cos(2)")
            g.add_argument("--expr", help="expression in t, e.g. 'exp(-t^2/2)'")
            g.add_argument("--samples", help="two-column CSV (t, f(t)) with a header row")
        sp.add_argument("--criteria", type=_list, default=tuple(CRITERIA), help="comma list of " + ",".join(CRITERIA))
        sp.add_argument("--oracles", type=_list, default=ORACLES, help="comma list of " + ",".join(ORACLES))
        sp.add_argument("--ymin", type=float, default=0.05)
        sp.add_argument("--ymax", type=float, default=20.0)
        sp.add_argument("--ypoints", type=int, default=25)
        sp.add_argument("--kmax", type=int, default=kmax_default)
        sp.add_argument("--nmax", type=int, default=3)
        sp.add_argument("--pmax", type=int, default=3)
        sp.add_argument("--deltas", type=_floats, default=(0.1, 1.0, 10.0))
        sp.add_argument("--abs-tol", type=float, default=1e-10)
        sp.add_argument("--rel-tol", type=float, default=1e-10)
        sp.add_argument("--sign-tol", type=float, default=1e-8)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--jobs", type=int, default=1)

    common(sub.add_parser("check", help="run the checks on one candidate"))
    corpus = sub.add_parser("corpus", help="run every builtin against its expected verdict")
    common(corpus, with_candidate=False)
    corpus.add_argument("--only", type=_list, default=(), help="comma list of builtin names")
    corpus.add_argument("--expect", action="append", default=[], metavar="NAME=IS_CF|NOT_CF",
                        help="override a builtin's expected verdict")
    common(sub.add_parser("axis-dump", help="CSV table of d^k/dy^k u_f(0, y)"), kmax_default=harmonic.K_MAX_DEFAULT)
    return p


def config_from_args(args) -> RunConfig:
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    if args.command == "corpus":
        candidate = ("builtin", "")
    elif args.builtin is not None:
        candidate = ("builtin", args.builtin)
    elif args.expr is not None:
        candidate = ("expr", args.expr)
    else:
        candidate = ("samples", args.samples)
    try:
        quad = QuadratureConfig(abs_tol=args.abs_tol, rel_tol=args.rel_tol)
        policy = CheckPolicy(
            ymin=args.ymin, ymax=args.ymax, ypoints=args.ypoints, k_max=args.kmax, n_max=args.nmax,
            p_max=args.pmax, deltas=args.deltas, sign_tol=args.sign_tol, quadrature=quad,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return RunConfig(candidate, args.criteria, args.oracles, policy, args.seed, args.out, args.jobs)


def _expectations(items) -> dict[str, str]:
    out = {}
    for item in items:
        name, sep, label = item.rpartition("=")
        if not sep or label not in (IS_CF, NOT_CF):
            raise UsageError(f"--expect wants NAME=IS_CF or NAME=NOT_CF, got {item!r}")
        out[name] = label
    return out


def main(argv=None) -> int:
    level = os.environ.get("CFPROBE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "check":
            return cmd_check(cfg)
        if args.command == "corpus":
            return cmd_corpus(cfg, args.only, _expectations(args.expect))
        return cmd_axis_dump(cfg)
    except UsageError as exc:
        print(f"cfprobe: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
