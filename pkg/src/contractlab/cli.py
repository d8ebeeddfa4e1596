"""`lab <experiment> --config file.json [--threads N] [--out prefix]`.

Exit codes: 0 success, 2 config error, 3 budget abort, 4 invariant violation.
Output files never contain timings, so identical configs give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import barriers as Bq
from . import bbf
from . import census as Cn
from . import geometry as Geo
from . import groups as G
from . import paths as P
from .errors import BudgetExceeded, InvariantViolation, SpecError

EXPERIMENTS = ("census", "genericity", "conjugacy", "barriers", "contraction", "paths", "bbf")

DEFAULTS = {
    "census": {"n_max": 8, "predicate": "all", "cap": G.DEFAULT_STREAM_CAP},
    "genericity": {"n_max": 8, "predicate": "conjugate_into_factor", "window": None, "period": None,
                   "cap": G.DEFAULT_STREAM_CAP},
    "conjugacy": {"n_max": 8, "predicate": "conjugate_into_factor", "cap": G.DEFAULT_STREAM_CAP},
    "barriers": {"n_max": 6, "epsilon": 0, "big_m": 0, "barrier_word": None, "power": None,
                 "cap": G.DEFAULT_STREAM_CAP},
    "contraction": {"elements": None, "radius": 4, "mode": "exhaustive", "samples": 1000, "seed": 0,
                    "constant": None},
    "paths": {"D": [4, 6, 8], "tau": 2, "axis": "a", "connector": "b", "probe_B": None, "probe_F": None,
              "probe_D": 3, "word_len": 3},
    "bbf": {"axis": "a", "translates": ["", "b", "b.a.b"], "extent": 6, "K": 0, "N": 2, "delta": 1,
            "K_tilde": 0, "R": 0},
}
REQUIRED = {"barriers": ("barrier_word",), "contraction": ("elements",)}
POSITIVE = ("n_max", "cap", "radius", "samples", "extent", "word_len", "N")


@dataclass
class ExperimentConfig:
    group: G.GroupSpec
    experiment: str
    params: dict
    output: str = "lab_out"
    threads: int = 1


@dataclass
class RunReport:
    config: dict
    steps: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    truncated: bool = False
    wall_time: float = 0.0
    files: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"config": self.config, "steps": self.steps, "summary": self.summary,
                           "truncated": self.truncated, "files": self.files}, indent=2, sort_keys=True,
                          default=_jsonable)


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if hasattr(x, "item"):
        return x.item()
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    return str(x)


# ---------------------------------------------------------------------------
# validation


def load_config_text(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"line {e.lineno} column {e.colno}: {e.msg}") from None


def validate(raw: dict, experiment: str | None = None) -> list:
    """Schema diagnostics without running anything (empty list = valid)."""
    diags = []
    if not isinstance(raw, dict):
        return ["config: top level must be a JSON object"]
    exp = raw.get("experiment", experiment)
    if experiment and raw.get("experiment") not in (None, experiment):
        diags.append(f"experiment: config says {raw['experiment']!r} but {experiment!r} was requested")
    if exp not in EXPERIMENTS:
        diags.append(f"experiment: unknown {exp!r}; expected one of {', '.join(EXPERIMENTS)}")
        return diags
    spec = None
    if "group" not in raw:
        diags.append("group: missing")
    else:
        try:
            spec = G.spec_from_dict(raw["group"])
        except (SpecError, KeyError, TypeError) as e:
            diags.append(f"group: {e}")
        if spec is not None:
            diags += [f"group: {p}" for p in G.check_spec(spec)]
    params = raw.get("params", {})
    if not isinstance(params, dict):
        return diags + ["params: must be an object"]
    for k in params:
        if k not in DEFAULTS[exp]:
            diags.append(f"params.{k}: unknown for {exp}")
    for k in REQUIRED.get(exp, ()):
        if params.get(k) is None:
            diags.append(f"params.{k}: required for {exp}")
    for k in POSITIVE:
        v = params.get(k)
        if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v <= 0):
            diags.append(f"params.{k}: must be a positive integer, got {v!r}")
    threads = raw.get("threads", 1)
    if not isinstance(threads, int) or threads < 1:
        diags.append(f"threads: must be a positive integer, got {threads!r}")
    if spec is not None and not diags and exp in ("census", "genericity", "conjugacy", "barriers"):
        full = {**DEFAULTS[exp], **params}
        model = G.build_model(spec)
        predicted = Cn.predicted_ball_size(model, full["n_max"])
        if predicted is not None and predicted > full["cap"]:
            diags.append(f"params.n_max: predicted ball size {predicted} exceeds cap {full['cap']}")
    return diags


def parse_config(raw: dict, experiment: str | None = None) -> ExperimentConfig:
    diags = validate(raw, experiment)
    if diags:
        raise SpecError("; ".join(diags))
    exp = raw.get("experiment", experiment)
    params = {**DEFAULTS[exp], **raw.get("params", {})}
    return ExperimentConfig(G.spec_from_dict(raw["group"]), exp, params, raw.get("output", "lab_out"),
                            raw.get("threads", 1))


# ---------------------------------------------------------------------------
# experiments


def _write(report: RunReport, prefix: str, suffix: str, text: str):
    path = Path(f"{prefix}_{suffix}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    report.files.append(path.name)


def _gnuplot(prefix, csv_name, xcol, ycols, title):
    lines = ["set datafile separator ','", "set key top left", f"set title '{title}'",
             "set terminal pngcairo size 800,500", f"set output '{prefix}_{csv_name}.png'"]
    plots = [f"'{prefix}_{csv_name}.csv' using {xcol}:{c} skip 1 with linespoints title '{t}'" for c, t in ycols]
    return "\n".join(lines + ["plot " + ", ".join(plots)]) + "\n"


def _exp_census(cfg, model, report, prefix):
    p = cfg.params
    table = Cn.census(model, p["n_max"], p["predicate"], cfg.threads, cap=p["cap"])
    _write(report, prefix, "census.csv", table.to_csv())
    report.steps.append({"op": "census", "total": table.total, "filtered": table.filtered})
    if len(table.n) >= 4:
        est = Cn.exponent(table, column="total")
        report.steps.append({"op": "exponent", **est.to_dict()})
        report.summary.append(f"exponent({model.label}) = {est.value:.6f} [{est.method}]")
    else:
        report.summary.append(f"census({model.label}) up to n = {table.n[-1]}: too few rows for an exponent")
    return "census", [(2, "total"), (3, "filtered")]


def _exp_genericity(cfg, model, report, prefix):
    p = cfg.params
    window = tuple(p["window"]) if p["window"] else None
    curve = Cn.genericity_curve(model, p["n_max"], p["predicate"], cfg.threads, window=window, period=p["period"])
    _write(report, prefix, "genericity.csv", curve.to_csv())
    report.steps.append({"op": "genericity_curve", "decay": curve.decay, "residual": curve.residual,
                         "window": list(curve.window), "period": curve.period, "observed": curve.observed})
    report.summary.append(f"decay rate = {curve.decay:.6f} (residual {curve.residual:.4f}, period {curve.period})")
    return "genericity", [(2, "ratio")]


def _exp_conjugacy(cfg, model, report, prefix):
    p = cfg.params
    e_all, e_fil, table = Cn.conjugacy_growth(model, p["n_max"], p["predicate"], cfg.threads)
    _write(report, prefix, "conjugacy.csv", table.to_csv())
    report.steps.append({"op": "conjugacy_growth", "all": e_all.to_dict(), "filtered": e_fil.to_dict()})
    report.summary.append(f"conjugacy growth: all {e_all.value:.6f}, {p['predicate']} {e_fil.value:.6f}, "
                          f"gap {e_all.value - e_fil.value:.6f}")
    return "conjugacy", [(2, "classes_total"), (3, "classes_filtered")]


def _exp_barriers(cfg, model, report, prefix):
    p = cfg.params
    q = Bq.BarrierQuery(p["epsilon"], p["big_m"], G.parse(model, p["barrier_word"]), p["power"])
    table = Bq.enumerate_V(model, p["n_max"], q, cfg.threads)
    _write(report, prefix, "barriers.csv", Bq.v_table_csv(table))
    gap = Cn.tightness_gap(model, p["n_max"], table)
    report.steps.append({"op": "enumerate_V", "query": q.to_dict(model), "v": table.filtered, "total": table.total})
    report.steps.append({"op": "tightness_gap", "e_A": gap.e_A.to_dict(), "e_G": gap.e_G.to_dict(), "gap": gap.gap})
    report.summary.append(f"barrier-free exponent {gap.e_A.value:.6f} vs {gap.e_G.value:.6f}: gap {gap.gap:.3g}")
    return "barriers", [(2, "sphere"), (3, "V")]


def _exp_contraction(cfg, model, report, prefix):
    p = cfg.params
    budget = Geo.Budget(p["radius"], p["mode"], p["samples"], p["seed"])
    rows = ["element,classification,estimate,witness"]
    for text in p["elements"]:
        h = G.element(model, text)
        ax = Geo.axis_for_radius(model, h, budget.radius)
        cls = G.classify_raag(model, h) if model.kind == "raag" else ""
        if p["constant"] is not None:
            v = Geo.contraction_verdict(model, ax.base, p["constant"], budget)
            value, wit = (p["constant"] if v.passed else math.inf), v
        else:
            est = Geo.estimate_contraction_constant(model, ax.base, budget)
            value = est.value
            wit = next((v for _, v in sorted(est.verdicts.items()) if not v.passed), None)
        w = json.dumps(wit.witness.to_dict(model), sort_keys=True) if wit is not None and wit.witness else ""
        rows.append(f"{text},{cls},{value},\"{w.replace(chr(34), chr(39))}\"")
        report.steps.append({"op": "contraction", "element": text, "classification": cls, "estimate": value})
        report.summary.append(f"{text}: {cls or 'axis'} estimate {value}")
    _write(report, prefix, "contraction.csv", "\n".join(rows) + "\n")
    return None, None


def _exp_paths(cfg, model, report, prefix):
    p = cfg.params
    a = G.element(model, p["axis"])
    b = G.element(model, p["connector"])
    rows = ["D,admissible,fellow_travel,quasi_geodesic"]
    for D in p["D"]:
        dec = two_axis_decomposition(model, a, b, D, p["tau"])
        rep = P.check_admissible(model, dec)
        eps = P.fellow_travel_offset(model, model.normalize(dec.path), dec)
        c = P.quasi_geodesic_constant(model, dec.path)
        rows.append(f"{D},{rep.verdict},{eps},{c}")
        report.steps.append({"op": "admissible", "D": D, "verdict": rep.verdict, "bp": rep.bp, "ll2": rep.ll2,
                             "fellow_travel": eps, "quasi_geodesic": c})
    _write(report, prefix, "paths.csv", "\n".join(rows) + "\n")
    if p["probe_B"]:
        Bs = [G.element(model, t) for t in p["probe_B"]]
        Fs = [Geo.build_axis(model, G.element(model, t), 8) for t in p["probe_F"] or [p["axis"]]]
        res = P.extension_injectivity_probe(model, Bs, Fs, p["probe_D"], p["tau"], p["word_len"])
        report.steps.append({"op": "injectivity_probe", "passed": res.passed, "images": res.images,
                             "collision": res.collision})
        report.summary.append(f"injectivity probe: {'pass' if res.passed else 'fail'} over {res.images} words")
    report.summary.append("admissible at D=" + ",".join(str(s["D"]) for s in report.steps
                                                         if s["op"] == "admissible" and s["verdict"]))
    return None, None


def two_axis_decomposition(model, a, b, D, tau):
    """Path a^D b a^D marked on <a> and a^D b <a>."""
    ax = Geo.build_axis(model, a, 2 * D + 4).base
    aD = G.power(model, a, D)
    X1 = ax.translate(model, model.mul(aD, b))
    path = aD + b + aD
    k = len(aD)
    return P.AdmissibleDecomposition(path, [P.Marked(0, k, ax), P.Marked(k + len(b), 2 * k + len(b), X1)], D, tau)


def axis_family(model, axis_text, translates, extent):
    ax = Geo.build_axis(model, G.element(model, axis_text), extent).base
    return bbf.ProjectionFamily(model, [ax.translate(model, G.element(model, t)) for t in translates])


def _exp_bbf(cfg, model, report, prefix):
    p = cfg.params
    fam = axis_family(model, p["axis"], p["translates"], p["extent"])
    pc = bbf.build_projection_complex(fam, p["K"])
    qts = bbf.build_quasi_tree_of_spaces(fam, p["K"], p["N"])
    bn = bbf.bottleneck_certify(pc, p["delta"])
    dist = [bbf.member_distortion(qts, model, i) for i in range(len(fam))]
    _write(report, prefix, "complex.csv", pc.to_csv())
    _write(report, prefix, "complex.json", pc.to_json())
    _write(report, prefix, "qts.csv", qts.to_csv())
    report.steps.append({"op": "projection_complex", "edges": [list(e) for e in sorted(pc.edges)],
                         "bottleneck": bn.passed, "witness": bn.witness})
    report.steps.append({"op": "quasi_tree_of_spaces", "vertices": qts.n, "distortion": dist})
    report.summary.append(f"projection complex quasi-tree at delta={p['delta']}: {bn.passed}; "
                          f"max member distortion {max(dist)}")
    return None, None


RUNNERS = {"census": _exp_census, "genericity": _exp_genericity, "conjugacy": _exp_conjugacy,
           "barriers": _exp_barriers, "contraction": _exp_contraction, "paths": _exp_paths, "bbf": _exp_bbf}


def run(cfg: ExperimentConfig, raw: dict | None = None, gnuplot: bool = False) -> RunReport:
    t0 = time.perf_counter()
    model = G.build_model(cfg.group)
    report = RunReport(raw if raw is not None else {"experiment": cfg.experiment, "params": cfg.params})
    prefix = cfg.output
    try:
        name, cols = RUNNERS[cfg.experiment](cfg, model, report, prefix)
    except BudgetExceeded as e:
        report.truncated = True
        report.summary.append(f"budget abort: {e}")
        _write(report, prefix, "report.json", report.to_json())
        raise
    if gnuplot and name:
        _write(report, prefix, f"{name}.gp", _gnuplot(prefix, name, 1, cols, f"{name} {model.label}"))
    _write(report, prefix, "report.json", report.to_json())
    report.wall_time = time.perf_counter() - t0
    return report


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="lab", description="Desk-scale experiments on group actions.")
    ap.add_argument("experiment", help=f"one of {', '.join(EXPERIMENTS)} or 'validate'")
    ap.add_argument("--config", required=True)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--out")
    ap.add_argument("--gnuplot", action="store_true")
    args = ap.parse_args(argv)
    try:
        raw = load_config_text(Path(args.config).read_text())
    except (OSError, SpecError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    if args.experiment == "validate":
        diags = validate(raw)
        for d in diags:
            print(d)
        return 2 if diags else 0
    if args.threads is not None:
        raw["threads"] = args.threads
    elif "threads" not in raw:
        from .kernels import default_threads

        raw["threads"] = default_threads()
    if args.out:
        raw["output"] = args.out
    try:
        cfg = parse_config(raw, args.experiment)
    except SpecError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    try:
        report = run(cfg, raw, args.gnuplot)
    except BudgetExceeded as e:
        print(f"budget abort: {e}", file=sys.stderr)
        return 3
    except InvariantViolation as e:
        print(f"invariant violation: {e} {e.data!r}", file=sys.stderr)
        return 4
    except SpecError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    for line in report.summary:
        print(line)
    print(f"wall time {report.wall_time:.2f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
