"""Counting: ball and annulus censuses, growth exponents, conjugacy classes,
genericity curves and Poincaré partial sums."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import groups as G
from . import kernels as K
from .errors import InvariantViolation, SpecError

# ---------------------------------------------------------------------------
# predicates


@dataclass(frozen=True)
class Predicate:
    """A filter on elements.

    ``kernel`` optionally maps a model to ``(mode, patterns, pick)`` so local
    models can be counted by the compiled kernels; ``pick`` turns the kernel's
    two rows into (total, filtered) sphere counts.
    """

    label: str
    fn: Callable
    kernel: Optional[Callable] = None
    conjugation_invariant: bool = False

    def __call__(self, model, g) -> bool:
        return bool(self.fn(model, g))


def _rows_all(out):
    return out[0], out[0]


def _rows_second(out):
    return out[0], out[1]


def _rows_complement(out):
    return out[0], out[0] - out[1]


def _count_kernel(model):
    return (K.MODE_COUNT, ((), ()), _rows_all) if model.local else None


def _factor_kernel(pick):
    def kern(model):
        if model.local and model.kind == "free_product":
            return (K.MODE_FACTOR, ((), ()), pick)
        return None

    return kern


ALL = Predicate("all", lambda m, g: True, _count_kernel, True)
NONE = Predicate("none", lambda m, g: False, None, True)
HYPERBOLIC = Predicate(
    "hyperbolic", lambda m, g: G.classify_free_product(m, g).kind == "hyperbolic",
    _factor_kernel(_rows_complement), True)
CONJUGATE_INTO_FACTOR = Predicate(
    "conjugate_into_factor", G.is_conjugate_into_factor, _factor_kernel(_rows_second), True)
TORSION = Predicate("torsion", lambda m, g: G.classify_free_product(m, g).torsion, None, True)
RANK1_CANDIDATE = Predicate("rank1_candidate", lambda m, g: G.classify_raag(m, g) == "rank1_candidate", None, True)
JOIN_BOUND = Predicate("join_bound", lambda m, g: G.classify_raag(m, g) == "join_bound", None, True)

NAMED_PREDICATES = {p.label: p for p in
                    (ALL, NONE, HYPERBOLIC, CONJUGATE_INTO_FACTOR, TORSION, RANK1_CANDIDATE, JOIN_BOUND)}
NAMED_PREDICATES["false"] = NONE


def resolve_predicate(pred) -> Predicate:
    if pred is None:
        return ALL
    if isinstance(pred, Predicate):
        return pred
    if isinstance(pred, str):
        try:
            return NAMED_PREDICATES[pred]
        except KeyError:
            raise SpecError(f"unknown predicate {pred!r}; known: {sorted(NAMED_PREDICATES)}") from None
    if callable(pred):
        return Predicate(getattr(pred, "__name__", "custom"), pred)
    raise SpecError(f"not a predicate: {pred!r}")


# ---------------------------------------------------------------------------
# tables


@dataclass
class CensusTable:
    """Cumulative counts: ``total[i]`` and ``filtered[i]`` count elements (or
    classes) of length at most ``n[i]``."""

    n: list
    total: list
    filtered: list
    filter_label: str = "all"
    model_label: str = ""
    kind: str = "ball"  # ball | conjugacy
    truncated: bool = False

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.n, self.n[1:])):
            raise SpecError("census rows must have strictly increasing n")
        if any(c < 0 for c in self.total) or any(c < 0 for c in self.filtered):
            raise SpecError("census counts must be non-negative")
        if any(f > t for f, t in zip(self.filtered, self.total)):
            raise SpecError("filtered counts exceed totals")

    @property
    def rows(self):
        return list(zip(self.n, self.filtered))

    def ratios(self):
        return [f / t if t else 0.0 for f, t in zip(self.filtered, self.total)]

    def spheres(self, column="filtered"):
        c = getattr(self, column)
        return [c[0]] + [b - a for a, b in zip(c, c[1:])]

    @classmethod
    def from_spheres(cls, total_spheres, filtered_spheres, **kw):
        tot = [int(x) for x in np.cumsum(np.asarray(total_spheres, dtype=np.int64))]
        fil = [int(x) for x in np.cumsum(np.asarray(filtered_spheres, dtype=np.int64))]
        return cls(list(range(len(tot))), tot, fil, **kw)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.kind == "conjugacy":
            w.writerow(["n", "classes_total", "classes_filtered"])
            for row in zip(self.n, self.total, self.filtered):
                w.writerow(row)
        else:
            w.writerow(["n", "total", "filtered", "ratio"])
            for n, t, f, r in zip(self.n, self.total, self.filtered, self.ratios()):
                w.writerow([n, t, f, f"{r:.12g}"])
        return buf.getvalue()


def census(model, n_max: int, predicate=None, threads: int | None = None,
           cap: int = G.DEFAULT_STREAM_CAP, use_kernel: bool = True) -> CensusTable:
    """Cumulative counts of N(o, n) and of its elements satisfying ``predicate``."""
    pred = resolve_predicate(predicate)
    hook = pred.kernel(model) if (use_kernel and pred.kernel) else None
    if hook is not None:
        _check_cap(model, n_max, cap)
        mode, patterns, pick = hook
        out = K.run_partitioned(model, n_max, mode, threads, patterns)
        tot, fil = pick(out)
        fil = np.array(fil)
        fil[0] = 1 if pred(model, ()) else 0
        return CensusTable.from_spheres(tot, fil, filter_label=pred.label, model_label=model.label)
    tot = [0] * (n_max + 1)
    fil = [0] * (n_max + 1)
    for g in G.enumerate_ball(model, n_max, cap=cap):
        tot[len(g)] += 1
        if pred(model, g):
            fil[len(g)] += 1
    return CensusTable.from_spheres(tot, fil, filter_label=pred.label, model_label=model.label)


def _check_cap(model, n_max, cap):
    predicted = predicted_ball_size(model, n_max)
    if predicted is not None and predicted > cap:
        from .errors import BudgetExceeded

        raise BudgetExceeded(f"predicted ball size {predicted} exceeds cap {cap}", partial=[])


def predicted_ball_size(model, n: int) -> Optional[int]:
    """Exact ball size from the adjacency automaton of a local model; None otherwise."""
    if not getattr(model, "local", False):
        return None
    t = K.local_tables(model)
    a = t.allowed.astype(object)
    v = np.ones(len(model.ids), dtype=object)
    total = 1
    for _ in range(n):
        total += int(v.sum())
        v = a.T.dot(v)
    return total


# ---------------------------------------------------------------------------
# exponents


@dataclass
class ExponentEstimate:
    value: float
    method: str
    window: tuple
    residual: float
    ratio_value: float = float("nan")
    regression_value: float = float("nan")
    converged: bool = True
    poly_exponent: float | None = None
    dropped: list = field(default_factory=list)

    def to_dict(self):
        return {"value": self.value, "method": self.method, "window": list(self.window),
                "residual": self.residual, "ratio_value": self.ratio_value,
                "regression_value": self.regression_value, "converged": self.converged,
                "poly_exponent": self.poly_exponent, "dropped": self.dropped}


def annuli(table: CensusTable, delta: int = 0, column: str = "filtered") -> list:
    """``(n, #A(o, n, delta))`` for every n whose annulus lies inside the table."""
    cum = dict(zip(table.n, getattr(table, column)))
    n_max = table.n[-1]
    out = []
    for n in table.n:
        hi = n + delta
        if hi > n_max:
            break
        lo = n - delta - 1
        below = cum[lo] if lo >= table.n[0] else 0
        out.append((n, cum[hi] - below))
    return out


def exponent(table: CensusTable, delta: int = 0, window: Optional[tuple] = None,
             column: str = "filtered", poly_correction=False,
             tolerance: float = 0.05) -> ExponentEstimate:
    """Growth rate of annulus counts over a tail window.

    Reports a least-squares slope of log-count against n and the mean one-step
    log ratio; ``converged`` is False when the two disagree by more than
    ``tolerance``.  ``poly_correction`` models counts as ``n^alpha exp(e n)``:
    ``True`` fits alpha, a number fixes it (``-1`` for necklace-type counts)."""
    if len(table.n) < 4:
        raise SpecError("exponent needs at least 4 table rows")
    ann = annuli(table, delta, column)
    if window is None:
        hi = ann[-1][0]
        lo = min(math.ceil(table.n[-1] / 2), hi - 3)
        window = (max(lo, ann[0][0]), hi)
    pts = [(n, c) for n, c in ann if window[0] <= n <= window[1]]
    if len(pts) < 4:
        raise SpecError(f"window {window} holds fewer than 4 usable rows")
    dropped = [n for n, c in pts if c <= 0]
    pts = [(n, c) for n, c in pts if c > 0]
    fit_alpha = poly_correction is True
    fixed_alpha = None if isinstance(poly_correction, bool) else float(poly_correction)
    if len(pts) < (3 if fit_alpha else 2):
        return ExponentEstimate(0.0, "degenerate", tuple(window), 0.0, 0.0, 0.0, True, None, dropped)
    ns = np.array([p[0] for p in pts], dtype=float)
    ys = np.log(np.array([p[1] for p in pts], dtype=float))
    if fixed_alpha is not None:
        ys = ys - fixed_alpha * np.log(ns)
    cols = [ns, np.ones_like(ns)]
    if fit_alpha:
        cols.insert(1, np.log(ns))
    A = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = ys - A @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    slope = float(coef[0])
    alpha = float(coef[1]) if fit_alpha else fixed_alpha
    steps = []
    for (n0, c0), (n1, c1) in zip(pts, pts[1:]):
        r = (math.log(c1) - math.log(c0)) / (n1 - n0)
        if alpha is not None:
            r -= alpha * (math.log(n1) - math.log(n0)) / (n1 - n0)
        steps.append(r)
    ratio = float(np.mean(steps))
    value = max(0.0, slope)
    return ExponentEstimate(value, "log-regression", tuple(window), rms, max(0.0, ratio), slope,
                            abs(slope - ratio) <= tolerance, alpha, dropped)


def exact_exponent(spec) -> Optional[float]:
    """Closed-form growth rate where one is known: free groups, free products of
    free groups, and direct products (max of the factors)."""
    if isinstance(spec, G.FreeGroup):
        return math.log(2 * spec.rank - 1) if spec.rank > 1 else 0.0
    if isinstance(spec, G.FreeProduct) and isinstance(spec.left, G.FreeGroup) and isinstance(spec.right, G.FreeGroup):
        return exact_exponent(G.FreeGroup(spec.left.rank + spec.right.rank))
    if isinstance(spec, G.DirectProduct):
        a, b = exact_exponent(spec.left), exact_exponent(spec.right)
        if a is not None and b is not None:
            return max(a, b)
    return None


def poincare_partial(model, s: float, n_max: int, predicate=None, threads=None) -> float:
    table = census(model, n_max, predicate, threads)
    return float(sum(c * math.exp(-s * n) for n, c in enumerate(table.spheres("filtered"))))


# ---------------------------------------------------------------------------
# conjugacy

NECKLACE_ALPHA = -1.0


@dataclass(frozen=True)
class ConjClassKey:
    canonical: tuple
    min_length: int


def conj_key(model, g) -> ConjClassKey:
    rep, _ = model.cyclic_reduce(g)
    return ConjClassKey(model.conj_key(rep), len(rep))


def conj_length(model, g, search_radius: int = 2):
    """``(l, rep)``: minimal length in the conjugacy class of ``g`` and a minimal
    representative; cross-checked against all conjugators of length <= search_radius."""
    rep, x = model.cyclic_reduce(g)
    if model.normalize(x + g + model.inverse(x)) != rep:
        raise InvariantViolation("cyclic reduction returned a wrong conjugator", data={"g": g, "rep": rep, "x": x})
    ell = len(rep)
    for y in G.enumerate_ball(model, search_radius):
        c = model.normalize(y + g + model.inverse(y))
        if len(c) < ell:
            raise InvariantViolation(
                f"conjugator of length {len(y)} gives length {len(c)} < {ell}",
                data={"g": g, "rep": rep, "conjugator": y, "shorter": c})
    return ell, rep


def _spot_check_invariance(model, pred, reps, limit=50):
    for rep in reps[:limit]:
        v = pred(model, rep)
        for s in model.ids:
            c = model.normalize((s,) + rep + (model.inv(s),))
            if pred(model, c) != v:
                raise InvariantViolation(
                    f"predicate {pred.label!r} is not conjugation invariant",
                    data={"rep": rep, "conjugate": c})


def conj_census(model, n_max: int, predicate=None, threads=None, cap: int = G.DEFAULT_STREAM_CAP,
                use_kernel: bool = True) -> CensusTable:
    """Cumulative counts of conjugacy classes with minimal length <= n."""
    pred = resolve_predicate(predicate)
    hook = pred.kernel(model) if (use_kernel and pred.kernel) else None
    if hook is not None and model.local:
        _check_cap(model, n_max, cap)
        out = K.run_partitioned(model, n_max, K.MODE_NECKLACE, threads)
        if pred is ALL:
            tot, fil = out[0], out[0]
        elif pred is CONJUGATE_INTO_FACTOR:
            tot, fil = out[0], out[1]
        elif pred is HYPERBOLIC:
            tot, fil = out[0], out[0] - out[1]
        else:
            hook = None
        if hook is not None:
            return CensusTable.from_spheres(tot, fil, filter_label=pred.label,
                                            model_label=model.label, kind="conjugacy")
    keys = {}
    for g in G.enumerate_ball(model, n_max, cap=cap):
        rep, _ = model.cyclic_reduce(g)
        if len(rep) == len(g):
            keys.setdefault(model.conj_key(rep), g)
    reps = sorted(keys.values(), key=G.shortlex_key)
    if not pred.conjugation_invariant:
        _spot_check_invariance(model, pred, reps)
    tot = [0] * (n_max + 1)
    fil = [0] * (n_max + 1)
    for rep in reps:
        tot[len(rep)] += 1
        if pred(model, rep):
            fil[len(rep)] += 1
    return CensusTable.from_spheres(tot, fil, filter_label=pred.label, model_label=model.label, kind="conjugacy")


# ---------------------------------------------------------------------------
# genericity and tightness


@dataclass
class GenericityCurve:
    rows: list  # (n, ratio, fitted ratio)
    decay: float
    residual: float
    window: tuple
    observed: bool
    table: CensusTable
    period: int = 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "total", "filtered", "ratio", "fitted"])
        for (n, r, f), t, c in zip(self.rows, self.table.total, self.table.filtered):
            w.writerow([n, t, c, f"{r:.12g}", f"{f:.12g}"])
        return buf.getvalue()


def length_period(spheres: Sequence[int]) -> int:
    """gcd of the gaps between lengths carrying a nonzero count (1 if none)."""
    support = [n for n, c in enumerate(spheres) if n > 0 and c > 0]
    p = 0
    for a, b in zip(support, support[1:]):
        p = math.gcd(p, b - a)
    return max(p, 1)


def decay_fit(ns: Sequence[int], ratios: Sequence[float], window=None, period: int = 1):
    """Least-squares fit of log(ratio) = -decay*n + b_{n mod period}.

    A period > 1 gives each residue class its own intercept; this absorbs the
    staircase of a set supported on lengths in one residue class.
    Returns (decay, residual, window, per-n fitted log values)."""
    n_max = ns[-1]
    if window is None:
        window = (min(math.ceil(n_max / 2), n_max - 3 - (period - 1)), n_max)
    pts = [(n, r) for n, r in zip(ns, ratios) if window[0] <= n <= window[1] and r > 0]
    if len(pts) < period + 1:
        return 0.0, float("inf"), window, {}
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.log(np.array([p[1] for p in pts], dtype=float))
    cols = [x] + [(x.astype(int) % period == k).astype(float) for k in range(period)]
    A = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    rms = float(np.sqrt(np.mean((y - A @ coef) ** 2)))
    fitted = {n: float(coef[0] * n + coef[1 + n % period]) for n in ns}
    return float(-coef[0]), rms, window, fitted


def genericity_curve(model, n_max: int, predicate, threads=None, window=None,
                     threshold: float = 0.05, period=None) -> GenericityCurve:
    """Ball ratios filtered/total with an exponential-decay fit on the tail.
    ``period`` defaults to the period of the filtered set's length support."""
    table = census(model, n_max, predicate, threads)
    ratios = table.ratios()
    if period is None:
        period = length_period(table.spheres("filtered"))
    decay, rms, window, fitted = decay_fit(table.n, ratios, window, period)
    rows = [(n, r, math.exp(fitted[n]) if n in fitted else float("nan")) for n, r in zip(table.n, ratios)]
    return GenericityCurve(rows, decay, rms, window, decay > 0 and rms < threshold, table, period)


@dataclass
class TightnessGap:
    e_A: ExponentEstimate
    e_G: ExponentEstimate
    gap: float
    table: CensusTable


def tightness_gap(model, n_max: int, setA=None, threads=None, delta: int = 0,
                  conjugacy: bool = False) -> TightnessGap:
    """Exponent of a subset against the whole group (or of a class of conjugacy
    classes against all classes when ``conjugacy`` is set)."""
    if isinstance(setA, CensusTable):
        table = setA
    elif conjugacy:
        table = conj_census(model, n_max, setA, threads)
    else:
        table = census(model, n_max, setA, threads)
    corr = NECKLACE_ALPHA if conjugacy else False
    e_a = exponent(table, delta, column="filtered", poly_correction=corr)
    e_g = exponent(table, delta, column="total", poly_correction=corr)
    return TightnessGap(e_a, e_g, e_g.value - e_a.value, table)


def conjugacy_growth(model, n_max: int, predicate=None, threads=None):
    """(all classes, filtered classes) growth estimates, with class counts of
    length n rescaled by n (a class of length n has at most n cyclic words)."""
    table = conj_census(model, n_max, predicate, threads)
    return (exponent(table, 0, column="total", poly_correction=NECKLACE_ALPHA),
            exponent(table, 0, column="filtered", poly_correction=NECKLACE_ALPHA), table)
