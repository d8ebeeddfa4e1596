"""Admissible paths: decompositions, the three defining checks, fellow
travelling, quasi-geodesic constants and the extension map."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import geometry as Geo
from . import groups as G
from .errors import BudgetExceeded, MalformedDecomposition, PreconditionError, SpecError


def default_intersection_bound(r: int) -> float:
    return 2 * r + 1


@dataclass(frozen=True)
class Marked:
    start: int  # vertex index on the path
    end: int
    X: Geo.PointSet


@dataclass
class AdmissibleDecomposition:
    path: tuple  # word read from o
    marked: list  # of Marked, in order along the path
    D: float
    tau: float
    uniform: Optional[tuple] = None  # (L, Delta)
    intersection_bound: Callable[[int], float] = default_intersection_bound
    radii: tuple = (1, 2)

    def vertices(self, model):
        return G.geodesic_vertices(model, (), self.path)

    def validate(self, model):
        n = len(self.path)
        prev_end = 0
        for i, m in enumerate(self.marked):
            if not (0 <= m.start <= m.end <= n):
                raise MalformedDecomposition(f"subpath {i} range {m.start}..{m.end} outside path")
            if m.start < prev_end:
                raise MalformedDecomposition(f"subpath {i} overlaps or is out of order")
            prev_end = m.end
            sub = self.path[m.start:m.end]
            if model.length_of(sub) != len(sub):
                raise MalformedDecomposition(f"subpath {i} is not geodesic")
        verts = self.vertices(model)
        for i, m in enumerate(self.marked):
            if verts[m.start] not in m.X or verts[m.end] not in m.X:
                raise MalformedDecomposition(f"subpath {i} endpoints are not in X_{i}")
        return verts

    def to_dict(self, model):
        return {"path": G.fmt(model, self.path), "D": self.D, "tau": self.tau,
                "uniform": list(self.uniform) if self.uniform else None,
                "marked": [{"range": [m.start, m.end], "label": m.X.label,
                            "points": [G.fmt(model, p) for p in m.X.sorted()]} for m in self.marked]}

    def to_json(self, model) -> str:
        return json.dumps(self.to_dict(model), sort_keys=True)

    @classmethod
    def from_dict(cls, model, d):
        marked = [Marked(m["range"][0], m["range"][1],
                         Geo.point_set(model, [G.parse(model, p) for p in m["points"]], m.get("label", "")))
                  for m in d["marked"]]
        uni = tuple(d["uniform"]) if d.get("uniform") else None
        return cls(G.parse(model, d["path"]), marked, d["D"], d["tau"], uni)


@dataclass
class AdmissibilityReport:
    ll1: list  # bool per marked subpath (True when exempt)
    bp: list  # (d^pi before, d^pi after) per marked subpath
    ll2: list  # per consecutive pair: "bounded_intersection" | "gap" | "fail"
    verdict: bool
    flags: list = field(default_factory=list)
    intersections: list = field(default_factory=list)

    def __bool__(self):
        return self.verdict


def _dpi(pr: Geo.Projector, a, b) -> int:
    return pr.diam(pr.info(a)[1] | pr.info(b)[1])[0]


def check_admissible(model, dec: AdmissibleDecomposition) -> AdmissibilityReport:
    verts = dec.validate(model)
    n = len(dec.path)
    k = len(dec.marked)
    if k == 0:
        return AdmissibilityReport([], [], [], True, ["no contracting subsets"])
    ll1 = [(m.end - m.start) > dec.D or m.start == 0 or m.end == n for m in dec.marked]
    bp = []
    for i, m in enumerate(dec.marked):
        pr = Geo.Projector(model, m.X)
        before = verts[dec.marked[i - 1].end] if i > 0 else verts[0]
        after = verts[dec.marked[i + 1].start] if i + 1 < k else verts[n]
        bp.append((_dpi(pr, before, verts[m.start]), _dpi(pr, verts[m.end], after)))
    ll2, inter = [], []
    for i in range(k - 1):
        a, b = dec.marked[i], dec.marked[i + 1]
        diams = {}
        for r in dec.radii:
            common = Geo.neighborhood(model, a.X, r) & Geo.neighborhood(model, b.X, r)
            diams[r] = Geo.set_diameter(model, common) if common else -1
        inter.append(diams)
        if all(diams[r] <= dec.intersection_bound(r) for r in dec.radii):
            ll2.append("bounded_intersection")
        elif model.dist(verts[a.end], verts[b.start]) > dec.D:
            ll2.append("gap")
        else:
            ll2.append("fail")
    ok = all(ll1) and all(x <= dec.tau and y <= dec.tau for x, y in bp) and "fail" not in ll2
    return AdmissibilityReport(ll1, bp, ll2, ok, [], inter)


def check_uniform(model, dec: AdmissibleDecomposition) -> bool:
    """|d((p_{i+1})_-, (p_i)_+) - L| <= Delta for every consecutive pair."""
    if dec.uniform is None:
        raise SpecError("uniform parameters (L, Delta) are missing")
    L, delta = dec.uniform
    verts = dec.validate(model)
    for a, b in zip(dec.marked, dec.marked[1:]):
        if abs(model.dist(verts[b.start], verts[a.end]) - L) > delta:
            return False
    return True


def fellow_travel_offset(model, geodesic, dec: AdmissibleDecomposition) -> int:
    """Least eps admitting linearly ordered z_0 <= w_0 <= z_1 <= ... on the
    geodesic with z_i, w_i within eps of (p_i)_-, (p_i)_+."""
    verts = dec.validate(model)
    geodesic = tuple(geodesic)
    if model.normalize(geodesic) != verts[-1]:
        raise PreconditionError("geodesic and path have different endpoints")
    alpha = G.geodesic_vertices(model, (), geodesic)
    targets = [verts[p] for m in dec.marked for p in (m.start, m.end)]
    if not targets:
        return 0
    best = None  # best[j]: least max-offset with the current target placed at index <= j
    for t in targets:
        row = [model.dist(v, t) for v in alpha]
        cur = []
        run = math.inf
        for j, dj in enumerate(row):
            prev = 0 if best is None else best[j]
            run = min(run, max(prev, dj))
            cur.append(run)
        best = cur
    return int(best[-1])


def quasi_geodesic_constant(model, path) -> float:
    """Smallest c on the 0.25 grid, c >= 1, with len(b) <= c d(b_-, b_+) + c for
    every contiguous subword b."""
    verts = G.geodesic_vertices(model, (), tuple(path))
    worst = 1.0
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            worst = max(worst, (j - i) / (model.dist(verts[i], verts[j]) + 1))
    return math.ceil(worst * 4 - 1e-12) / 4


def geodesics_meet(model, dec: AdmissibleDecomposition, C: float, cap=G.DEFAULT_GEODESIC_CAP) -> bool:
    """Every geodesic between the path endpoints meets N_C(X_i) for each i."""
    verts = dec.validate(model)
    geo = G.geodesics_between(model, (), verts[-1], cap)
    if geo.truncated:
        raise BudgetExceeded("too many geodesics between endpoints", partial=len(geo.words))
    projs = [Geo.Projector(model, m.X) for m in dec.marked]
    for w in geo.words:
        vs = G.geodesic_vertices(model, (), w)
        for pr in projs:
            if min(pr.info(v)[0] for v in vs) > C:
                return False
    return True


def saturation(model, dec: AdmissibleDecomposition) -> Geo.PointSet:
    """Union of the X_i together with the path vertices outside every p_i."""
    verts = dec.validate(model)
    inside = set()
    pts = set()
    for m in dec.marked:
        inside.update(range(m.start + 1, m.end))
        pts |= m.X.points
    pts.update(v for i, v in enumerate(verts) if i not in inside)
    return Geo.PointSet(frozenset(pts), "sat")


def saturation_contraction(model, dec: AdmissibleDecomposition, budget: Geo.Budget) -> Geo.ContractionVerdict:
    if not check_admissible(model, dec).verdict or (dec.uniform is not None and not check_uniform(model, dec)):
        raise PreconditionError("precondition: decomposition is not admissible")
    X = saturation(model, dec)
    est = Geo.estimate_contraction_constant(model, X, budget)
    key = est.value if est.value in est.verdicts else max(est.verdicts)
    v = est.verdicts[key]
    v.geodesic_budget["estimate"] = est.value
    return v


# ---------------------------------------------------------------------------
# extension map


class NoneFound(Exception):
    pass


def _extension_dec(model, g, f, h, axis: Geo.AxisSegment, D, tau):
    path = tuple(g) + tuple(f) + tuple(h)
    X = axis.base.translate(model, g)
    return AdmissibleDecomposition(path, [Marked(len(g), len(g) + len(f), X)], D, tau)


def extension_concat(model, g, h, F, D, tau):
    """First f in F (ShortLex) such that the path g.f.h with the f-leg marked on
    g Ax(f) is (D, tau)-admissible.  ``F`` maps elements to AxisSegments (or is
    a list of AxisSegments)."""
    axes = F if isinstance(F, dict) else {a.generator: a for a in F}
    g, h = model.normalize(g), model.normalize(h)
    for f in sorted(axes, key=G.shortlex_key):
        dec = _extension_dec(model, g, f, h, axes[f], D, tau)
        if check_admissible(model, dec).verdict:
            return f, dec
    raise NoneFound(f"no f in F extends ({G.fmt(model, g)}, {G.fmt(model, h)}) at D={D}, tau={tau}")


@dataclass
class InjectivityResult:
    passed: bool
    collision: Optional[tuple]  # (word1, word2) as tuples of indices into B
    images: int
    missing: Optional[tuple] = None  # consecutive pair with no extension

    def __bool__(self):
        return self.passed


def extension_map(model, B, W, chosen):
    out = ()
    for i, k in enumerate(W):
        out = model.mul(out, B[k])
        if i + 1 < len(W):
            out = model.mul(out, chosen[(k, W[i + 1])])
    return out


def extension_injectivity_probe(model, B, F, D, tau, word_len: int, cap: int = 10**6) -> InjectivityResult:
    B = [model.normalize(b) for b in B]
    if len(set(B)) != len(B):
        raise SpecError("B must not contain duplicate letters")
    if sum(len(B) ** k for k in range(word_len + 1)) > cap:
        raise BudgetExceeded(f"|B|^{word_len} exceeds the word budget {cap}")
    chosen = {}
    for i, j in itertools.product(range(len(B)), repeat=2):
        try:
            chosen[(i, j)] = extension_concat(model, B[i], B[j], F, D, tau)[0]
        except NoneFound:
            if word_len >= 2:
                return InjectivityResult(False, None, 0, (i, j))
    seen = {}
    collision = None
    count = 0
    for n in range(word_len + 1):
        for W in itertools.product(range(len(B)), repeat=n):
            count += 1
            img = extension_map(model, B, W, chosen)
            if img in seen:
                pair = (seen[img], W)
                if collision is None or pair < collision:
                    collision = pair
            else:
                seen[img] = W
    return InjectivityResult(collision is None, collision, count)
