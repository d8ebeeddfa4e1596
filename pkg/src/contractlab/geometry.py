"""Nearest-point projections and contraction tests on finite point sets."""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from . import groups as G
from .errors import BudgetExceeded, PreconditionError, SpecError

INF = math.inf
GRID_STEP = 0.5


@dataclass(frozen=True)
class PointSet:
    points: frozenset
    label: str = ""

    def __post_init__(self):
        if not self.points:
            raise SpecError("a point set must be nonempty")
        object.__setattr__(self, "points", frozenset(self.points))

    def __contains__(self, g):
        return g in self.points

    def __len__(self):
        return len(self.points)

    def sorted(self):
        return sorted(self.points, key=G.shortlex_key)

    def translate(self, model, g, label=None):
        return PointSet(frozenset(model.normalize(g + x) for x in self.points),
                        label if label is not None else f"{G.fmt(model, g)}·{self.label}")

    def union(self, other, label=None):
        return PointSet(self.points | other.points, label or f"{self.label}∪{other.label}")


def point_set(model, words, label=""):
    return PointSet(frozenset(model.normalize(w) for w in words), label)


def dist(model, g, h) -> int:
    return model.dist(g, h)


class Projector:
    """Caches d(v, X) and the projection of v onto X (as a bitmask over X)."""

    def __init__(self, model, X: PointSet):
        self.model = model
        self.X = X
        self.pts = X.sorted()
        self._cache = {}
        self._diam = {}
        n = len(self.pts)
        self.pd = [[dist(model, p, q) for q in self.pts] for p in self.pts]
        self.n = n

    def info(self, v):
        """(d(v, X), projection bitmask)."""
        r = self._cache.get(v)
        if r is None:
            dist_ = self.model.dist
            best, mask = None, 0
            for i, p in enumerate(self.pts):
                d = dist_(v, p)
                if best is None or d < best:
                    best, mask = d, 1 << i
                elif d == best:
                    mask |= 1 << i
            r = (best, mask)
            self._cache[v] = r
        return r

    def prefetch(self, vs):
        """Fill the cache for many vertices at once when the model has a
        compiled distance routine."""
        batch = getattr(self.model, "batch_dist", None)
        todo = [v for v in dict.fromkeys(vs) if v not in self._cache]
        if batch is None or len(todo) < 64:
            for v in todo:
                self.info(v)
            return
        D = batch(todo, self.pts)
        mins = D.min(axis=1)
        eq = D == mins[:, None]
        for v, d, row in zip(todo, mins.tolist(), eq.tolist()):
            mask = 0
            for i, hit in enumerate(row):
                if hit:
                    mask |= 1 << i
            self._cache[v] = (d, mask)

    def members(self, mask):
        return [self.pts[i] for i in range(self.n) if mask >> i & 1]

    def diam(self, mask):
        r = self._diam.get(mask)
        if r is None:
            idx = [i for i in range(self.n) if mask >> i & 1]
            r = (0, None)
            for i, j in itertools.combinations(idx, 2):
                if self.pd[i][j] > r[0]:
                    r = (self.pd[i][j], (i, j))
            self._diam[mask] = r
        return r

    def far_pair(self, mask):
        d, pair = self.diam(mask)
        if pair is None:
            p = self.members(mask)[0]
            return (p, p)
        return (self.pts[pair[0]], self.pts[pair[1]])


def project(model, y, X: PointSet) -> PointSet:
    pr = Projector(model, X)
    _, mask = pr.info(y)
    return PointSet(frozenset(pr.members(mask)), f"π({G.fmt(model, y)})")


def proj_diameter(model, X: PointSet, Z1: PointSet, Z2: PointSet) -> int:
    pr = Projector(model, X)
    mask = 0
    for z in itertools.chain(Z1.points, Z2.points):
        mask |= pr.info(z)[1]
    return pr.diam(mask)[0]


# ---------------------------------------------------------------------------
# contraction


@dataclass(frozen=True)
class Budget:
    """Which geodesics a contraction test examines.

    ``exhaustive``: every geodesic whose endpoints lie in N(o, radius).
    ``sampled``: geodesics between ``samples`` random endpoint pairs of that
    ball (seeded), each capped at ``geodesic_cap`` words.
    """

    radius: int
    mode: str = "exhaustive"
    samples: int = 1000
    seed: int = 0
    geodesic_cap: int = G.DEFAULT_GEODESIC_CAP
    pair_cap: int = 10**8

    def __post_init__(self):
        if self.mode not in ("exhaustive", "sampled"):
            raise SpecError(f"unknown budget mode {self.mode!r}")
        if self.radius < 0:
            raise SpecError("budget radius must be >= 0")


@dataclass
class Witness:
    start: tuple
    word: tuple
    distance: int  # d(gamma, X)
    pair: tuple  # two points of pi_X(gamma) realizing the diameter
    diameter: int

    def to_dict(self, model):
        return {"start": G.fmt(model, self.start), "word": G.fmt(model, self.word),
                "distance": self.distance, "pair": [G.fmt(model, p) for p in self.pair],
                "diameter": self.diameter}


@dataclass
class ContractionVerdict:
    constant_tested: float
    result: str  # pass | fail
    witness: Optional[Witness]
    geodesic_budget: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.result == "pass"

    def __bool__(self):
        return self.passed

    def to_json(self, model) -> str:
        return json.dumps({"constant_tested": self.constant_tested, "result": self.result,
                           "witness": self.witness.to_dict(model) if self.witness else None,
                           "geodesic_budget": self.geodesic_budget}, sort_keys=True)


def replay_witness(model, X: PointSet, w: Witness):
    """Recompute (d(gamma, X), d^pi_X(gamma)) from the witness word alone."""
    pr = Projector(model, X)
    verts = G.geodesic_vertices(model, w.start, w.word)
    if dist(model, w.start, verts[-1]) != len(w.word):
        raise PreconditionError("witness word is not geodesic")
    delta = min(pr.info(v)[0] for v in verts)
    mask = 0
    for v in verts:
        mask |= pr.info(v)[1]
    return delta, pr.diam(mask)[0]


def cached_ball(model, r, cap=G.DEFAULT_RETAIN_CAP):
    """N(o, r) in ShortLex order, memoized on the model."""
    store = model.__dict__.setdefault("_ball_cache", {})
    if r not in store:
        store[r] = G.ball(model, r, cap=cap)
    return store[r]


class _PredCache:
    """Geodesic predecessors in the Cayley graph: p = u s^-1 with |p| = |u| - 1."""

    limit = 1 << 20

    def __init__(self, model):
        self.model = model
        self._preds = {}

    @classmethod
    def of(cls, model):
        """One cache per model, shared by every test on it."""
        cache = getattr(model, "_pred_cache", None)
        if cache is None:
            cache = cls(model)
            model._pred_cache = cache
        return cache

    def preds(self, u):
        r = self._preds.get(u)
        if r is None:
            m = self.model
            r = []
            for s in m.ids:
                step = (m.inv(s),)
                if m.length_of(u + step) == len(u) - 1:
                    r.append((m.mul(u, step), s))
            if len(self._preds) > self.limit:
                self._preds.clear()
            self._preds[u] = r
        return r


def _exhaustive_states(model, pr: Projector, ends, x, C, preds):
    """Geodesics from x to the points ``ends`` that stay at distance >= C from X.

    Returns ``{u: {(delta, mask): (word, count)}}`` for the targets ``u = x^-1 y``
    where the geodesic states are merged by (delta, mask); ``word`` is the
    lex-least geodesic word realising the state."""
    m = model
    d0, m0 = pr.info(x)
    if d0 < C:
        return {}, {}
    xi = m.inverse(x)
    targets = {}
    for y in ends:
        targets[m.mul(xi, y)] = y
    layers = {}
    for u in targets:
        layers.setdefault(len(u), set()).add(u)
    top = max(layers)
    edges = {}
    for L in range(top, 0, -1):
        for u in layers.get(L, ()):
            ps = preds.preds(u)
            edges[u] = ps
            for p, _ in ps:
                layers.setdefault(L - 1, set()).add(p)
    states = {(): {(d0, m0): ((), 1)}}
    order = [(u, m.mul(x, u)) for L in range(1, top + 1) for u in sorted(layers.get(L, ()))]
    pr.prefetch([v for _, v in order])
    for u, v in order:
        if True:
            dv, mv = pr.info(v)
            if dv < C:
                continue
            acc = {}
            for p, s in edges[u]:
                for (d, mk), (word, cnt) in states.get(p, {}).items():
                    key = (min(d, dv), mk | mv)
                    w = word + (s,)
                    old = acc.get(key)
                    if old is None:
                        acc[key] = (w, cnt)
                    else:
                        acc[key] = (min(old[0], w), old[1] + cnt)
            if acc:
                states[u] = acc
    return states, targets


class _UniqueAtlas:
    """All geodesics between points of N(o, r) in a model with unique geodesics,
    stored as a prefix forest: one node per (start x, prefix of x^-1 y)."""

    max_pairs = 4 * 10**6

    def __init__(self, model, ball):
        parent, vertex, depth = [], [], []
        vindex, vlist = {}, []
        t_node, t_start, t_word = [], [], []

        def vid(v):
            i = vindex.get(v)
            if i is None:
                i = vindex[v] = len(vlist)
                vlist.append(v)
            return i

        for xi, x in enumerate(ball):
            xinv = model.inverse(x)
            us = sorted((model.mul(xinv, y) for y in ball), key=G.shortlex_key)
            local = {(): len(parent)}
            parent.append(-1)
            vertex.append(vid(x))
            depth.append(0)
            for u in us:
                for k in range(1, len(u) + 1):
                    pref = u[:k]
                    if pref not in local:
                        local[pref] = len(parent)
                        parent.append(local[u[:k - 1]])
                        vertex.append(vid(model.mul(x, pref)))
                        depth.append(k)
                t_node.append(local[u])
                t_start.append(xi)
                t_word.append(u)
        self.ball = ball
        self.parent = np.array(parent, dtype=np.int64)
        self.vertex = np.array(vertex, dtype=np.int64)
        self.depth = np.array(depth, dtype=np.int64)
        self.vertices = vlist
        self.t_node = np.array(t_node, dtype=np.int64)
        self.t_start = t_start
        self.t_word = t_word
        order = np.argsort(self.depth, kind="stable")
        self.levels = [order[self.depth[order] == d] for d in range(1, int(self.depth.max()) + 1)]

    @classmethod
    def of(cls, model, r, ball):
        store = model.__dict__.setdefault("_atlas_cache", {})
        if r not in store:
            store[r] = cls(model, ball)
        return store[r]

    def evaluate(self, pr: Projector):
        """Per-target (d(gamma, X), d^pi_X(gamma), projection mask).  Masks are
        split into 64-bit words so any |X| works."""
        pr.prefetch(self.vertices)
        infos = [pr.info(v) for v in self.vertices]
        nw = max(1, (pr.n + 63) // 64)
        full = (1 << 64) - 1
        dv = np.array([i[0] for i in infos], dtype=np.int64)
        mv = np.array([[(i[1] >> (64 * k)) & full for k in range(nw)] for i in infos], dtype=np.uint64)
        delta = dv[self.vertex]
        mask = mv[self.vertex]
        for idx in self.levels:
            par = self.parent[idx]
            delta[idx] = np.minimum(delta[idx], delta[par])
            mask[idx] |= mask[par]
        td = delta[self.t_node]
        tm = mask[self.t_node]
        if nw == 1:
            uniq, inv = np.unique(tm[:, 0], return_inverse=True)
            ints = [int(m) for m in uniq]
        else:
            view = np.ascontiguousarray(tm).view(np.dtype((np.void, 8 * nw))).ravel()
            _, first, inv = np.unique(view, return_index=True, return_inverse=True)
            ints = [sum(int(w) << (64 * k) for k, w in enumerate(tm[i])) for i in first]
        diams = np.array([pr.diam(m)[0] for m in ints], dtype=np.int64)
        inv = inv.ravel()
        return td, diams[inv], lambda i: ints[inv[i]]


def _use_atlas(model, pr, ball):
    return (getattr(model, "unique_geodesics", False)
            and len(ball) ** 2 <= _UniqueAtlas.max_pairs)


def _fails(C, delta, diam):
    return C <= delta and C < diam


def contraction_verdict(model, X: PointSet, C: float, budget: Budget) -> ContractionVerdict:
    """Test "d(gamma, X) >= C implies d^pi_X(gamma) <= C" on the budgeted geodesics.

    Geodesics with a vertex closer than C to X cannot violate the implication
    and are skipped.  Exhaustive order: start point in ShortLex, then endpoint
    offset x^-1 y in ShortLex, then word.
    The first violation is returned as a replayable witness."""
    pr = Projector(model, X)
    ball = cached_ball(model, budget.radius, cap=budget.pair_cap)
    meta = {"source": budget.mode, "radius": budget.radius, "ball_size": len(ball)}
    examined = 0
    if budget.mode == "sampled":
        rng = random.Random(budget.seed)
        truncated = False
        for _ in range(budget.samples):
            x, y = rng.choice(ball), rng.choice(ball)
            geo = G.geodesics_between(model, x, y, budget.geodesic_cap)
            truncated |= geo.truncated
            for w in geo.words:
                examined += 1
                verts = G.geodesic_vertices(model, x, w)
                delta = min(pr.info(v)[0] for v in verts)
                mask = 0
                for v in verts:
                    mask |= pr.info(v)[1]
                diam = pr.diam(mask)[0]
                if _fails(C, delta, diam):
                    meta.update(geodesics_examined=examined, truncated=truncated, seed=budget.seed)
                    return ContractionVerdict(C, "fail", Witness(x, w, delta, pr.far_pair(mask), diam), meta)
        meta.update(geodesics_examined=examined, truncated=truncated, seed=budget.seed)
        return ContractionVerdict(C, "pass", None, meta)

    if _use_atlas(model, pr, ball):
        atlas = _UniqueAtlas.of(model, budget.radius, ball)
        td, tdiam, tmask = atlas.evaluate(pr)
        cand = td >= C
        bad = np.flatnonzero(cand & (tdiam > C))
        stop = len(td) if not len(bad) else int(bad[0]) + 1
        meta.update(geodesics_examined=int(cand[:stop].sum()), truncated=False)
        if not len(bad):
            return ContractionVerdict(C, "pass", None, meta)
        i = int(bad[0])
        w = Witness(atlas.ball[atlas.t_start[i]], atlas.t_word[i], int(td[i]),
                    pr.far_pair(tmask(i)), int(tdiam[i]))
        return ContractionVerdict(C, "fail", w, meta)

    preds = _PredCache.of(model)
    pr.prefetch(ball)
    ends = [y for y in ball if pr.info(y)[0] >= C]
    pairs = 0
    for x in ends:
        pairs += len(ends)
        if pairs > budget.pair_cap:
            raise BudgetExceeded(f"more than {budget.pair_cap} endpoint pairs", partial=examined)
        states, targets = _exhaustive_states(model, pr, ends, x, C, preds)
        for u in sorted(targets, key=G.shortlex_key):
            for (delta, mask), (word, cnt) in sorted(states.get(u, {}).items(), key=lambda kv: kv[1][0]):
                diam = pr.diam(mask)[0]
                if _fails(C, delta, diam):
                    examined += cnt
                    meta.update(geodesics_examined=examined, truncated=False)
                    return ContractionVerdict(C, "fail", Witness(x, word, delta, pr.far_pair(mask), diam), meta)
                examined += cnt
    meta.update(geodesics_examined=examined, truncated=False)
    return ContractionVerdict(C, "pass", None, meta)


def contraction_grid(budget: Budget):
    return [GRID_STEP * k for k in range(1, int(round(budget.radius / GRID_STEP)) + 1)]


@dataclass
class ContractionEstimate:
    value: float  # smallest passing grid constant, or inf
    verdicts: dict  # constant -> verdict for every grid value tested

    def __float__(self):
        return float(self.value)


def estimate_contraction_constant(model, X: PointSet, budget: Budget) -> ContractionEstimate:
    """Smallest C on the grid {0.5, 1, ..., r} passing ``contraction_verdict``.

    A geodesic violating C also violates every smaller positive C, so passing is
    monotone in C and a binary search over the grid is exact."""
    grid = contraction_grid(budget)
    verdicts = {}

    def test(i):
        if grid[i] not in verdicts:
            verdicts[grid[i]] = contraction_verdict(model, X, grid[i], budget)
        return verdicts[grid[i]].passed

    if not grid or not test(len(grid) - 1):
        return ContractionEstimate(INF, verdicts)
    lo, hi = -1, len(grid) - 1  # grid[hi] passes; grid[lo] fails (lo=-1 virtual)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if test(mid):
            hi = mid
        else:
            lo = mid
    return ContractionEstimate(grid[hi], verdicts)


# ---------------------------------------------------------------------------
# orbits and axes


class QIEFit(NamedTuple):
    lower_slope: Fraction
    upper_slope: Fraction
    additive: int
    flagged: bool
    distances: tuple


def orbit_distances(model, h, n_max):
    out = []
    g = ()
    for _ in range(n_max + 1):
        out.append(len(g))
        g = model.normalize(g + h)
    return out


def qie_check(model, h, n_max: int) -> QIEFit:
    """Fit lambda|n| - c <= d(o, h^n o) <= Lambda|n| + c for |n| <= n_max.

    The slope is the tail secant (d_N - d_{N-k})/k, k = ceil(N/2), and c is the
    smallest integer making both bounds hold; d(o, h^-n o) = d(o, h^n o)."""
    if not h:
        raise PreconditionError("qie_check needs a nontrivial element")
    n_max = max(n_max, 2)
    d = orbit_distances(model, h, n_max)
    k = math.ceil(n_max / 2)
    s = Fraction(d[n_max] - d[n_max - k], k)
    c = max(abs(Fraction(dn) - s * n) for n, dn in enumerate(d))
    c = math.ceil(c)
    flagged = s <= 0 or any(dn == 0 for dn in d[1:])
    return QIEFit(s, s, c, flagged, tuple(d))


@dataclass(frozen=True)
class AxisSegment:
    base: PointSet
    generator: tuple
    extent: int
    elementary_extras: tuple = ()

    @property
    def points(self):
        return self.base.points


def build_axis(model, h, extent: int, extras=None) -> AxisSegment:
    """Truncated axis {f h^n : f in {1} + extras, |n| <= extent}."""
    h = model.normalize(h)
    if not h:
        raise PreconditionError("the identity has no axis")
    fit = qie_check(model, h, max(extent, 4))
    if fit.flagged:
        raise PreconditionError(f"{G.fmt(model, h)} has torsion or a bounded orbit")
    extras = tuple(model.normalize(f) for f in (extras or ()))
    pts = set()
    hi = model.inverse(h)
    for f in ((),) + extras:
        g = f
        gi = f
        pts.add(f)
        for _ in range(extent):
            g = model.normalize(g + h)
            gi = model.normalize(gi + hi)
            pts.add(g)
            pts.add(gi)
    label = f"Ax({G.fmt(model, h)})[{extent}]"
    return AxisSegment(PointSet(frozenset(pts), label), h, extent, extras)


def axis_for_radius(model, h, radius: int, extras=None) -> AxisSegment:
    """Axis long enough that every projection from N(o, radius) sees it whole:
    such projections lie in N(o, 2 radius) since o is on the axis."""
    d = orbit_distances(model, model.normalize(h), 4 * radius + 4)
    extent = next((n for n, dn in enumerate(d) if dn > 2 * radius + len(h)), len(d) - 1)
    return build_axis(model, h, max(extent, 1), extras)


def root_extras(model, h):
    """Coset representatives of <h> in <root(h)> (root found by word period)."""
    r = G.elementary_root(model, h)
    out = []
    g = r
    while g != model.normalize(h) and len(out) < len(h) + 1:
        out.append(g)
        g = model.normalize(g + r)
    return tuple(out) if g == model.normalize(h) else ()


# ---------------------------------------------------------------------------
# families


def neighborhood(model, X: PointSet, r: int) -> set:
    ball = G.ball(model, r)
    return {model.normalize(x + b) for x in X.points for b in ball}


def set_diameter(model, S) -> int:
    S = list(S)
    best = 0
    for i in range(len(S)):
        gi = model.inverse(S[i])
        for j in range(i + 1, len(S)):
            best = max(best, len(model.normalize(gi + S[j])))
    return best


@dataclass
class BoundedProjectionResult:
    passed: bool
    values: dict  # (i, j) -> d^pi_{X_j}(X_i)
    witness: Optional[tuple]  # (i, j, value) of the worst violation
    intersections: dict  # r -> {(i, j): diam(N_r(X_i) ∩ N_r(X_j))}

    def __bool__(self):
        return self.passed


def bounded_projection_check(model, family, B: float, radii=(1, 2)) -> BoundedProjectionResult:
    """Check d^pi_{X'}(X) <= B for every ordered pair of distinct members."""
    if len(set(X.points for X in family)) != len(family):
        raise PreconditionError("pairwise distinct required")
    projs = [Projector(model, X) for X in family]
    values = {}
    worst = None
    for j, pj in enumerate(projs):
        for i, X in enumerate(family):
            if i == j:
                continue
            mask = 0
            for x in X.points:
                mask |= pj.info(x)[1]
            v = pj.diam(mask)[0]
            values[(i, j)] = v
            if v > B and (worst is None or v > worst[2]):
                worst = (i, j, v)
    inter = {}
    for r in radii:
        nbhd = [neighborhood(model, X, r) for X in family]
        inter[r] = {}
        for i, j in itertools.combinations(range(len(family)), 2):
            common = nbhd[i] & nbhd[j]
            inter[r][(i, j)] = set_diameter(model, common) if common else -1
    return BoundedProjectionResult(worst is None, values, worst, inter)
