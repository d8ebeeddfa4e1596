"""Projection complexes and quasi-trees of spaces over finite families of
point sets, with a bottleneck certificate and the standard-path check."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from . import geometry as Geo
from . import groups as G
from .errors import BudgetExceeded, PreconditionError, SpecError


class ProjectionFamily:
    """Finite family of pairwise distinct point sets with the table
    ``dpi[(w, y, z)] = d^pi_{X_w}(X_y, X_z)`` for distinct w, y, z."""

    def __init__(self, model, members):
        members = list(members)
        if len({X.points for X in members}) != len(members):
            raise PreconditionError("pairwise distinct required")
        self.model = model
        self.members = members
        self.projectors = [Geo.Projector(model, X) for X in members]
        self._member_masks = {}
        self.dpi = {}
        k = len(members)
        for w in range(k):
            for y, z in itertools.combinations([i for i in range(k) if i != w], 2):
                v = self.projectors[w].diam(self._mask(w, y) | self._mask(w, z))[0]
                self.dpi[(w, y, z)] = self.dpi[(w, z, y)] = v

    def __len__(self):
        return len(self.members)

    def _mask(self, w, y):
        key = (w, y)
        if key not in self._member_masks:
            pr = self.projectors[w]
            m = 0
            for p in self.members[y].points:
                m |= pr.info(p)[1]
            self._member_masks[key] = m
        return self._member_masks[key]

    def projection(self, w, y):
        """pi_{X_w}(X_y) as a list of points of X_w."""
        return self.projectors[w].members(self._mask(w, y))

    def point_dpi(self, w, a, b) -> int:
        pr = self.projectors[w]
        return pr.diam(pr.info(a)[1] | pr.info(b)[1])[0]

    def point_projection(self, w, a):
        pr = self.projectors[w]
        return pr.members(pr.info(a)[1])


def interval_set(family: ProjectionFamily, Y: int, Z: int, K: float) -> list:
    if Y == Z:
        raise SpecError("interval set needs Y != Z")
    return [w for w in range(len(family)) if w not in (Y, Z) and family.dpi[(w, Y, Z)] > K]


@dataclass
class MetricGraph:
    vertices: list
    edges: dict  # (i, j) with i < j -> positive weight
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self._dist = None
        for (i, j), w in self.edges.items():
            if i >= j or w <= 0:
                raise SpecError("edges must be stored as (i<j) with positive weight")

    @property
    def n(self):
        return len(self.vertices)

    def matrix(self):
        rows, cols, data = [], [], []
        for (i, j), w in self.edges.items():
            rows += [i, j]
            cols += [j, i]
            data += [w, w]
        return csr_matrix((data, (rows, cols)), shape=(self.n, self.n), dtype=float)

    def distances(self) -> np.ndarray:
        if self._dist is None:
            self._dist = shortest_path(self.matrix(), method="D", directed=False)
        return self._dist

    def d(self, u, v) -> float:
        return float(self.distances()[self.index[u], self.index[v]])

    def is_connected(self) -> bool:
        return self.n <= 1 or connected_components(self.matrix(), directed=False)[0] == 1

    def neighbors(self):
        adj = [[] for _ in range(self.n)]
        for (i, j), w in self.edges.items():
            adj[i].append((j, w))
            adj[j].append((i, w))
        return adj

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["u", "v", "weight"])
        for (i, j), w in sorted(self.edges.items()):
            wr.writerow([self._name(i), self._name(j), w])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"vertices": [self._name(i) for i in range(self.n)],
                           "edges": [[self._name(i), self._name(j), w] for (i, j), w in sorted(self.edges.items())],
                           "labels": {str(k): v for k, v in self.labels.items()}}, sort_keys=True)

    def _name(self, i):
        v = self.vertices[i]
        return self.labels.get(v, str(v))


def build_projection_complex(family: ProjectionFamily, K: float) -> MetricGraph:
    k = len(family)
    edges = {(y, z): 1 for y, z in itertools.combinations(range(k), 2) if not interval_set(family, y, z, K)}
    labels = {i: X.label or f"X{i}" for i, X in enumerate(family.members)}
    return MetricGraph(list(range(k)), edges, labels)


def _induced_connected(model, pts) -> bool:
    pts = list(pts)
    idx = {p: i for i, p in enumerate(pts)}
    seen = {0}
    todo = [0]
    while todo:
        i = todo.pop()
        for s in model.ids:
            q = model.mul(pts[i], (s,))
            j = idx.get(q)
            if j is not None and j not in seen:
                seen.add(j)
                todo.append(j)
    return len(seen) == len(pts)


def thicken(model, X: Geo.PointSet) -> Geo.PointSet:
    """X itself when it spans a connected subgraph, else its 1-neighborhood."""
    if _induced_connected(model, X.points):
        return X
    Y = Geo.PointSet(frozenset(Geo.neighborhood(model, X, 1)), f"N1({X.label})")
    if not _induced_connected(model, Y.points):
        raise PreconditionError(f"member {X.label} is disconnected after thickening")
    return Y


def build_quasi_tree_of_spaces(family: ProjectionFamily, K: float, N: float) -> MetricGraph:
    """Members (thickened to connected subgraphs) joined by length-N edges
    between pi_Y(Z) and pi_Z(Y) whenever X_K(Y, Z) is empty.  Vertices are
    (member index, group element)."""
    model = family.model
    spaces = [thicken(model, X) for X in family.members]
    verts = [(i, p) for i, X in enumerate(spaces) for p in X.sorted()]
    index = {v: n for n, v in enumerate(verts)}
    edges = {}
    for i, X in enumerate(spaces):
        for p in X.points:
            for s in model.ids:
                q = model.mul(p, (s,))
                if q in X.points:
                    a, b = sorted((index[(i, p)], index[(i, q)]))
                    edges[(a, b)] = 1
    fam = family if all(S is X for S, X in zip(spaces, family.members)) else ProjectionFamily(model, spaces)
    for y, z in itertools.combinations(range(len(spaces)), 2):
        if interval_set(family, y, z, K):
            continue
        for p in fam.projection(y, z):
            for q in fam.projection(z, y):
                a, b = sorted((index[(y, p)], index[(z, q)]))
                edges[(a, b)] = N
    labels = {v: f"{v[0]}:{G.fmt(model, v[1]) or '1'}" for v in verts}
    g = MetricGraph(verts, edges, labels)
    g.spaces = spaces
    return g


def member_distortion(qts: MetricGraph, model, i: int) -> float:
    """max |d_C(u, v) - d_{X_i}(u, v)| over pairs of member i, where d_{X_i} is
    the graph metric of the member's induced subgraph."""
    X = qts.spaces[i]
    pts = X.sorted()
    sub = MetricGraph(pts, {tuple(sorted((a, b))): 1 for a, p in enumerate(pts) for b, q in enumerate(pts)
                            if a < b and model.dist(p, q) == 1})
    inner = sub.distances()
    D = qts.distances()
    ids = [qts.index[(i, p)] for p in pts]
    return float(np.max(np.abs(D[np.ix_(ids, ids)] - inner))) if pts else 0.0


@dataclass
class BottleneckResult:
    passed: bool
    witness: Optional[tuple]  # (x, y, m, avoiding path) for the worst failing pair
    pairs: int

    def __bool__(self):
        return self.passed


def bottleneck_certify(graph: MetricGraph, delta: float, pair_cap: int = 10**7) -> BottleneckResult:
    """For every pair x, y pick a midpoint m on a geodesic (closest to half way,
    first by index) and check that removing B(m, delta) separates x from y."""
    n = graph.n
    if n * (n - 1) // 2 > pair_cap:
        raise BudgetExceeded(f"{n} vertices exceed the pair budget")
    D = graph.distances()
    adj = graph.neighbors()
    worst = None
    pairs = 0
    for x, y in itertools.combinations(range(n), 2):
        pairs += 1
        d = D[x, y]
        if not math.isfinite(d):
            cand = (math.inf, (x, y))
            if worst is None or cand[0] > worst[0][0]:
                worst = (cand, (graph.vertices[x], graph.vertices[y], None, None))
            continue
        on_geo = np.flatnonzero(np.isclose(D[x] + D[:, y], d))
        m = int(on_geo[np.argmin(np.abs(D[x, on_geo] - d / 2))])
        ball = D[m] <= delta
        if ball[x] or ball[y]:
            continue
        path = _avoiding_path(adj, x, y, ball)
        if path is not None and (worst is None or d > worst[0][0]):
            worst = ((d, (x, y)), (graph.vertices[x], graph.vertices[y], graph.vertices[m],
                                   [graph.vertices[v] for v in path]))
    return BottleneckResult(worst is None, None if worst is None else worst[1], pairs)


def _avoiding_path(adj, x, y, blocked):
    prev = {x: None}
    todo = deque([x])
    while todo:
        u = todo.popleft()
        if u == y:
            out = []
            while u is not None:
                out.append(u)
                u = prev[u]
            return out[::-1]
        for v, _ in adj[u]:
            if v not in prev and not blocked[v]:
                prev[v] = u
                todo.append(v)
    return None


def geodesic_paths(graph: MetricGraph, u, v, cap: int = 10**5):
    """All shortest paths from u to v (vertex lists), in index order."""
    D = graph.distances()
    a, b = graph.index[u], graph.index[v]
    total = D[a, b]
    if not math.isfinite(total):
        return []
    adj = graph.neighbors()
    out = []

    def walk(node, acc):
        if len(out) >= cap:
            raise BudgetExceeded("too many geodesics in the graph", partial=len(out))
        if node == b:
            out.append([graph.vertices[i] for i in acc])
            return
        for nxt, w in sorted(adj[node]):
            if np.isclose(D[a, node] + w + D[nxt, b], total) and np.isclose(D[a, nxt], D[a, node] + w):
                acc.append(nxt)
                walk(nxt, acc)
                acc.pop()

    walk(a, [a])
    return out


@dataclass
class StandardPathResult:
    passed: bool
    members: dict  # member index -> (passed, needed R)
    geodesics: int

    def __bool__(self):
        return self.passed


def standard_path_check(qts: MetricGraph, family: ProjectionFamily, y, z, K_tilde: float, R: float,
                        cap: int = 10**5) -> StandardPathResult:
    """Each geodesic [y, z] in the quasi-tree of spaces passes within R of
    pi_X(y) and pi_X(z) for every member X with d^pi_X(y, z) > K_tilde (the
    members containing y and z are excluded)."""
    if y not in qts.index or z not in qts.index:
        raise PreconditionError("y and z must be vertices of the quasi-tree of spaces")
    paths = geodesic_paths(qts, y, z, cap)
    D = qts.distances()
    res = {}
    for w in range(len(family)):
        if w in (y[0], z[0]) or family.point_dpi(w, y[1], z[1]) <= K_tilde:
            continue
        need = 0.0
        for target in (family.point_projection(w, y[1]), family.point_projection(w, z[1])):
            tid = [qts.index[(w, p)] for p in target if (w, p) in qts.index]
            for path in paths:
                pid = [qts.index[v] for v in path]
                need = max(need, float(D[np.ix_(pid, tid)].min()) if tid else math.inf)
        res[w] = (need <= R, need)
    return StandardPathResult(all(ok for ok, _ in res.values()), res, len(paths))


def projection_offset(qts: MetricGraph, family: ProjectionFamily, y: int, z: int) -> float:
    """Largest d_C from a vertex of member z nearest to member y to pi_Z(Y)."""
    D = qts.distances()
    ys = [qts.index[v] for v in qts.vertices if v[0] == y]
    zs = [qts.index[v] for v in qts.vertices if v[0] == z]
    near = D[np.ix_(ys, zs)].min(axis=0)
    nearest = [zs[k] for k in np.flatnonzero(near == near.min())]
    proj = [qts.index[(z, p)] for p in family.projection(z, y) if (z, p) in qts.index]
    return float(D[np.ix_(nearest, proj)].min(axis=1).max())
