"""Barriers along geodesics, barrier-free sets, concave regions and the
classifiers used to sort minimal conjugacy representatives.

Most operations accept an optional designated ``orbit`` (a finite PointSet).
Without one, the orbit is every vertex of the Cayley graph, which makes the
concave region empty and K_{M,D} trivial; a smaller orbit keeps them testable.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

from . import census as Cn
from . import geometry as Geo
from . import groups as G
from . import kernels as K
from .errors import BudgetExceeded, PreconditionError, SpecError


@dataclass(frozen=True)
class BarrierQuery:
    epsilon: float = 0
    M: float = 0
    f: tuple = ()
    n_power: Optional[int] = None

    def __post_init__(self):
        if self.epsilon < 0 or self.M < 0:
            raise SpecError("epsilon and M must be >= 0")
        if self.n_power is not None and self.n_power < 1:
            raise SpecError("n_power must be a positive integer")

    def word(self, model):
        f = model.normalize(self.f)
        if self.n_power is None:
            return f
        if not Geo.qie_check(model, f, 4).flagged if f else False:
            return G.power(model, f, self.n_power)
        raise PreconditionError("n_power needs an infinite-order f")

    def to_dict(self, model):
        return {"epsilon": self.epsilon, "big_m": self.M, "barrier_word": G.fmt(model, self.f),
                "power": self.n_power}

    def to_json(self, model):
        return json.dumps(self.to_dict(model), sort_keys=True)

    @classmethod
    def from_dict(cls, model, d):
        return cls(d.get("epsilon", 0), d.get("big_m", 0), G.parse(model, d.get("barrier_word", "")),
                   d.get("power"))


@dataclass
class BarrierWitness:
    h: tuple
    attained: tuple  # (d(h o, gamma), d(h f o, gamma))


def _set_dist(model, v, S):
    return min(model.dist(v, s) for s in S)


def find_barrier(model, word, q: BarrierQuery, start=()) -> Optional[BarrierWitness]:
    """ShortLex-least h with h o and h f o both within epsilon of the geodesic
    ``start . word``; None if there is none (the search region is complete)."""
    verts = G.geodesic_vertices(model, model.normalize(start), tuple(word))
    f = q.word(model)
    eps = int(q.epsilon)
    offsets = G.ball(model, eps) if eps > 0 else [()]
    region = {model.mul(v, b) for v in verts for b in offsets}
    vset = set(verts)
    for h in sorted(region, key=G.shortlex_key):
        hf = model.mul(h, f)
        if eps == 0:
            if hf in vset:
                return BarrierWitness(h, (0, 0))
            continue
        d1 = _set_dist(model, h, verts)
        d2 = _set_dist(model, hf, verts)
        if d1 <= q.epsilon and d2 <= q.epsilon:
            return BarrierWitness(h, (d1, d2))
    return None


@dataclass
class BarrierFreeResult:
    free: bool
    certificate: Optional[tuple]  # (x, word) of a barrier-free geodesic
    witness: Optional[BarrierWitness]  # barrier on the canonical geodesic when not free
    examined: int
    truncated: bool = False

    def __bool__(self):
        return self.free


def is_barrier_free_element(model, g, q: BarrierQuery, cap=G.DEFAULT_GEODESIC_CAP) -> BarrierFreeResult:
    """Whether some geodesic from B(o, M) to B(g o, M) has no (epsilon, f)-barrier."""
    g = model.normalize(g)
    M = int(q.M)
    B = G.ball(model, M)
    examined = 0
    truncated = False
    for x in B:
        for b in B:
            y = model.mul(g, b)
            geo = G.geodesics_between(model, x, y, cap)
            truncated |= geo.truncated
            for w in geo.words:
                examined += 1
                if find_barrier(model, w, q, start=x) is None:
                    return BarrierFreeResult(True, (x, w), None, examined, truncated)
    return BarrierFreeResult(False, None, find_barrier(model, g, q), examined, truncated)


def _avoid_kernel(q: BarrierQuery):
    def kern(model):
        if not (model.local and model.unique_geodesics and q.epsilon == 0 and q.M == 0):
            return None
        f = q.word(model)
        if not f:
            return None
        return (K.MODE_AVOID, (f, model.inverse(f)), Cn._rows_second)

    return kern


def barrier_free_predicate(q: BarrierQuery, model=None) -> Cn.Predicate:
    """Membership in V_{eps,M,f}.  With unique geodesics, eps = M = 0 and a
    local model this is "the normal form contains neither nf(f) nor nf(f^-1)",
    which the compiled kernel counts directly."""
    label = f"V[eps={q.epsilon},M={q.M},f={G.fmt(model, q.f) if model else q.f}]"
    return Cn.Predicate(label, lambda m, g: is_barrier_free_element(m, g, q).free, _avoid_kernel(q))


def enumerate_V(model, n: int, q: BarrierQuery, threads=None, use_kernel=True) -> Cn.CensusTable:
    return Cn.census(model, n, barrier_free_predicate(q, model), threads, use_kernel=use_kernel)


def barrier_free_members(model, n: int, q: BarrierQuery):
    for g in G.enumerate_ball(model, n):
        if is_barrier_free_element(model, g, q).free:
            yield g


def v_table_csv(table: Cn.CensusTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "sphere_count", "v_count", "ratio"])
    for n, t, v in zip(table.n, table.spheres("total"), table.spheres("filtered")):
        w.writerow([n, t, v, f"{v / t:.12g}" if t else "0"])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# designated orbits


def _orbit_distance(model, orbit: Optional[Geo.PointSet]):
    if orbit is None:
        return lambda v: 0
    pr = Geo.Projector(model, orbit)
    return lambda v: pr.info(v)[0]


def concave_region(model, M1, M2, n: int, orbit: Optional[Geo.PointSet] = None,
                   cap=G.DEFAULT_GEODESIC_CAP) -> set:
    """Elements g in N(o, n) joined by a geodesic from B(o, M2) to B(g o, M2)
    whose nonempty interior stays at distance > M1 from the orbit."""
    if M1 > M2:
        raise SpecError("concave region needs M1 <= M2")
    if orbit is None:
        return set()
    od = _orbit_distance(model, orbit)
    B = G.ball(model, int(M2))
    out = set()
    for g in G.ball(model, n):
        if _has_outside_geodesic(model, g, B, od, M1, cap):
            out.add(g)
    return out


def _has_outside_geodesic(model, g, B, od, M1, cap):
    for x in B:
        for b in B:
            y = model.mul(g, b)
            if model.dist(x, y) < 2:
                continue
            geo = G.geodesics_between(model, x, y, cap)
            if geo.truncated:
                raise BudgetExceeded("geodesic stream truncated in concave_region")
            for w in geo.words:
                verts = G.geodesic_vertices(model, x, w)
                if all(od(v) > M1 for v in verts[1:-1]):
                    return True
    return False


def in_K(model, g, M, D: int, orbit: Optional[Geo.PointSet] = None, word=None) -> bool:
    """No length-D subpath of the canonical geodesic [o, g o] lies in N_M(orbit).
    True vacuously when the geodesic is shorter than D."""
    word = tuple(word) if word is not None else model.normalize(g)
    verts = G.geodesic_vertices(model, (), word)
    od = _orbit_distance(model, orbit)
    inside = [od(v) <= M for v in verts]
    for i in range(len(word) - D + 1):
        if all(inside[i:i + D + 1]):
            return False
    return True


@dataclass
class NonContractingResult:
    value: bool
    vacuous: bool
    contracting_window: Optional[int]  # start index of a C-contracting window
    verdicts: dict = field(default_factory=dict)

    def __bool__(self):
        return self.value


def is_D_local_C_noncontracting(model, g, D: int, C: float, budget: Geo.Budget, M=0,
                                orbit: Optional[Geo.PointSet] = None, word=None) -> NonContractingResult:
    """No length-D window of the geodesic inside N_M(orbit) passes the
    contraction test at C.  Windows are translated to start at o."""
    word = tuple(word) if word is not None else model.normalize(g)
    if len(word) < D:
        return NonContractingResult(True, True, None)
    verts = G.geodesic_vertices(model, (), word)
    od = _orbit_distance(model, orbit)
    verdicts = {}
    for i in range(len(word) - D + 1):
        window = verts[i:i + D + 1]
        if not all(od(v) <= M for v in window):
            continue
        back = model.inverse(verts[i])
        X = Geo.PointSet(frozenset(model.mul(back, v) for v in window), f"window{i}")
        v = Geo.contraction_verdict(model, X, C, budget)
        verdicts[i] = v
        if v.passed:
            return NonContractingResult(False, False, i, verdicts)
    return NonContractingResult(True, False, None, verdicts)


@dataclass
class RepClassification:
    label: str  # CaseK_MD | CaseShort | CaseP_DC | trichotomy-violation
    data: dict

    def __str__(self):
        return self.label


def classify_minimal_rep(model, g, M, D: int, C: float, budget: Geo.Budget,
                         orbit: Optional[Geo.PointSet] = None) -> RepClassification:
    """First matching case among K_{M,D}, |h| <= 4D, P_{D,C}.  K only counts
    when the geodesic has a length-D subpath to test."""
    g = model.normalize(g)
    ell, _ = Cn.conj_length(model, g)
    if len(g) != ell:
        raise PreconditionError(f"{G.fmt(model, g)} is not minimal in its conjugacy class (min {ell})")
    data = {"length": len(g), "D": D, "M": M, "C": C}
    if len(g) >= D and in_K(model, g, M, D, orbit):
        return RepClassification("CaseK_MD", data)
    if len(g) <= 4 * D:
        return RepClassification("CaseShort", data)
    nc = is_D_local_C_noncontracting(model, g, D, C, budget, M, orbit)
    if nc.value:
        return RepClassification("CaseP_DC", data)
    data["contracting_window"] = nc.contracting_window
    data["witness_verdict"] = nc.verdicts[nc.contracting_window].to_json(model)
    return RepClassification("trichotomy-violation", data)
