"""Exact models of finitely generated groups with word metrics.

Elements are represented by their normal form: a tuple of generator ids which
is the ShortLex-least geodesic word for the element (ids are ordered
``a < A < b < B < ...``).  Consequently ``len(g)`` is the word length of ``g``
and the identity is ``()``.

Supported groups: free groups, finite cyclic groups, free products and direct
products of supported groups, and right-angled Artin groups.
"""

from __future__ import annotations

import itertools
import json
import string
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

from .errors import BudgetExceeded, SpecError

Element = tuple  # normal-form tuple of generator ids
Word = tuple

DEFAULT_STREAM_CAP = 10**8
DEFAULT_RETAIN_CAP = 10**7
DEFAULT_GEODESIC_CAP = 10**5


# ---------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class FreeGroup:
    rank: int


@dataclass(frozen=True)
class CyclicFactor:
    order: int


@dataclass(frozen=True)
class FreeProduct:
    left: "GroupSpec"
    right: "GroupSpec"


@dataclass(frozen=True)
class DirectProduct:
    left: "GroupSpec"
    right: "GroupSpec"


@dataclass(frozen=True)
class RAAG:
    vertices: tuple
    edges: tuple  # pairs of vertex names; adjacency means the generators commute


GroupSpec = Union[FreeGroup, CyclicFactor, FreeProduct, DirectProduct, RAAG]


def spec_from_dict(d: dict) -> GroupSpec:
    if not isinstance(d, dict) or "kind" not in d:
        raise SpecError("group spec must be an object with a 'kind' field")
    kind = d["kind"]
    try:
        if kind in ("free", "free_group"):
            return FreeGroup(int(d["rank"]))
        if kind == "cyclic":
            return CyclicFactor(int(d["order"]))
        if kind == "free_product":
            return FreeProduct(spec_from_dict(d["left"]), spec_from_dict(d["right"]))
        if kind == "direct_product":
            return DirectProduct(spec_from_dict(d["left"]), spec_from_dict(d["right"]))
        if kind == "raag":
            return RAAG(tuple(d["vertices"]), tuple(tuple(e) for e in d.get("edges", [])))
    except KeyError as exc:
        raise SpecError(f"group spec of kind {kind!r} is missing field {exc}") from None
    raise SpecError(f"unknown group kind {kind!r}")


def spec_to_dict(spec: GroupSpec) -> dict:
    if isinstance(spec, FreeGroup):
        return {"kind": "free", "rank": spec.rank}
    if isinstance(spec, CyclicFactor):
        return {"kind": "cyclic", "order": spec.order}
    if isinstance(spec, FreeProduct):
        return {"kind": "free_product", "left": spec_to_dict(spec.left), "right": spec_to_dict(spec.right)}
    if isinstance(spec, DirectProduct):
        return {"kind": "direct_product", "left": spec_to_dict(spec.left), "right": spec_to_dict(spec.right)}
    return {"kind": "raag", "vertices": list(spec.vertices), "edges": [list(e) for e in spec.edges]}


def spec_from_json(text: str) -> GroupSpec:
    return spec_from_dict(json.loads(text))


def spec_label(spec: GroupSpec) -> str:
    if isinstance(spec, FreeGroup):
        return f"F{spec.rank}"
    if isinstance(spec, CyclicFactor):
        return f"Z{spec.order}"
    if isinstance(spec, FreeProduct):
        return f"({spec_label(spec.left)}*{spec_label(spec.right)})"
    if isinstance(spec, DirectProduct):
        return f"({spec_label(spec.left)}x{spec_label(spec.right)})"
    edges = ",".join(f"{u}-{v}" for u, v in spec.edges)
    return f"RAAG[{','.join(spec.vertices)};{edges}]"


def check_spec(spec: GroupSpec) -> list:
    """Return a list of problems with ``spec`` (empty when well formed)."""
    problems = []
    if isinstance(spec, FreeGroup):
        if spec.rank < 1:
            problems.append("free group rank must be >= 1")
    elif isinstance(spec, CyclicFactor):
        if spec.order < 2:
            problems.append("cyclic order must be >= 2 (order 1 would be a trivial generator)")
    elif isinstance(spec, (FreeProduct, DirectProduct)):
        problems += check_spec(spec.left) + check_spec(spec.right)
        if isinstance(spec, FreeProduct) and spec.left == CyclicFactor(2) == spec.right:
            problems.append("elementary free product Z2*Z2 is excluded")
    elif isinstance(spec, RAAG):
        verts = list(spec.vertices)
        if not verts:
            problems.append("RAAG needs at least one vertex")
        if len(set(verts)) != len(verts):
            problems.append("RAAG vertex names must be distinct")
        seen = set()
        for e in spec.edges:
            if len(e) != 2:
                problems.append(f"RAAG edge {e!r} is not a pair")
                continue
            u, v = e
            if u == v:
                problems.append(f"RAAG graph has a self-loop at {u!r}")
            if u not in verts or v not in verts:
                problems.append(f"RAAG edge {e!r} uses an unknown vertex")
            key = frozenset((u, v))
            if key in seen:
                problems.append(f"RAAG graph has a repeated edge {e!r}")
            seen.add(key)
    else:
        problems.append(f"not a group spec: {spec!r}")
    return problems


# ---------------------------------------------------------------------------
# generators and alphabet


@dataclass(frozen=True)
class Generator:
    id: int
    inverse_id: int
    order: int  # 0 means infinite order
    name: str


class _Alphabet:
    """Allocates generator ids and names across all leaves of a spec."""

    def __init__(self):
        self.gens: list = []
        self.invtab: list = []
        self._letters = iter(string.ascii_lowercase)

    def letter(self, name=None):
        if name is None:
            try:
                name = next(self._letters)
            except StopIteration:
                raise SpecError("too many generators for single-letter names") from None
        return name

    def pair(self, order, name=None):
        name = self.letter(name)
        i = len(self.gens)
        if order == 2:
            self.gens.append(Generator(i, i, 2, name))
            self.invtab.append(i)
            return (i,)
        self.invtab += [i + 1, i]
        self.gens.append(Generator(i, i + 1, order, name))
        self.gens.append(Generator(i + 1, i, order, name.upper() if name.islower() else name + "^-1"))
        return (i, i + 1)


# ---------------------------------------------------------------------------
# models


class GroupModel:
    """Base class.  Subclasses implement ``normalize`` and may override the
    fast paths ``can_extend`` and ``geodesic_words``."""

    kind = "abstract"
    local = False  # normal forms are exactly the words whose adjacent pairs are allowed
    unique_geodesics = False

    def __init__(self, alphabet: _Alphabet, ids: Sequence[int]):
        self._alphabet = alphabet
        self.ids = tuple(ids)
        self._idset = frozenset(self.ids)

    # shared alphabet views
    @property
    def gens(self):
        return [self._alphabet.gens[i] for i in self.ids]

    @property
    def invtab(self) -> list:
        return self._alphabet.invtab

    def inv(self, s: int) -> int:
        return self._alphabet.invtab[s]

    def name(self, s: int) -> str:
        return self._alphabet.gens[s].name

    def owns(self, s: int) -> bool:
        return s in self._idset

    # core operations
    def normalize(self, word: Iterable[int]) -> Element:
        raise NotImplementedError

    def trailing(self, g: Element) -> Element:
        """Maximal suffix of ``g`` made of this model's letters."""
        i = len(g)
        while i and g[i - 1] in self._idset:
            i -= 1
        return g[i:]

    def can_extend(self, g: Element, s: int) -> bool:
        """True iff ``g + (s,)`` is again a normal form (``g`` normal, ``s`` ours)."""
        tail = self.trailing(g) + (s,)
        return self.normalize(tail) == tail

    def inverse(self, g: Element) -> Element:
        return self.normalize(self.inv(s) for s in reversed(g))

    def mul(self, g: Element, h: Element) -> Element:
        """Product of two normal forms."""
        return self.normalize(g + h)

    def multiply(self, g: Element, h: Element) -> Element:
        return self.mul(g, h)

    def length_of(self, word) -> int:
        """Word length of the element spelled by an arbitrary word."""
        return len(self.normalize(word))

    def dist(self, g: Element, h: Element) -> int:
        """Word-metric distance between two normal forms."""
        return len(self.mul(self.inverse(g), h))

    def geodesic_words(self, g: Element) -> Iterator[Word]:
        """All geodesic words representing ``g`` (finite, possibly many)."""
        raise NotImplementedError

    # conjugacy
    def cyclic_reduce(self, g: Element):
        """Return ``(rep, x)`` with ``rep = x g x^-1`` of minimal length in the class."""
        raise NotImplementedError

    def conj_key(self, rep: Element) -> Element:
        """Canonical representative of the class of a cyclically reduced ``rep``."""
        raise NotImplementedError


class FreeGroupModel(GroupModel):
    kind = "free"
    local = True
    unique_geodesics = True

    def __init__(self, alphabet, rank, names=None):
        ids = []
        for i in range(rank):
            ids += alphabet.pair(0, None if names is None else names[i])
        super().__init__(alphabet, ids)
        self.rank = rank

    def normalize(self, word):
        inv = self.invtab
        out = []
        for s in word:
            if out and out[-1] == inv[s]:
                out.pop()
            else:
                out.append(s)
        return tuple(out)

    def mul(self, g, h):
        inv = self.invtab
        i, lg, n = 0, len(g), min(len(g), len(h))
        while i < n and g[lg - 1 - i] == inv[h[i]]:
            i += 1
        return g[:lg - i] + h[i:] if i else g + h

    def inverse(self, g):
        inv = self.invtab
        return tuple(inv[s] for s in reversed(g))

    def dist(self, g, h):
        i, n = 0, min(len(g), len(h))
        while i < n and g[i] == h[i]:
            i += 1
        return len(g) + len(h) - 2 * i

    def can_extend(self, g, s):
        return not g or g[-1] != self.invtab[s]

    def geodesic_words(self, g):
        yield g

    def cyclic_reduce(self, g):
        i, j = 0, len(g)
        while j - i >= 2 and g[i] == self.inv(g[j - 1]):
            i += 1
            j -= 1
        # rep = g[:i]^-1 g g[:i]
        return g[i:j], self.inverse(g[:i])

    def conj_key(self, rep):
        if not rep:
            return rep
        return min(rep[k:] + rep[:k] for k in range(len(rep)))


class CyclicModel(GroupModel):
    kind = "cyclic"
    unique_geodesics = True

    def __init__(self, alphabet, order):
        super().__init__(alphabet, alphabet.pair(order))
        self.order = order
        self.local = order <= 3
        self.unique_geodesics = order % 2 == 1 or order == 2

    def exponent(self, word):
        x = self.ids[0]
        return sum(1 if s == x else -1 for s in word) % self.order

    def power(self, k):
        k %= self.order
        if k == 0:
            return ()
        if 2 * k <= self.order:
            return (self.ids[0],) * k
        return (self.ids[-1],) * (self.order - k)

    def normalize(self, word):
        return self.power(self.exponent(word))

    def can_extend(self, g, s):
        tail = self.trailing(g)
        if tail and tail[-1] != s:
            return False
        r = len(tail) + 1
        if s == self.ids[0]:
            return 2 * r <= self.order
        return 2 * r < self.order

    def geodesic_words(self, g):
        yield g
        if self.order % 2 == 0 and self.order > 2 and 2 * len(g) == self.order:
            yield (self.ids[-1],) * len(g)

    def cyclic_reduce(self, g):
        return g, ()

    def conj_key(self, rep):
        return rep


class FreeProductModel(GroupModel):
    kind = "free_product"

    def __init__(self, alphabet, left: GroupModel, right: GroupModel):
        super().__init__(alphabet, left.ids + right.ids)
        self.left, self.right = left, right
        self.local = left.local and right.local
        self.unique_geodesics = left.unique_geodesics and right.unique_geodesics

    def owner(self, s):
        return self.left if self.left.owns(s) else self.right

    def side(self, s):
        return "left" if self.left.owns(s) else "right"

    def normalize(self, word):
        stack = []  # [factor, syllable]
        for s in word:
            f = self.owner(s)
            if stack and stack[-1][0] is f:
                new = f.normalize(stack[-1][1] + (s,))
                if new:
                    stack[-1][1] = new
                else:
                    stack.pop()
            else:
                stack.append([f, f.normalize((s,))])
        return tuple(s for _, syl in stack for s in syl)

    def can_extend(self, g, s):
        return self.owner(s).can_extend(g, s)

    def syllables(self, g):
        out = []
        for s in g:
            if out and self.owner(out[-1][0]) is self.owner(s):
                out[-1].append(s)
            else:
                out.append([s])
        return [tuple(x) for x in out]

    def geodesic_words(self, g):
        parts = [list(self.owner(syl[0]).geodesic_words(syl)) for syl in self.syllables(g)]
        for combo in itertools.product(*parts):
            yield tuple(s for syl in combo for s in syl)

    def cyclic_reduce(self, g):
        x = ()
        while True:
            syl = self.syllables(g)
            if len(syl) >= 2 and self.owner(syl[0][0]) is self.owner(syl[-1][0]):
                last = syl[-1]
                g = self.normalize(last + g[: len(g) - len(last)])
                x = self.normalize(last + x)
                continue
            break
        if len(syl) == 1:
            f = self.owner(g[0])
            rep, y = f.cyclic_reduce(g)
            return rep, self.normalize(y + x)
        return g, x

    def conj_key(self, rep):
        syl = self.syllables(rep)
        if len(syl) <= 1:
            return self.owner(rep[0]).conj_key(rep) if rep else rep
        return min(tuple(s for t in syl[k:] + syl[:k] for s in t) for k in range(len(syl)))


class DirectProductModel(GroupModel):
    kind = "direct_product"

    def __init__(self, alphabet, left: GroupModel, right: GroupModel):
        super().__init__(alphabet, left.ids + right.ids)
        self.left, self.right = left, right

    def split(self, g):
        i = 0
        while i < len(g) and self.left.owns(g[i]):
            i += 1
        return g[:i], g[i:]

    def normalize(self, word):
        word = tuple(word)
        return (self.left.normalize(s for s in word if self.left.owns(s))
                + self.right.normalize(s for s in word if self.right.owns(s)))

    def can_extend(self, g, s):
        left, right = self.split(self.trailing(g))
        if self.left.owns(s):
            return not right and self.left.can_extend(left, s)
        return self.right.can_extend(right, s)

    def geodesic_words(self, g):
        left, right = self.split(g)
        lw = list(self.left.geodesic_words(left))
        rw = list(self.right.geodesic_words(right))
        n = len(left) + len(right)
        for u in lw:
            for v in rw:
                for pos in itertools.combinations(range(n), len(u)):
                    out, iu, iv = [], 0, 0
                    pset = set(pos)
                    for k in range(n):
                        if k in pset:
                            out.append(u[iu])
                            iu += 1
                        else:
                            out.append(v[iv])
                            iv += 1
                    yield tuple(out)

    def cyclic_reduce(self, g):
        left, right = self.split(g)
        rl, xl = self.left.cyclic_reduce(left)
        rr, xr = self.right.cyclic_reduce(right)
        return rl + rr, xl + xr

    def conj_key(self, rep):
        left, right = self.split(rep)
        return self.left.conj_key(left) + self.right.conj_key(right)


class RaagModel(GroupModel):
    kind = "raag"

    def __init__(self, alphabet, vertices, edges):
        ids = []
        for v in vertices:
            ids += alphabet.pair(0, v if len(v) == 1 and v.islower() else v)
        super().__init__(alphabet, ids)
        self.vertices = tuple(vertices)
        self.edges = tuple(tuple(e) for e in edges)
        index = {v: i for i, v in enumerate(vertices)}
        self._vertex = {s: k // 2 for k, s in enumerate(ids)}
        self.adj = [set() for _ in vertices]
        for u, v in edges:
            self.adj[index[u]].add(index[v])
            self.adj[index[v]].add(index[u])
        self.local = self.unique_geodesics = not edges
        self._init_tables()
        self._normalize = lru_cache(maxsize=1 << 18)(self._normalize_uncached)
        self._mul = lru_cache(maxsize=1 << 18)(self._mul_uncached)

    def vertex(self, s):
        return self._vertex[s]

    def commute(self, s, t):
        """Distinct-vertex letters that commute."""
        return self._comm[s][t]

    def _init_tables(self):
        n = len(self._alphabet.invtab)
        self._comm = [[False] * n for _ in range(n)]
        for s in self.ids:
            for t in self.ids:
                self._comm[s][t] = self._vertex[t] in self.adj[self._vertex[s]]

    def reduce(self, word, out=None):
        """Cancel letters against earlier inverses reachable through commuting letters."""
        out = [] if out is None else out
        vert, comm, inv = self._vertex, self._comm, self.invtab
        for s in word:
            v = vert[s]
            cs = comm[s]
            for j in range(len(out) - 1, -1, -1):
                t = out[j]
                if vert[t] == v:
                    if t == inv[s]:
                        del out[j]
                    else:
                        out.append(s)
                    break
                if not cs[t]:
                    out.append(s)
                    break
            else:
                out.append(s)
        return out

    def _front_movable(self, w):
        """Indices of letters that can be commuted to the front (first occurrence per letter)."""
        res, seen = [], set()
        comm = self._comm
        for i, s in enumerate(w):
            if s in seen:
                continue
            cs = comm[s]
            if all(cs[w[j]] for j in range(i)):
                res.append(i)
                seen.add(s)
        return res

    def lexify(self, w):
        """Lex-least word in the commutation class of ``w``: repeatedly emit the
        smallest letter with no unemitted non-commuting predecessor."""
        n = len(w)
        comm = self._comm
        blockers = [0] * n
        after = [[] for _ in range(n)]
        for i in range(n):
            ci = comm[w[i]]
            for j in range(i):
                if not ci[w[j]]:
                    blockers[i] += 1
                    after[j].append(i)
        ready = [i for i in range(n) if blockers[i] == 0]
        out = []
        while ready:
            k = min(ready, key=w.__getitem__)
            ready.remove(k)
            out.append(w[k])
            for i in after[k]:
                blockers[i] -= 1
                if blockers[i] == 0:
                    ready.append(i)
        return tuple(out)

    def _normalize_uncached(self, word):
        return self.lexify(self.reduce(word))

    def normalize(self, word):
        if not self.edges:
            return FreeGroupModel.normalize(self, word)
        return self._normalize(tuple(word))

    def dist(self, g, h):
        inv = self.invtab
        return len(self.reduce(h, [inv[s] for s in reversed(g)]))

    def length_of(self, word):
        return len(self.reduce(word))

    def batch_dist(self, gs, hs):
        """Distance matrix between two lists of normal forms (compiled)."""
        from . import kernels

        if not hasattr(self, "_np_tables"):
            import numpy as np

            n = len(self.invtab)
            comm = np.zeros((n, n), dtype=np.bool_)
            for s in self.ids:
                for t in self.ids:
                    comm[s, t] = self._comm[s][t]
            vert = np.array([self._vertex[s] for s in range(n)], dtype=np.int64)
            self._np_tables = (np.array(self.invtab, dtype=np.int64), vert, comm)
        A, al = kernels.pack_words(gs)
        B, bl = kernels.pack_words(hs)
        return kernels.raag_dist_matrix(A, al, B, bl, *self._np_tables)

    def _mul_uncached(self, g, h):
        return self.lexify(self.reduce(h, list(g)))

    def mul(self, g, h):
        if not self.edges:
            return FreeGroupModel.mul(self, g, h)
        if not h:
            return g
        return self._mul(g, h)

    def geodesic_words(self, g):
        def rec(w):
            if not w:
                yield ()
                return
            for i in self._front_movable(w):
                for rest in rec(w[:i] + w[i + 1:]):
                    yield (w[i],) + rest

        yield from rec(tuple(g))

    def _back_movable(self, w):
        rev = self._front_movable(w[::-1])
        return [len(w) - 1 - i for i in rev]

    def cyclic_reduce(self, g):
        x = ()
        while True:
            front = self._front_movable(g)
            back = self._back_movable(g)
            hit = None
            for i in front:
                for j in back:
                    if i != j and g[j] == self.inv(g[i]):
                        hit = (i, j)
                        break
                if hit:
                    break
            if hit is None:
                return g, x
            i, j = hit
            s = g[i]
            # g ~ s u s^-1 ; conjugate by s^-1
            rest = tuple(t for k, t in enumerate(g) if k not in (i, j))
            g = self.normalize(rest)
            x = self.normalize((self.inv(s),) + x)

    def conj_key(self, rep):
        if not rep:
            return rep
        seen = {rep}
        frontier = [rep]
        while frontier:
            nxt = []
            for w in frontier:
                for i in self._front_movable(w):
                    rot = self.normalize(w[:i] + w[i + 1:] + (w[i],))
                    if rot not in seen:
                        seen.add(rot)
                        nxt.append(rot)
            frontier = nxt
        return min(seen)


# ---------------------------------------------------------------------------
# construction


def _build(spec, alphabet):
    if isinstance(spec, FreeGroup):
        return FreeGroupModel(alphabet, spec.rank)
    if isinstance(spec, CyclicFactor):
        return CyclicModel(alphabet, spec.order)
    if isinstance(spec, FreeProduct):
        left = _build(spec.left, alphabet)
        return FreeProductModel(alphabet, left, _build(spec.right, alphabet))
    if isinstance(spec, DirectProduct):
        left = _build(spec.left, alphabet)
        return DirectProductModel(alphabet, left, _build(spec.right, alphabet))
    return RaagModel(alphabet, spec.vertices, spec.edges)


def build_model(spec: GroupSpec) -> GroupModel:
    if isinstance(spec, dict):
        spec = spec_from_dict(spec)
    problems = check_spec(spec)
    if problems:
        raise SpecError("; ".join(problems))
    model = _build(spec, _Alphabet())
    model.spec = spec
    model.label = spec_label(spec)
    return model


# ---------------------------------------------------------------------------
# word helpers


def parse(model: GroupModel, text: str) -> Word:
    """Parse ``"a.b.A"`` into a word (not normalized)."""
    if not text:
        return ()
    by_name = {g.name: g.id for g in model.gens}
    try:
        return tuple(by_name[t] for t in text.split("."))
    except KeyError as exc:
        raise SpecError(f"unknown generator {exc} in {text!r}") from None


def element(model: GroupModel, text: str) -> Element:
    return model.normalize(parse(model, text))


def fmt(model: GroupModel, word: Iterable[int]) -> str:
    return ".".join(model.name(s) for s in word)


def normalize(model: GroupModel, w: Iterable[int]) -> Element:
    w = tuple(w)
    for s in w:
        if not model.owns(s):
            raise SpecError(f"letter {s} is not a generator of {model.label}")
    return model.normalize(w)


def multiply(model: GroupModel, g: Element, h: Element) -> Element:
    return model.normalize(g + h)


def inverse(model: GroupModel, g: Element) -> Element:
    return model.inverse(g)


def power(model: GroupModel, g: Element, n: int) -> Element:
    if n < 0:
        g, n = model.inverse(g), -n
    out = ()
    for _ in range(n):
        out = model.normalize(out + g)
    return out


def word_length(model: GroupModel, g: Element) -> int:
    return len(g)


def distance(model: GroupModel, g: Element, h: Element) -> int:
    return len(model.normalize(model.inverse(g) + h))


def shortlex_key(g):
    return (len(g), g)


# ---------------------------------------------------------------------------
# enumeration


def _children(model, g, prefix_letter=None):
    gens = model.ids if prefix_letter is None or g else (prefix_letter,)
    for s in gens:
        if model.can_extend(g, s):
            yield g + (s,)


def enumerate_sphere(model: GroupModel, n: int, first_letter=None) -> Iterator[Element]:
    """Normal forms of length exactly ``n`` in lexicographic order.

    With ``first_letter`` set, only elements whose normal form starts with that
    letter are produced; the partitions over all letters (plus the identity)
    are disjoint and cover the sphere.
    """
    if n == 0:
        if first_letter is None:
            yield ()
        return
    stack = [iter(list(_children(model, (), first_letter)))]
    while stack:
        g = next(stack[-1], None)
        if g is None:
            stack.pop()
            continue
        if len(g) == n:
            yield g
        else:
            stack.append(_children(model, g))


def enumerate_ball(model: GroupModel, n: int, cap: int = DEFAULT_STREAM_CAP,
                   first_letter=None) -> Iterator[Element]:
    """Elements of the ball N(o, n) in ShortLex order, each exactly once."""
    counts = []
    streamed = 0
    for k in range(n + 1):
        counts.append(0)
        for g in enumerate_sphere(model, k, first_letter):
            streamed += 1
            if streamed > cap:
                counts[-1] = counts[-1]
                raise BudgetExceeded(f"ball of radius {n} exceeds cap {cap}", partial=list(counts))
            counts[-1] += 1
            yield g


def ball(model: GroupModel, n: int, cap: int = DEFAULT_RETAIN_CAP) -> list:
    return list(enumerate_ball(model, n, cap=cap))


def partition_letters(model: GroupModel) -> list:
    return list(model.ids)


def sphere_counts(model: GroupModel, n: int, cap: int = DEFAULT_STREAM_CAP, first_letter=None) -> list:
    """Per-sphere counts via a single depth-first pass."""
    counts = [0] * (n + 1)
    if first_letter is None:
        counts[0] = 1
    if n == 0:
        return counts
    total = counts[0]
    stack = [iter(list(_children(model, (), first_letter)))]
    while stack:
        g = next(stack[-1], None)
        if g is None:
            stack.pop()
            continue
        counts[len(g)] += 1
        total += 1
        if total > cap:
            raise BudgetExceeded(f"ball of radius {n} exceeds cap {cap}", partial=counts)
        if len(g) < n:
            stack.append(_children(model, g))
    return counts


# ---------------------------------------------------------------------------
# geodesics


class Geodesics(NamedTuple):
    words: list
    truncated: bool


def iter_geodesics(model: GroupModel, g: Element, h: Element) -> Iterator[Word]:
    """Geodesic words ``w`` with ``g w = h``."""
    return model.geodesic_words(model.normalize(model.inverse(g) + h))


def geodesics_between(model: GroupModel, g: Element, h: Element,
                      cap: int = DEFAULT_GEODESIC_CAP) -> Geodesics:
    words = []
    for w in iter_geodesics(model, g, h):
        if len(words) >= cap:
            return Geodesics(words, True)
        words.append(w)
    return Geodesics(words, False)


def geodesic_vertices(model: GroupModel, start: Element, word: Word) -> list:
    out = [start]
    g = start
    for s in word:
        g = model.normalize(g + (s,))
        out.append(g)
    return out


# ---------------------------------------------------------------------------
# classifiers


class FreeProductClass(NamedTuple):
    kind: str  # identity | conjugate_into_factor | hyperbolic
    side: str | None = None
    torsion: bool = False  # the remaining syllable has finite order


def _finite_order(model: GroupModel, g: Element) -> bool:
    if not g or isinstance(model, CyclicModel):
        return True
    if isinstance(model, DirectProductModel):
        left = tuple(s for s in g if model.left.owns(s))
        right = tuple(s for s in g if not model.left.owns(s))
        return _finite_order(model.left, left) and _finite_order(model.right, right)
    if isinstance(model, FreeProductModel):
        rep, _ = model.cyclic_reduce(g)
        return len(model.syllables(rep)) == 1 and _finite_order(model.owner(rep[0]), rep)
    return False  # free groups and RAAGs are torsion-free


def classify_free_product(model: GroupModel, g: Element) -> FreeProductClass:
    """Cyclic syllable length >= 2 is hyperbolic; a single cyclic syllable is
    conjugate into its factor, flagged as torsion when it has finite order."""
    if not isinstance(model, FreeProductModel):
        raise SpecError("classify_free_product needs a free product model")
    if not g:
        return FreeProductClass("identity")
    rep, _ = model.cyclic_reduce(g)
    syl = model.syllables(rep)
    if len(syl) >= 2:
        return FreeProductClass("hyperbolic")
    return FreeProductClass("conjugate_into_factor", model.side(rep[0]), _finite_order(model.owner(rep[0]), rep))


def is_conjugate_into_factor(model: GroupModel, g: Element) -> bool:
    """Identity and factor-conjugate elements (everything non-hyperbolic)."""
    return classify_free_product(model, g).kind != "hyperbolic"


def join_subgraphs(model: GroupModel) -> list:
    """Vertex sets (as frozensets of indices) of all join subgraphs, maximal first."""
    if not isinstance(model, RaagModel):
        raise SpecError("join subgraphs need a RAAG model")
    n = len(model.vertices)
    joins = []
    for mask in range(1, 1 << n):
        verts = [i for i in range(n) if mask >> i & 1]
        if len(verts) < 2:
            continue
        # a join iff the complement graph on verts is disconnected
        comp = {verts[0]}
        frontier = [verts[0]]
        while frontier:
            u = frontier.pop()
            for v in verts:
                if v not in comp and v not in model.adj[u]:
                    comp.add(v)
                    frontier.append(v)
        if len(comp) < len(verts):
            joins.append(frozenset(verts))
    joins.sort(key=lambda s: -len(s))
    return joins


def classify_raag(model: GroupModel, g: Element) -> str:
    """``"join_bound"`` if the cyclically reduced support lies in a join subgraph,
    else ``"rank1_candidate"``.  The identity is join_bound by convention."""
    if not isinstance(model, RaagModel):
        raise SpecError("classify_raag needs a RAAG model")
    rep, _ = model.cyclic_reduce(g)
    support = frozenset(model.vertex(s) for s in rep)
    if not support:
        return "join_bound"
    if any(support <= j for j in join_subgraphs(model)):
        return "join_bound"
    return "rank1_candidate"


def elementary_root(model: GroupModel, h: Element) -> Element:
    """Shortest ``r`` with ``r^k = h`` found among period-roots of the cyclic reduction."""
    rep, x = model.cyclic_reduce(h)
    n = len(rep)
    xi = model.inverse(x)
    for p in range(1, n + 1):
        if n % p:
            continue
        cand = rep[:p]
        if power(model, cand, n // p) == rep:
            return model.normalize(xi + cand + x)
    return h
