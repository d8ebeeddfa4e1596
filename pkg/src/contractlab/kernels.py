"""Compiled depth-first kernels for *local* models.

A model is local when its normal forms are exactly the words in which every
adjacent pair of letters is allowed (free groups, Z2, Z3 and free products of
these).  For such models a sphere is a walk count in a small automaton, and the
kernels below stream every normal form of length <= n without allocating.

All kernels take a fixed first letter so the work splits into disjoint
partitions; `run_partitioned` merges partitions in letter order, which makes
the result independent of scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import SpecError

MODE_COUNT = 0  # row1 unused
MODE_FACTOR = 1  # row1: elements conjugate into a free factor (or trivial/torsion)
MODE_NECKLACE = 2  # row0: conjugacy classes, row1: classes inside one factor
MODE_AVOID = 3  # row1: words containing neither pattern as a subword


@njit(nogil=True, cache=True)
def _into_factor(word, d, fac, inv):
    i = 0
    j = d - 1
    while True:
        if i > j:
            return True
        p = i
        while p <= j and fac[word[p]] == fac[word[i]]:
            p += 1
        if p > j:
            return True
        if fac[word[j]] != fac[word[i]]:
            return False
        q = j
        while fac[word[q - 1]] == fac[word[j]]:
            q -= 1
        # last syllable word[q..j] must be the inverse of the first word[i..p)
        if j - q + 1 != p - i:
            return False
        for t in range(p - i):
            if word[q + t] != inv[word[p - 1 - t]]:
                return False
        i = p
        j = q - 1


@njit(nogil=True, cache=True)
def _is_necklace_min(word, d, allowed):
    if d >= 2 and not allowed[word[d - 1], word[0]]:
        return False
    for r in range(1, d):
        for t in range(d):
            a = word[(r + t) % d]
            b = word[t]
            if a < b:
                return False
            if a > b:
                break
    return True


@njit(nogil=True, cache=True)
def _suffix_is(word, d, pat):
    m = pat.shape[0]
    if m == 0 or m > d:
        return False
    for t in range(m):
        if word[d - m + t] != pat[t]:
            return False
    return True


@njit(nogil=True, cache=True)
def dfs_kernel(allowed, fac, inv, pat1, pat2, first, n, mode):
    """Per-length counts (row 0: visited words, row 1: filtered) of normal forms
    starting with ``first`` of length 1..n."""
    k = allowed.shape[0]
    out = np.zeros((2, n + 1), dtype=np.int64)
    if n == 0:
        return out
    word = np.zeros(n, dtype=np.int64)
    nxt = np.zeros(n + 1, dtype=np.int64)
    hit = np.zeros(n + 1, dtype=np.bool_)
    depth = 1
    word[0] = first
    while True:
        # visit word[:depth] once, when nxt[depth] == 0
        if nxt[depth] == 0:
            if mode == MODE_COUNT:
                out[0, depth] += 1
            elif mode == MODE_FACTOR:
                out[0, depth] += 1
                if _into_factor(word, depth, fac, inv):
                    out[1, depth] += 1
            elif mode == MODE_NECKLACE:
                if _is_necklace_min(word, depth, allowed):
                    out[0, depth] += 1
                    same = True
                    for t in range(1, depth):
                        if fac[word[t]] != fac[word[0]]:
                            same = False
                            break
                    if same:
                        out[1, depth] += 1
            else:
                out[0, depth] += 1
                h = hit[depth - 1] or _suffix_is(word, depth, pat1) or _suffix_is(word, depth, pat2)
                hit[depth] = h
                if not h:
                    out[1, depth] += 1
        if depth == n or nxt[depth] >= k:
            nxt[depth] = 0
            depth -= 1
            if depth == 0:
                break
            continue
        c = nxt[depth]
        nxt[depth] = c + 1
        if allowed[word[depth - 1], c]:
            word[depth] = c
            depth += 1
            nxt[depth] = 0
    return out


@dataclass(frozen=True)
class LocalTables:
    allowed: np.ndarray
    fac: np.ndarray
    inv: np.ndarray


def local_tables(model) -> LocalTables:
    if not getattr(model, "local", False):
        raise SpecError(f"{model.label} is not a local model")
    k = len(model.ids)
    if tuple(model.ids) != tuple(range(k)):
        raise SpecError("local tables need a top-level model")
    allowed = np.zeros((k, k), dtype=np.bool_)
    for x in range(k):
        for y in range(k):
            allowed[x, y] = model.can_extend((x,), y)
    if model.kind == "free_product":
        fac = np.array([0 if model.left.owns(s) else 1 for s in range(k)], dtype=np.int64)
    else:
        fac = np.zeros(k, dtype=np.int64)
    inv = np.array([model.inv(s) for s in range(k)], dtype=np.int64)
    return LocalTables(allowed, fac, inv)


def default_threads() -> int:
    env = os.environ.get("LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise SpecError(f"LAB_THREADS must be an integer, got {env!r}") from None
    return 1


def run_partitioned(model, n, mode, threads=None, patterns=((), ())) -> np.ndarray:
    """Run a kernel over all first letters and merge.  Row 0/1 at index 0 hold
    the identity (counted as visited and filtered)."""
    tables = local_tables(model)
    threads = threads or default_threads()
    p1 = np.array(patterns[0], dtype=np.int64)
    p2 = np.array(patterns[1], dtype=np.int64)

    def job(first):
        return dfs_kernel(tables.allowed, tables.fac, tables.inv, p1, p2, first, n, mode)

    letters = list(range(len(model.ids)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(job, letters))
    else:
        parts = [job(x) for x in letters]
    total = np.zeros((2, n + 1), dtype=np.int64)
    for part in parts:
        total += part
    total[:, 0] = 1
    return total


# ---------------------------------------------------------------------------
# right-angled Artin distances (free groups are the edgeless case)


@njit(nogil=True, cache=True)
def _raag_push(buf, n, s, inv, vert, comm):
    for k in range(n - 1, -1, -1):
        t = buf[k]
        if vert[t] == vert[s]:
            if t == inv[s]:
                for q in range(k, n - 1):
                    buf[q] = buf[q + 1]
                return n - 1
            break
        if not comm[s, t]:
            break
    buf[n] = s
    return n + 1


@njit(nogil=True, cache=True)
def raag_dist_matrix(A, alen, B, blen, inv, vert, comm):
    """``out[i, j] = |A_i^-1 B_j|`` for reduced words stored as padded rows."""
    na, nb = A.shape[0], B.shape[0]
    out = np.empty((na, nb), dtype=np.int64)
    buf = np.empty(A.shape[1] + B.shape[1] + 1, dtype=np.int64)
    for i in range(na):
        for j in range(nb):
            n = 0
            for t in range(alen[i] - 1, -1, -1):
                buf[n] = inv[A[i, t]]
                n += 1
            for t in range(blen[j]):
                n = _raag_push(buf, n, B[j, t], inv, vert, comm)
            out[i, j] = n
    return out


def pack_words(words):
    width = max([len(w) for w in words] + [1])
    arr = np.zeros((len(words), width), dtype=np.int64)
    lens = np.zeros(len(words), dtype=np.int64)
    for i, w in enumerate(words):
        arr[i, :len(w)] = w
        lens[i] = len(w)
    return arr, lens
