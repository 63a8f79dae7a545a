"""Integer cells, octants and coordinate convexity.

A cell ``a + [0,1]^sigma`` lies in the coordinate convex hull of a finite set
``A`` exactly when ``A`` meets each of the ``2^|sigma|`` octants generated by
the cell. Everything here is built on that test.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import FunctionClass
from .errors import InvalidParameter, ResourceLimit

DEFAULT_MAX_N = 16
_GRID_CHUNK = 1 << 20


def as_points(A) -> np.ndarray:
    if isinstance(A, FunctionClass):
        return A.values
    P = np.asarray(A, dtype=float)
    if P.ndim == 1:
        P = P.reshape(-1, 1)
    if P.ndim != 2 or P.shape[0] == 0:
        raise InvalidParameter("point set must be a nonempty 2-D array")
    return P


def coordinate_subset(sigma, n: int) -> tuple:
    s = tuple(sorted(int(i) for i in sigma))
    if len(set(s)) != len(s) or any(i < 0 or i >= n for i in s):
        raise InvalidParameter(f"invalid coordinate subset {sigma!r} for n={n}")
    return s


@dataclass(frozen=True)
class IntegerCell:
    sigma: tuple
    anchor: tuple

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(int(i) for i in self.sigma))
        object.__setattr__(self, "anchor", tuple(int(a) for a in self.anchor))
        if len(self.sigma) != len(self.anchor):
            raise InvalidParameter("anchor must be indexed by sigma")

    @property
    def is_empty(self) -> bool:
        return not self.sigma

    def vertices(self) -> np.ndarray:
        a = np.array(self.anchor, dtype=float)
        return np.array([a + np.array(e) for e in itertools.product((0, 1), repeat=len(a))])

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        a = np.array(self.anchor, dtype=float)
        return bool(np.all((x >= a) & (x <= a + 1)))

    def to_json(self):
        return {"sigma": list(self.sigma), "anchor": list(self.anchor)}


EMPTY_CELL = IntegerCell((), ())


@dataclass(frozen=True)
class Octant:
    sigma: tuple
    vertex: tuple
    signs: tuple

    def __post_init__(self):
        if not self.sigma:
            raise InvalidParameter("an octant needs a nonempty sigma")

    def contains(self, x) -> bool:
        """Membership of a point already projected onto sigma."""
        x = np.asarray(x, dtype=float)
        return bool(np.all((x - np.array(self.vertex)) * np.array(self.signs) >= 0))


def octants_of_cell(cell: IntegerCell) -> list:
    if cell.is_empty:
        raise InvalidParameter("the empty cell generates no octants")
    out = []
    for signs in itertools.product((-1, 1), repeat=len(cell.sigma)):
        vertex = tuple(a + (1 if s > 0 else 0) for a, s in zip(cell.anchor, signs))
        out.append(Octant(cell.sigma, tuple(float(v) for v in vertex), signs))
    return out


def cconv_contains_cell(A, sigma, cell: IntegerCell) -> bool:
    P = as_points(A)
    sigma = coordinate_subset(sigma, P.shape[1])
    if cell.sigma != sigma:
        raise InvalidParameter("cell.sigma must equal sigma")
    Q = P[:, list(sigma)]
    for octant in octants_of_cell(cell):
        d = (Q - np.array(octant.vertex)) * np.array(octant.signs)
        if not np.any(np.all(d >= 0, axis=1)):
            return False
    return True


def cconv_membership(A, x) -> bool:
    """Brute force: x is in cconv(A) iff every octant with vertex x meets A."""
    P = as_points(A)
    x = np.asarray(x, dtype=float)
    if x.shape != (P.shape[1],):
        raise InvalidParameter("dimension of x differs from the point set")
    D = P - x
    for signs in itertools.product((-1, 1), repeat=P.shape[1]):
        if not np.any(np.all(D * np.array(signs) >= 0, axis=1)):
            return False
    return True


# ---------------------------------------------------------------- counting


def anchor_range(column, bounds=None):
    """Integer anchors a with ceil(min) <= a <= floor(max) - 1 (clipped to bounds)."""
    lo = math.ceil(column.min())
    hi = math.floor(column.max()) - 1
    if bounds is not None:
        lo = max(lo, int(bounds[0]))
        hi = min(hi, int(bounds[1]) - 1)
    return lo, hi


def anchor_classes(column, bounds=None):
    """Group the candidate anchors of one coordinate by the pair of point sets
    {p <= a} and {p >= a + 1}; anchors in one group behave identically.

    Returns (representatives, multiplicities); the representative is the
    smallest anchor of its group.
    """
    lo, hi = anchor_range(column, bounds)
    if lo > hi:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    vals = np.sort(column)
    cand = {lo}
    for v in np.unique(vals):
        f, c = math.floor(v), math.ceil(v)
        cand.update((f - 1, f, f + 1, c - 1, c, c + 1))
    starts = sorted(a for a in cand if lo <= a <= hi)
    sig = [(int(np.searchsorted(vals, a, "right")), int(np.searchsorted(vals, a + 1, "left")))
           for a in starts]
    reps = []
    prev = None
    for a, s in zip(starts, sig):
        if not reps or s != prev:
            reps.append(a)
        prev = s
    ends = reps[1:] + [hi + 1]
    counts = [e - r for r, e in zip(reps, ends)]
    return np.array(reps, dtype=np.int64), np.array(counts, dtype=np.int64)


def _pack(mask: np.ndarray) -> np.ndarray:
    """Pack a (c, m) boolean array into (c, W) uint64 words."""
    c, m = mask.shape
    W = max(1, -(-m // 64))
    padded = np.zeros((c, W * 64), dtype=bool)
    padded[:, :m] = mask
    return np.packbits(padded, axis=1, bitorder="little").view(np.uint64)


class _Projector:
    """Per-coordinate anchor classes and point masks for a fixed point set."""

    def __init__(self, P, bounds=None):
        self.P = P
        self.classes = []
        self.le = []
        self.ge = []
        for i in range(P.shape[1]):
            reps, counts = anchor_classes(P[:, i], bounds)
            self.classes.append((reps, counts))
            col = P[:, i]
            self.le.append(_pack(col[None, :] <= reps[:, None]))
            self.ge.append(_pack(col[None, :] >= reps[:, None] + 1))

    def eligible(self):
        return [i for i, (r, _) in enumerate(self.classes) if r.size]

    def cell_grid(self, sigma):
        """Boolean grid over anchor classes: True where the cell is in cconv(P_sigma A)."""
        sigma = list(sigma)
        shape = tuple(self.classes[i][0].size for i in sigma)
        if 0 in shape:
            return np.zeros(shape, dtype=bool)
        ok = np.ones(shape, dtype=bool)
        s = len(sigma)
        # chunk along the first axis to bound memory
        rows_per_chunk = max(1, _GRID_CHUNK // max(1, int(np.prod(shape[1:]))))
        for start in range(0, shape[0], rows_per_chunk):
            stop = min(shape[0], start + rows_per_chunk)
            block = ok[start:stop]
            for signs in itertools.product((False, True), repeat=s):
                acc = None
                for k, (i, up) in enumerate(zip(sigma, signs)):
                    m = self.ge[i] if up else self.le[i]
                    if k == 0:
                        m = m[start:stop]
                    view = m.reshape(tuple(m.shape[0] if j == k else 1 for j in range(s)) + (m.shape[1],))
                    acc = view if acc is None else acc & view
                block &= np.any(acc != 0, axis=-1)
        return ok

    def cell_count(self, sigma) -> int:
        grid = self.cell_grid(sigma)
        if grid.size == 0:
            return 0
        weight = np.ones((), dtype=np.int64)
        for i in sigma:
            weight = np.multiply.outer(weight, self.classes[i][1])
        return int((grid * weight).sum())

    def first_cell(self, sigma) -> Optional[IntegerCell]:
        grid = self.cell_grid(sigma)
        if not grid.any():
            return None
        idx = np.unravel_index(int(np.argmax(grid)), grid.shape)
        anchor = [int(self.classes[i][0][j]) for i, j in zip(sigma, idx)]
        return IntegerCell(tuple(sigma), tuple(anchor))


def _check_n(n, max_n):
    if n > max_n:
        raise ResourceLimit(f"n={n} exceeds the exhaustive projection limit {max_n}")


def _levelwise(proj: _Projector):
    """Yield (sigma, count) for every nonempty sigma with count > 0.

    A cell in cconv(P_sigma A) projects to a cell of every sub-projection, so
    only subsets whose every maximal proper subset has cells are tried.
    """
    level = {}
    for i in proj.eligible():
        c = proj.cell_count((i,))
        if c:
            level[(i,)] = c
            yield (i,), c
    while level:
        nxt = {}
        keys = sorted(level)
        for a, b in itertools.combinations(keys, 2):
            if a[:-1] != b[:-1]:
                continue
            sigma = a + (b[-1],)
            if any(sigma[:j] + sigma[j + 1:] not in level for j in range(len(sigma))):
                continue
            c = proj.cell_count(sigma)
            if c:
                nxt[sigma] = c
        for sigma in sorted(nxt):
            yield sigma, nxt[sigma]
        level = nxt


def cell_content_report(A, bounds=None, max_n: int = DEFAULT_MAX_N) -> dict:
    P = as_points(A)
    _check_n(P.shape[1], max_n)
    proj = _Projector(P, bounds)
    per_rank = [1] + [0] * P.shape[1]
    sigma_count = 1
    for sigma, c in _levelwise(proj):
        per_rank[len(sigma)] += c
        sigma_count += 1
    return {"total": sum(per_rank), "per_rank": per_rank, "sigma_count": sigma_count}


def cell_content(A, bounds=None, max_n: int = DEFAULT_MAX_N) -> int:
    """Sigma(A): integer cells in cconv of every coordinate projection, plus 1."""
    return cell_content_report(A, bounds, max_n)["total"]


def cell_content_naive(A, bounds=None, max_n: int = DEFAULT_MAX_N) -> int:
    """Reference count: every subset, every anchor, direct octant test."""
    P = as_points(A)
    n = P.shape[1]
    _check_n(n, max_n)
    total = 1
    for r in range(1, n + 1):
        for sigma in itertools.combinations(range(n), r):
            ranges = [anchor_range(P[:, i], bounds) for i in sigma]
            if any(lo > hi for lo, hi in ranges):
                continue
            for anchor in itertools.product(*(range(lo, hi + 1) for lo, hi in ranges)):
                if cconv_contains_cell(P, sigma, IntegerCell(sigma, anchor)):
                    total += 1
    return total


def comb_dimension_geometric(A, max_n: int = DEFAULT_MAX_N):
    """Largest |sigma| such that cconv(P_sigma A) contains an integer cell.

    Returns ``(v, (sigma, cell))``; the witness is the lexicographically first
    sigma of maximal size with its lexicographically first cell.
    """
    P = as_points(A)
    _check_n(P.shape[1], max_n)
    proj = _Projector(P)
    best = ()
    for sigma, _ in _levelwise(proj):
        if len(sigma) > len(best):
            best = sigma
    if not best:
        return 0, ((), EMPTY_CELL)
    return len(best), (best, proj.first_cell(best))
