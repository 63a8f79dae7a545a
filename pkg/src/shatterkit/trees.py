"""Separating trees of finite classes.

A node B with split (i, a, gap) has sons B- = {x in B : x(i) <= a} and
B+ = {x in B : x(i) >= a + gap}; rows strictly between are dropped. Every
f in B+ and g in B- then satisfy f(i) >= g(i) + gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidParameter, ResourceLimit, StructureError
from .lattice import as_points, cell_content

STRATEGIES = ("exhaustive", "paper-median", "greedy-potential")
EXHAUSTIVE_CAP = 20


@dataclass(frozen=True)
class Split:
    coord: int
    threshold: float
    gap: float


@dataclass
class TreeNode:
    rows: tuple
    split: Optional[Split] = None
    minus: Optional[int] = None
    plus: Optional[int] = None

    @property
    def is_leaf(self) -> bool:
        return self.split is None


@dataclass
class SeparatingTree:
    nodes: list = field(default_factory=list)

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    def leaves(self) -> list:
        return [nd for nd in self.nodes if nd.is_leaf]

    @property
    def leaf_count(self) -> int:
        return len(self.leaves())

    def to_json(self, k: int = 0) -> dict:
        nd = self.nodes[k]
        out = {"rows": list(nd.rows)}
        if nd.split is not None:
            out["split"] = {"coord": nd.split.coord, "threshold": nd.split.threshold,
                            "gap": nd.split.gap}
            out["minus"] = self.to_json(nd.minus)
            out["plus"] = self.to_json(nd.plus)
        return out


def _split_rows(P, rows, i, a, gap):
    col = P[list(rows), i]
    minus = tuple(r for r, x in zip(rows, col) if x <= a)
    plus = tuple(r for r, x in zip(rows, col) if x >= a + gap)
    return minus, plus


def candidate_splits(P, rows, gap):
    """Valid (i, a, minus, plus) with both sons nonempty, a over data values."""
    out = []
    for i in range(P.shape[1]):
        for a in np.unique(P[list(rows), i]):
            minus, plus = _split_rows(P, rows, i, float(a), gap)
            if minus and plus:
                out.append((i, float(a), minus, plus))
    return out


def _potential(minus, plus, alpha):
    return len(minus) ** (1.0 / alpha) + len(plus) ** (1.0 / alpha)


def _choose_greedy(P, rows, gap, alpha):
    best, score = None, -1.0
    for cand in candidate_splits(P, rows, gap):
        s = _potential(cand[2], cand[3], alpha)
        if s > score + 1e-12:
            best, score = cand, s
    return best


def _choose_median(P, rows, gap, alpha):
    """Coordinate with the largest mean theta_0(2|x(i) - M| / gap), M the lower
    median; threshold in [M - gap, M] maximizing the son potential."""
    Q = P[list(rows)]
    scores = []
    for i in range(P.shape[1]):
        col = np.sort(Q[:, i])
        M = col[(len(col) - 1) // 2]
        with np.errstate(over="ignore"):
            expo = alpha ** (2 * np.abs(col - M) / gap) - alpha
            top = expo.max()
            if math.isinf(top):
                score = math.inf
            else:
                score = top + math.log(np.mean(np.exp(expo - top)))
        scores.append((score, -i))
    cands = candidate_splits(P, rows, gap)
    if not cands:
        return None
    for score, neg_i in sorted(scores, reverse=True):
        i = -neg_i
        col = np.sort(Q[:, i])
        M = col[(len(col) - 1) // 2]
        window = [c for c in cands if c[0] == i and M - gap <= c[1] <= M]
        if window:
            return max(window, key=lambda c: (_potential(c[2], c[3], alpha), -c[1]))
    return _choose_greedy(P, rows, gap, alpha)


def _exhaustive_plan(P, rows, gap, memo):
    """Best leaf count reachable from ``rows`` and the split achieving it."""
    if rows in memo:
        return memo[rows]
    best = (1, None)
    if len(rows) > 1:
        for cand in candidate_splits(P, rows, gap):
            total = _exhaustive_plan(P, cand[2], gap, memo)[0] + _exhaustive_plan(P, cand[3], gap, memo)[0]
            if total > best[0]:
                best = (total, cand)
    memo[rows] = best
    return best


def build_separating_tree(A, gap: float, alpha: float = 2.0, strategy: str = "greedy-potential") -> SeparatingTree:
    if not gap > 0:
        raise InvalidParameter("gap must be positive")
    if not alpha >= 2:
        raise InvalidParameter("alpha must be >= 2")
    if strategy not in STRATEGIES:
        raise InvalidParameter(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    P = as_points(A)
    if strategy == "exhaustive" and P.shape[0] > EXHAUSTIVE_CAP:
        raise ResourceLimit(f"exhaustive tree search limited to {EXHAUSTIVE_CAP} rows")
    memo = {}
    tree = SeparatingTree()

    def grow(rows):
        k = len(tree.nodes)
        tree.nodes.append(TreeNode(rows))
        if len(rows) <= 1:
            return k
        if strategy == "exhaustive":
            cand = _exhaustive_plan(P, rows, gap, memo)[1]
        elif strategy == "greedy-potential":
            cand = _choose_greedy(P, rows, gap, alpha)
        else:
            cand = _choose_median(P, rows, gap, alpha)
        if cand is None:
            return k
        i, a, minus, plus = cand
        node = tree.nodes[k]
        node.split = Split(i, a, float(gap))
        node.minus = grow(minus)
        node.plus = grow(plus)
        return k

    grow(tuple(range(P.shape[0])))
    return tree


def verify_separating_tree(T: SeparatingTree, A, gap: float) -> bool:
    P = as_points(A)
    m = P.shape[0]
    if not T.nodes:
        raise StructureError("tree has no nodes")
    for nd in T.nodes:
        if any(not 0 <= r < m for r in nd.rows):
            raise StructureError(f"row index out of range in node {nd.rows}")
        for child in (nd.minus, nd.plus):
            if child is not None and not 0 <= child < len(T.nodes):
                raise StructureError(f"dangling child index {child}")
    if tuple(sorted(T.root.rows)) != tuple(range(m)):
        return False
    seen = {0}
    stack = [0]
    while stack:
        nd = T.nodes[stack.pop()]
        if nd.split is None:
            if nd.minus is not None or nd.plus is not None:
                return False
            continue
        if nd.minus is None or nd.plus is None or nd.split.gap < gap:
            return False
        lo, hi = T.nodes[nd.minus], T.nodes[nd.plus]
        if not lo.rows or not hi.rows:
            return False
        parent = set(nd.rows)
        if not set(lo.rows) <= parent or not set(hi.rows) <= parent or set(lo.rows) & set(hi.rows):
            return False
        i = nd.split.coord
        if P[list(hi.rows), i].min() < P[list(lo.rows), i].max() + gap:
            return False
        for child in (nd.minus, nd.plus):
            if child in seen:
                return False
            seen.add(child)
            stack.append(child)
    return True


def leaves_separated(T: SeparatingTree, A, gap: float) -> bool:
    """Rows in different leaves are at sup distance >= gap."""
    P = as_points(A)
    leaves = [nd.rows for nd in T.leaves()]
    for a in range(len(leaves)):
        for b in range(a + 1, len(leaves)):
            d = np.abs(P[list(leaves[a])][:, None, :] - P[list(leaves[b])][None, :, :]).max(axis=2)
            if d.min() < gap:
                return False
    return True


def leaves_vs_cell_content(A, gap: float = 2.0, strategy: str = "greedy-potential", alpha: float = 2.0,
                           max_n: int = 16) -> dict:
    T = build_separating_tree(A, gap, alpha, strategy)
    sigma = cell_content(A, max_n=max_n)
    leaves = T.leaf_count
    return {"leaves": leaves, "sigma": sigma, "holds": leaves <= sigma, "strategy": strategy}
