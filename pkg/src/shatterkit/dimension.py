"""Fat-shattering (combinatorial) dimension v(F, t).

A coordinate set sigma is t-shattered when some level function h on sigma
admits, for every split sigma = minus + plus, a row f with f(i) <= h(i) on
minus and f(i) >= h(i) + t on plus. Levels can always be lowered to data
values of their coordinate, so the search only tries those.

Search state is the partition of rows by realized sign pattern, kept as
Python int bitmasks; two level prefixes with the same partition are
interchangeable and only the first (lexicographically smallest) is kept.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import FunctionClass
from .errors import InvalidParameter, ResourceLimit
from .lattice import as_points, coordinate_subset

DEFAULT_NODE_BUDGET = 10**7


@dataclass(frozen=True)
class ShatterWitness:
    sigma: tuple
    levels: tuple
    t: float

    def to_json(self):
        return {"sigma": list(self.sigma), "levels": list(self.levels), "t": self.t}


class _Levels:
    """For each coordinate: (level, rows <= level, rows >= level + t) as bitmasks."""

    def __init__(self, P: np.ndarray, t: float):
        self.t = t
        m, n = P.shape
        self.table = []
        for i in range(n):
            col = P[:, i]
            entries = []
            for level in np.unique(col):
                below = _mask(col <= level)
                above = _mask(col >= level + t)
                if below and above:
                    entries.append((float(level), below, above))
            self.table.append(entries)


def _mask(bools) -> int:
    out = 0
    for k in np.flatnonzero(bools):
        out |= 1 << int(k)
    return out


class _Counter:
    def __init__(self, budget):
        self.budget = budget
        self.used = 0

    def tick(self, k=1):
        self.used += k
        if self.used > self.budget:
            raise ResourceLimit(f"shattering search exceeded the node budget {self.budget}")


def _extend(states: dict, entries, counter: _Counter, min_part: int = 1) -> dict:
    """Refine every partition by one more coordinate; drop dead branches.

    Parts smaller than ``min_part`` rows are treated as dead: a part must hold
    at least 2^k rows to survive k more refinements.
    """
    out = {}
    for parts, levels in states.items():
        for level, below, above in entries:
            counter.tick()
            new = []
            for mask in parts:
                b = mask & below
                a = mask & above
                if b.bit_count() < min_part or a.bit_count() < min_part:
                    break
                new.append(b)
                new.append(a)
            else:
                key = tuple(new)
                if key not in out:
                    out[key] = levels + (level,)
    return out


def _check_t(t):
    if not (t > 0 and math.isfinite(t)):
        raise InvalidParameter("t must be a positive real")


def is_shattered(F, sigma, t: float, node_budget: int = DEFAULT_NODE_BUDGET) -> Optional[ShatterWitness]:
    _check_t(t)
    P = as_points(F)
    sigma = coordinate_subset(sigma, P.shape[1])
    if not sigma:
        raise InvalidParameter("sigma must be nonempty")
    lv = _Levels(P, t)
    counter = _Counter(node_budget)
    states = {((1 << P.shape[0]) - 1,): ()}
    for i in sigma:
        states = _extend(states, lv.table[i], counter)
        if not states:
            return None
    levels = next(iter(states.values()))
    return ShatterWitness(sigma, levels, float(t))


def fat_dimension(F, t: float, node_budget: int = DEFAULT_NODE_BUDGET, upper: Optional[int] = None):
    """v(F, t) and a witness (None when v = 0).

    Among shattered sets of maximal size the lexicographically smallest sigma
    is returned, with its lexicographically smallest data-valued level.
    """
    _check_t(t)
    P = as_points(F)
    lv = _Levels(P, t)
    eligible = [i for i, e in enumerate(lv.table) if e]
    distinct = len({row.tobytes() for row in P})
    cap = min(len(eligible), int(math.floor(math.log2(distinct))) if distinct > 1 else 0)
    if upper is not None:
        cap = min(cap, upper)
    counter = _Counter(node_budget)
    best = [0, None]
    root = {((1 << P.shape[0]) - 1,): ()}

    def dfs(pos, sigma, states):
        depth = len(sigma)
        if depth > best[0]:
            best[0] = depth
            best[1] = ShatterWitness(tuple(sigma), next(iter(states.values())), float(t))
        if best[0] >= cap:
            return
        for k in range(pos, len(eligible)):
            if depth + (len(eligible) - k) <= best[0]:
                return
            i = eligible[k]
            # to beat best the new partition must survive best - depth more splits
            need = 1 << max(0, best[0] - depth)
            nxt = _extend(states, lv.table[i], counter, need)
            if nxt:
                dfs(k + 1, sigma + [i], nxt)
                if best[0] >= cap:
                    return

    if cap > 0:
        dfs(0, [], root)
    if best[1] is None:
        return 0, None
    # pruned states may have hidden the smallest level; recompute it unpruned
    return best[0], is_shattered(P, best[1].sigma, t, node_budget)


def verify_witness(F, witness: ShatterWitness) -> bool:
    """Independent re-check of all 2^|sigma| splits."""
    P = as_points(F)
    sigma = list(witness.sigma)
    h = np.array(witness.levels, dtype=float)
    Q = P[:, sigma]
    for plus in itertools.product((False, True), repeat=len(sigma)):
        plus = np.array(plus)
        ok = np.where(plus, Q >= h + witness.t, Q <= h)
        if not np.any(np.all(ok, axis=1)):
            return False
    return True


def difference_breakpoints(F) -> np.ndarray:
    """Sorted positive differences f(i) - g(i): the only places v(F, .) can jump.

    v(F, .) is nonincreasing and left-continuous, constant on each interval
    (d_{j-1}, d_j] between consecutive breakpoints.
    """
    P = as_points(F)
    diffs = set()
    for i in range(P.shape[1]):
        vals = np.unique(P[:, i])
        d = vals[None, :] - vals[:, None]
        diffs.update(d[d > 0].tolist())
    return np.array(sorted(diffs))


def dimension_profile(F, ts, node_budget: int = DEFAULT_NODE_BUDGET) -> dict:
    ts = [float(t) for t in ts]
    if not ts:
        return {}
    if any(t <= 0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
        raise InvalidParameter("t grid must be positive and strictly increasing")
    P = as_points(F)
    out = {}

    def v_at(k, upper=None):
        if k not in out:
            out[k] = fat_dimension(P, ts[k], node_budget, upper=upper)[0]
        return out[k]

    # v is antitone, so equal values at both ends settle the whole range
    def fill(lo, hi):
        if hi - lo <= 1:
            return
        if out[lo] == out[hi]:
            for k in range(lo + 1, hi):
                out[k] = out[lo]
            return
        mid = (lo + hi) // 2
        v_at(mid, upper=out[lo])
        fill(lo, mid)
        fill(mid, hi)

    v_at(0)
    v_at(len(ts) - 1, upper=out[0])
    fill(0, len(ts) - 1)
    profile = {ts[k]: out[k] for k in range(len(ts))}
    vals = [profile[t] for t in ts]
    assert all(a >= b for a, b in zip(vals, vals[1:])), "profile must be nonincreasing"
    return profile


def profile_steps(F, node_budget: int = DEFAULT_NODE_BUDGET):
    """Exact step description of t -> v(F, t): list of (d_j, v on (d_{j-1}, d_j])."""
    bp = difference_breakpoints(F)
    if bp.size == 0:
        return []
    prof = dimension_profile(F, bp, node_budget)
    return [(float(t), int(prof[float(t)])) for t in bp]
