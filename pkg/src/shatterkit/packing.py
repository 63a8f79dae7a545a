"""Packing and covering numbers of finite sets, metric entropies.

Packing uses separation ``||f - g|| >= t`` and is solved exactly as a
maximum clique on the separation graph (small sets) or bounded from below by
greedy selection. Covering uses greedy set cover with centers taken from the
set itself; its lower bound is a packing at the body's diameter scale.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import FunctionClass, Measure, lp_norm, make_rng
from .errors import InvalidParameter, ResourceLimit
from .lattice import as_points
from .lorentz import GeneratingFunction, lorentz_norm

EXACT_CAP = 40
# float slack for separation ties such as sqrt(2/n) computed two ways
REL_TOL = 1e-12
# candidate-anchors x points entries allowed for cube covers
ANCHOR_BUDGET = 4_000_000


@dataclass(frozen=True)
class BodySpec:
    """A symmetric body used as a unit ball, or the unit cube [0,1]^n.

    kind "lp": L_p(mu) ball (mu uniform when omitted).
    kind "lorentz": Lambda_phi(mu) ball.
    kind "ellipsoid": {x : x^T Q x <= 1}; Q given as a diagonal vector or SPD matrix.
    kind "cube": translates c + r[0,1]^n for covering; sup metric for packing.
    """

    kind: str
    p: float = 2.0
    measure: Optional[Measure] = None
    generator: Optional[GeneratingFunction] = None
    matrix: Optional[np.ndarray] = None
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidParameter("body radius must be positive")
        if self.kind == "lp":
            if not self.p > 0:
                raise InvalidParameter("p must be positive")
        elif self.kind == "lorentz":
            if self.generator is None:
                raise InvalidParameter("lorentz body needs a generator")
        elif self.kind == "ellipsoid":
            Q = np.asarray(self.matrix, dtype=float)
            if Q.ndim == 1:
                Q = np.diag(Q)
            if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or not np.allclose(Q, Q.T, rtol=0, atol=1e-12):
                raise InvalidParameter("ellipsoid matrix must be symmetric")
            if np.linalg.eigvalsh(Q).min() <= 0:
                raise InvalidParameter("ellipsoid matrix must be positive definite")
            object.__setattr__(self, "matrix", Q)
        elif self.kind != "cube":
            raise InvalidParameter(f"unknown body kind {self.kind!r}")

    @classmethod
    def parse(cls, spec: str, n: int, radius: float = 1.0) -> "BodySpec":
        """"lp:2", "lp:inf", "tower:2", "power:2" (Lorentz), "cube", "ellipsoid:d1,d2,..."."""
        kind, _, arg = spec.partition(":")
        if kind == "lp":
            return cls("lp", p=float(arg or 2), radius=radius)
        if kind in ("tower", "power", "table"):
            return cls("lorentz", generator=GeneratingFunction.parse(spec), radius=radius)
        if kind == "cube":
            return cls("cube", radius=radius)
        if kind == "ellipsoid":
            diag = [float(x) for x in arg.split(",")] if arg else [1.0] * n
            return cls("ellipsoid", matrix=np.array(diag), radius=radius)
        raise InvalidParameter(f"unknown body spec {spec!r}")

    @property
    def symmetric(self) -> bool:
        return self.kind != "cube"

    def describe(self) -> str:
        if self.kind == "lp":
            return f"lp:{self.p:g}"
        if self.kind == "lorentz":
            return f"lorentz:{self.generator.describe()}"
        return self.kind

    def norm(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.kind == "lp":
            mu = self.measure or Measure.uniform(x.size)
            return lp_norm(x, mu, self.p)
        if self.kind == "lorentz":
            mu = self.measure or Measure.uniform(x.size)
            return lorentz_norm(x, mu, self.generator)
        if self.kind == "ellipsoid":
            return float(math.sqrt(max(0.0, x @ self.matrix @ x)))
        return float(np.abs(x).max())


def distance_matrix(F, body: BodySpec) -> np.ndarray:
    P = as_points(F)
    m, n = P.shape
    if body.kind in ("lp", "cube"):
        mu = body.measure or Measure.uniform(n)
        p = math.inf if body.kind == "cube" else body.p
        cols = np.flatnonzero(mu.support) if body.kind == "lp" else np.arange(n)
        # accumulate one coordinate at a time on contiguous m x m arrays
        top = np.zeros((m, m))
        for i in cols:
            np.maximum(top, np.abs(P[None, :, i] - P[:, None, i]), out=top)
        if math.isinf(p):
            return top
        safe = np.where(top > 0, top, 1.0)
        acc = np.zeros((m, m))
        for i in cols:
            acc += mu.weights[i] * (np.abs(P[None, :, i] - P[:, None, i]) / safe) ** p
        return top * acc ** (1.0 / p)
    D = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            D[i, j] = D[j, i] = body.norm(P[i] - P[j])
    return D


def separated(D: np.ndarray, t: float, strict: bool = False) -> np.ndarray:
    """Adjacency of the separation graph: d >= t (or d > t when strict)."""
    if strict:
        adj = D > t * (1 + REL_TOL)
    else:
        adj = D >= t * (1 - REL_TOL)
    np.fill_diagonal(adj, False)
    return adj


# ---------------------------------------------------------------- cliques


def greedy_clique(adj: np.ndarray, D: Optional[np.ndarray] = None) -> list:
    """Larger of first-fit in index order and farthest-point insertion."""
    m = adj.shape[0]
    first = []
    for i in range(m):
        if all(adj[i, j] for j in first):
            first.append(i)
    far = [0]
    if D is not None:
        cand = np.array([adj[0, j] for j in range(m)])
        while cand.any():
            mind = D[far].min(axis=0)
            mind = np.where(cand, mind, -np.inf)
            k = int(np.argmax(mind))
            far.append(k)
            cand &= adj[k]
    best = far if len(far) > len(first) else first
    return sorted(best)


def max_clique(adj: np.ndarray, seed_clique=None) -> list:
    """Exact maximum clique by branch and bound with greedy colouring bounds."""
    m = adj.shape[0]
    if m == 0:
        return []
    # relabel so bit k is the k-th vertex by decreasing degree; colouring and
    # branching then follow degree order
    order = sorted(range(m), key=lambda i: (-int(adj[i].sum()), i))
    pos = {v: k for k, v in enumerate(order)}
    nbr = [0] * m
    for k, v in enumerate(order):
        for j in np.flatnonzero(adj[v]):
            nbr[k] |= 1 << pos[int(j)]
    best = [pos[v] for v in seed_clique] if seed_clique else [0]

    def colour_bound(P):
        """Sequential colouring of P; returns vertices with their colour numbers."""
        verts, colours = [], []
        uncoloured = P
        c = 0
        while uncoloured:
            c += 1
            avail = uncoloured
            while avail:
                low = avail & -avail
                v = low.bit_length() - 1
                avail &= ~low & ~nbr[v]
                uncoloured &= ~low
                verts.append(v)
                colours.append(c)
        return verts, colours

    def expand(R, P):
        nonlocal best
        verts, colours = colour_bound(P)
        for k in range(len(verts) - 1, -1, -1):
            if len(R) + colours[k] <= len(best):
                return
            v = verts[k]
            R2 = R + [v]
            P2 = P & nbr[v]
            if P2:
                expand(R2, P2)
            elif len(R2) > len(best):
                best = R2
            P &= ~(1 << v)

    expand([], (1 << m) - 1)
    return sorted(order[k] for k in best)


# ---------------------------------------------------------------- packing


@dataclass(frozen=True)
class PackingCertificate:
    indices: tuple
    distances: np.ndarray
    t: float
    exact: bool
    strict: bool = False

    def verify(self) -> bool:
        D = self.distances
        off = ~np.eye(len(self.indices), dtype=bool)
        if self.strict:
            return bool(np.all(D[off] > self.t * (1 + REL_TOL)))
        return bool(np.all(D[off] >= self.t * (1 - REL_TOL)))

    def to_json(self):
        return {"indices": list(self.indices), "t": self.t,
                "provenance": "exact" if self.exact else "greedy-bound"}


def _distinct_rows(P):
    seen, keep = set(), []
    for i, row in enumerate(P):
        key = row.tobytes()
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return keep


def _packing_from_matrix(D, t, mode, cap, strict=False, rows=None):
    m = D.shape[0]
    rows = list(range(m)) if rows is None else rows
    sub = D[np.ix_(rows, rows)]
    adj = separated(sub, t, strict)
    seedc = greedy_clique(adj, sub)
    if mode == "greedy":
        chosen, exact = seedc, False
    elif mode == "exact":
        if len(rows) > cap:
            raise ResourceLimit(f"exact packing limited to {cap} distinct points, got {len(rows)}")
        chosen, exact = max_clique(adj, seedc), True
    else:
        raise InvalidParameter(f"unknown packing mode {mode!r}")
    idx = tuple(rows[i] for i in chosen)
    return len(idx), PackingCertificate(idx, D[np.ix_(idx, idx)], float(t), exact, strict)


def packing_number(F, body: BodySpec, t: float, mode: str = "exact", cap: int = EXACT_CAP):
    """Largest subset with pairwise body-distance >= t (radius ignored)."""
    if not t > 0:
        raise InvalidParameter("t must be positive")
    P = as_points(F)
    D = distance_matrix(P, body)
    # duplicates are at distance 0 and never enter a packing together
    return _packing_from_matrix(D, t, mode, cap, rows=_distinct_rows(P))


def entropy(F, body: BodySpec, t: float, mode: str = "exact", cap: int = EXACT_CAP) -> float:
    N, _ = packing_number(F, body, t, mode, cap)
    return math.log(N)


def entropy_linfty(F, t: float, mode: str = "exact", cap: int = EXACT_CAP) -> float:
    return entropy(F, BodySpec("cube"), t, mode, cap)


def kp_entropy_lower(F, t: float, budget: int = 200, seed: int = 0, cap: int = EXACT_CAP):
    """Lower bound on sup_mu D(F, L2(mu), t) by restarts plus coordinate ascent.

    ``budget`` counts entropy evaluations. The uniform measure is evaluated
    first, so the result is never below the uniform entropy.
    """
    if not t > 0:
        raise InvalidParameter("t must be positive")
    if budget < 1:
        raise InvalidParameter("budget must be >= 1")
    P = as_points(F)
    n = P.shape[1]
    rng = make_rng(seed, 0)
    used = 0

    def value(w):
        nonlocal used
        used += 1
        return entropy(P, BodySpec("lp", 2.0, Measure(w)), t, "exact", cap)

    def normalized(w):
        w = np.asarray(w, dtype=float)
        w = w / w.sum()
        # absorb rounding so the weights sum to 1 within 1e-12
        w[np.argmax(w)] += 1.0 - w.sum()
        return w

    best_w = normalized(np.ones(n))
    best = value(best_w)
    factors = (0.0, 0.5, 2.0, 4.0)
    start = best_w
    while used < budget:
        cur_w, cur = start, value(start) if start is not best_w else best
        improved = True
        while improved and used < budget:
            improved = False
            for i in range(n):
                for fac in factors:
                    if used >= budget:
                        break
                    w = cur_w.copy()
                    w[i] *= fac
                    if w.sum() <= 0:
                        continue
                    w = normalized(w)
                    val = value(w)
                    if val > cur + 1e-12:
                        cur, cur_w, improved = val, w, True
        if cur > best + 1e-12:
            best, best_w = cur, cur_w
        start = normalized(rng.dirichlet(np.ones(n)))
    return best, Measure(best_w)


# ---------------------------------------------------------------- covering


def _signed_extremes(P):
    """min_i and max_i of P[q, i] - P[c, i] for every pair (c, q)."""
    m, n = P.shape
    lo = np.full((m, m), np.inf)
    hi = np.full((m, m), -np.inf)
    for i in range(n):
        d = P[None, :, i] - P[:, None, i]
        np.minimum(lo, d, out=lo)
        np.maximum(hi, d, out=hi)
    return lo, hi


def _cube_anchors(P):
    """Candidate lower corners for cube translates, and each point's own anchor.

    A cube in an optimal cover can be pushed up along each axis until its lower
    face meets a covered point, so anchors drawn from the product of the
    per-axis coordinate values lose nothing. Large products fall back to the
    points themselves.
    """
    m, n = P.shape
    axes = [np.unique(P[:, i]) for i in range(n)]
    dims = tuple(len(a) for a in axes)
    if math.prod(dims) * m > ANCHOR_BUDGET:
        return P, np.arange(m)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    own = np.ravel_multi_index([np.searchsorted(axes[i], P[:, i]) for i in range(n)], dims)
    return grid, own


def _cover_and_distance(P, body: BodySpec):
    """(covers, own, centers, D): covers[c, q] when point q lies in the translate
    placed at centers[c]; own[q] indexes the translate centered at q itself;
    D holds the point distances used for the packing lower bound."""
    r = body.radius
    m = P.shape[0]
    if body.kind == "cube":
        lo, hi = _signed_extremes(P)
        centers, own = _cube_anchors(P)
        cov = np.ones((len(centers), m), dtype=bool)
        for i in range(P.shape[1]):
            d = P[None, :, i] - centers[:, None, i]
            cov &= (d >= -r * REL_TOL) & (d <= r * (1 + REL_TOL))
        return cov, own, centers, np.maximum(hi, -lo)
    D = distance_matrix(P, body)
    return D <= r * (1 + REL_TOL), np.arange(m), P, D


def greedy_cover(P, body: BodySpec) -> np.ndarray:
    """Centers of the smaller of two greedy covers of the rows of P.

    Max-gain: repeatedly take the candidate covering most uncovered points.
    First-fit: repeatedly center a translate at the lexicographically smallest
    uncovered point (the optimal rule for intervals, exact on grid boxes).
    Symmetric bodies use centers in P; cube anchors are described in
    ``_cube_anchors``.
    """
    P = as_points(P)
    cov, own, centers, _ = _cover_and_distance(P, body)
    return centers[_greedy_cover_indices(P, cov, own)]


def _greedy_cover_indices(P, cov, own) -> list:
    m = P.shape[0]
    uncovered = np.ones(m, dtype=bool)
    gain_centers = []
    # lazy evaluation: gains only shrink, so a refreshed top entry that still
    # beats the next stale bound is the true maximum (ties: lowest index)
    heap = [(-int(g), c) for c, g in enumerate(cov.sum(axis=1)) if g]
    heapq.heapify(heap)
    while uncovered.any():
        while True:
            neg, c = heapq.heappop(heap)
            g = int((cov[c] & uncovered).sum())
            if not heap or (-g, c) <= heap[0]:
                break
            heapq.heappush(heap, (-g, c))
        gain_centers.append(c)
        uncovered &= ~cov[c]
    order = np.lexsort(P.T[::-1])
    uncovered = np.ones(m, dtype=bool)
    fit_centers = []
    for q in order:
        if uncovered[q]:
            fit_centers.append(int(own[q]))
            uncovered &= ~cov[own[q]]
    return fit_centers if len(fit_centers) < len(gain_centers) else gain_centers


def covering_number(A, body: BodySpec, mode: str = "sandwich", cap: int = EXACT_CAP):
    """(lower, upper) bounds on the number of translates of radius*body covering A.

    Upper: greedy set cover, centers in A for symmetric bodies; cube
    translates c + r[0,1]^n are anchored on the product grid of coordinate
    values. Lower: a set pairwise farther apart than any two
    points of one translate (2r for symmetric bodies, r in sup metric for the
    cube) needs one translate per point. mode "sandwich" solves that packing
    exactly when small enough, mode "greedy" never does.
    """
    P = as_points(A)
    rows = _distinct_rows(P)
    Q = P[rows]
    cov, own, _, D = _cover_and_distance(Q, body)
    upper = len(_greedy_cover_indices(Q, cov, own))
    scale = body.radius if body.kind == "cube" else 2 * body.radius
    pmode = "exact" if mode == "sandwich" and len(rows) <= cap else "greedy"
    if mode not in ("sandwich", "greedy"):
        raise InvalidParameter(f"unknown covering mode {mode!r}")
    lower, _ = _packing_from_matrix(D, scale, pmode, cap, strict=True)
    assert lower <= upper, "covering sandwich violated"
    return lower, upper


def box_grid(sides, step: float = 1.0) -> np.ndarray:
    """Grid points of prod_i [0, a_i] with the given step."""
    axes = [np.arange(0, a + step / 2, step) if a > 0 else np.zeros(1) for a in sides]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)
