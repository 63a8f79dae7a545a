"""Symmetric V-polytopes: Minkowski functional, spherical mean M_K, and
coordinate sections inside a scaled cross-polytope.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import make_rng, sample_blocks
from .errors import GeometryError, InvalidParameter
from .lattice import coordinate_subset
from .simplex import TOL, linprog_std

EXHAUSTIVE_MAX_N = 16


@dataclass(frozen=True)
class VPolytope:
    """Convex hull of a vertex list closed under x -> -x."""

    vertices: np.ndarray

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float, ndmin=2)
        if V.shape[0] < 2 or not np.all(np.isfinite(V)):
            raise InvalidParameter("a polytope needs finite vertices")
        for v in V:
            if np.abs(V + v).max(axis=1).min() > 1e-12:
                raise GeometryError("vertex list is not symmetric under x -> -x")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)

    @classmethod
    def symmetric_hull(cls, half) -> "VPolytope":
        H = np.array(half, dtype=float, ndmin=2)
        return cls(np.vstack([H, -H]))

    @classmethod
    def cross_polytope(cls, n: int, scale: float = 1.0) -> "VPolytope":
        return cls.symmetric_hull(scale * np.eye(n))

    @classmethod
    def sphere_approx(cls, n: int, count: int, seed: int = 0) -> "VPolytope":
        """Vertices on the unit sphere: a regular 2*count-gon for n = 2,
        otherwise ``count`` seeded uniform directions and their negatives."""
        if n == 2:
            ang = np.pi * np.arange(count) / count
            return cls.symmetric_hull(np.c_[np.cos(ang), np.sin(ang)])
        G = make_rng(seed, 301).standard_normal((count, n))
        return cls.symmetric_hull(G / np.linalg.norm(G, axis=1, keepdims=True))

    @property
    def n(self) -> int:
        return self.vertices.shape[1]

    def is_full_dimensional(self) -> bool:
        return int(np.linalg.matrix_rank(self.vertices, tol=1e-10)) == self.n

    def to_json(self):
        return {"vertices": self.vertices.tolist()}


def gauge(K: VPolytope, x) -> float:
    """||x||_K = min sum(lam) with V^T lam = x, lam >= 0."""
    x = np.asarray(x, dtype=float)
    V = K.vertices
    res = linprog_std(np.ones(len(V)), V.T, x)
    if res.status != "optimal":
        raise GeometryError("point outside the span of K: the body is degenerate")
    return res.value


def m_estimate(K: VPolytope, samples: int = 2000, seed: int = 0):
    """Monte Carlo mean of ||x||_K over uniform unit directions: (mean, stderr)."""
    if samples < 2:
        raise InvalidParameter("samples must be >= 2")
    if not K.is_full_dimensional():
        raise GeometryError("K is not full-dimensional; 0 is not an interior point")
    vals = np.empty(samples)
    for b, start, stop in sample_blocks(samples):
        G = make_rng(seed, b).standard_normal((stop - start, K.n))
        G /= np.linalg.norm(G, axis=1, keepdims=True)
        vals[start:stop] = [gauge(K, g) for g in G]
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))


def discretization_bound(K: VPolytope) -> float:
    """1/r - 1 for the inradius r of K.

    For K inside the unit ball with vertices on the sphere, 1 <= ||x||_K <= 1/r
    on the sphere, so M_K lies within 1/r - 1 of 1.
    """
    from scipy.spatial import ConvexHull

    hull = ConvexHull(K.vertices)
    r = float((-hull.equations[:, -1]).min())
    if r <= 0:
        raise GeometryError("0 is not an interior point of K")
    return 1.0 / r - 1.0


@dataclass
class SectionCertificate:
    sigma: tuple
    M: float
    max_l1: float
    holds: bool
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return {"sigma": list(self.sigma), "M": self.M, "max_l1": self.max_l1,
                "holds": self.holds, "provenance": "exact", **self.extra}


def section_max_l1(K: VPolytope, sigma) -> float:
    """max ||x||_1 over x in K with x_j = 0 off sigma, one LP per sign pattern.

    K is symmetric, so s and -s give the same value; the first sign is fixed.
    Returns 0 when the section is {0}.
    """
    sigma = coordinate_subset(sigma, K.n)
    if not sigma:
        raise InvalidParameter("sigma must be nonempty")
    V = K.vertices
    off = [j for j in range(K.n) if j not in sigma]
    # constraints: coordinates off sigma vanish, weights sum to one
    A = np.vstack([V[:, off].T, np.ones((1, len(V)))])
    b = np.r_[np.zeros(len(off)), 1.0]
    best = 0.0
    for rest in itertools.product((1.0, -1.0), repeat=len(sigma) - 1):
        s = np.r_[1.0, rest]
        res = linprog_std(-(V[:, list(sigma)] @ s), A, b)
        if res.status == "infeasible":
            return 0.0
        best = max(best, -res.value)
    return best


def _certificate(K, sigma, M, max_l1):
    k = len(sigma)
    holds = M * max_l1 <= math.sqrt(k) * (1 + TOL)
    extra = {"s": math.sqrt(k / K.n),
             "t": math.sqrt(k) / max_l1 if max_l1 > 0 else math.inf}
    return SectionCertificate(tuple(sigma), float(M), float(max_l1), bool(holds), extra)


def section_l1_check(K: VPolytope, sigma, M: float) -> SectionCertificate:
    if not M > 0:
        raise InvalidParameter("M must be positive")
    sigma = coordinate_subset(sigma, K.n)
    return _certificate(K, sigma, M, section_max_l1(K, sigma))


def _ratio(cert):
    return cert.M * cert.max_l1 / math.sqrt(len(cert.sigma))


def search_section(K: VPolytope, M: float, min_size: int = 1, mode: str = "greedy-drop"):
    """Largest sigma with |sigma| >= min_size whose certificate holds.

    Falls back to the failing certificate with the smallest
    M * max_l1 / sqrt(|sigma|); returns None when min_size > n.
    """
    n = K.n
    if min_size > n:
        return None
    min_size = max(1, min_size)
    if mode == "exhaustive":
        if n > EXHAUSTIVE_MAX_N:
            raise InvalidParameter(f"exhaustive section search needs n <= {EXHAUSTIVE_MAX_N}")
        best_fail = None
        for size in range(n, min_size - 1, -1):
            for sigma in itertools.combinations(range(n), size):
                cert = section_l1_check(K, sigma, M)
                if cert.holds:
                    return cert
                if best_fail is None or _ratio(cert) < _ratio(best_fail):
                    best_fail = cert
        return best_fail
    if mode != "greedy-drop":
        raise InvalidParameter(f"unknown search mode {mode!r}")
    sigma = list(range(n))
    cert = section_l1_check(K, sigma, M)
    best_fail = cert
    while not cert.holds and len(sigma) > min_size:
        trials = [section_l1_check(K, [j for j in sigma if j != i], M) for i in sigma]
        cert = min(trials, key=lambda c: (_ratio(c), c.sigma))
        sigma = list(cert.sigma)
        if _ratio(cert) < _ratio(best_fail):
            best_fail = cert
    return cert if cert.holds else best_fail
