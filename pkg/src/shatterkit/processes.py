"""Gaussian and Rademacher suprema, entropy and dimension integrals, the
iteration bound, the Minkowski-sum class with small dimension but large
Rademacher average, and random coordinate selection experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import FunctionClass, Measure, make_rng, sample_blocks
from .dimension import DEFAULT_NODE_BUDGET, difference_breakpoints, fat_dimension, profile_steps
from .errors import InvalidParameter, ResourceLimit
from .lattice import as_points
from .lorentz import GeneratingFunction, comparison_function, lorentz_norm
from .packing import EXACT_CAP, BodySpec, _distinct_rows, _packing_from_matrix, distance_matrix

NOISES = ("gaussian", "rademacher")
ROW_CHUNK = 4096
MINKOWSKI_CAP = 2**20


@dataclass(frozen=True)
class SupremumEstimate:
    mean: float
    stderr: float
    samples: int
    noise: str

    def to_json(self):
        return {"mean": self.mean, "stderr": self.stderr, "samples": self.samples,
                "noise": self.noise, "provenance": f"monte-carlo({self.stderr!r})"}


def _noise(rng, noise, shape, dtype=np.float64):
    if noise == "gaussian":
        return rng.standard_normal(shape)
    return (rng.integers(0, 2, size=shape, dtype=np.int8) * 2 - 1).astype(dtype)


def _row_max(G, P, dtype=np.float64):
    """max over rows p of G @ p, chunked over rows."""
    best = np.full(G.shape[0], -np.inf)
    for start in range(0, P.shape[0], ROW_CHUNK):
        block = P[start:start + ROW_CHUNK].astype(dtype, copy=False)
        np.maximum(best, (G.astype(dtype, copy=False) @ block.T).max(axis=1), out=best)
    return best


def supremum_samples(F, noise: str, samples: int, seed: int) -> np.ndarray:
    """Per-sample values n^{-1/2} sup_f sum_i xi_i f(i).

    Block b of 1024 samples draws its noise from substream (seed, b), so the
    result does not depend on how blocks are scheduled.
    """
    if noise not in NOISES:
        raise InvalidParameter(f"noise must be one of {NOISES}")
    if samples < 2:
        raise InvalidParameter("samples must be >= 2")
    if isinstance(F, MinkowskiClass):
        n = F.n
        sup = F.noise_supremum
    else:
        P = as_points(F)
        n = P.shape[1]

        def sup(G):
            return _row_max(G, P)
    out = np.empty(samples)
    for b, start, stop in sample_blocks(samples):
        rng = make_rng(seed, b)
        G = _noise(rng, noise, (stop - start, n))
        out[start:stop] = sup(G)
    return out / math.sqrt(n)


def process_supremum(F, noise: str = "gaussian", samples: int = 10_000, seed: int = 0) -> SupremumEstimate:
    vals = supremum_samples(F, noise, samples, seed)
    return SupremumEstimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples)),
                            int(samples), noise)


# ---------------------------------------------------------------- integrals


@dataclass
class IntegralReport:
    value: float
    grid: list
    integrand: list
    lower: float = 0.0
    provenance: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return {"value": self.value, "lower": self.lower, "grid": self.grid,
                "integrand": self.integrand, "provenance": self.provenance, **self.extra}


def _step_samples(steps, lower):
    """Sample points of a left-continuous step function for exact trapezoid.

    ``steps`` lists (d_j, y_j) with y_j the value on (d_{j-1}, d_j], d_0 = 0.
    Each interval contributes its two endpoints with the same value, so the
    trapezoid rule over the samples integrates the steps exactly.
    """
    xs, ys = [], []
    prev = 0.0
    for d, y in steps:
        a = max(prev, lower)
        if d > a:
            xs += [a, d]
            ys += [y, y]
        prev = d
    if not xs:
        xs, ys = [lower, lower], [0.0, 0.0]
    return xs, ys


def _trapezoid(xs, ys) -> float:
    return float(np.trapezoid(np.asarray(ys, dtype=float), np.asarray(xs, dtype=float)))


def _check_grid(grid):
    g = [float(t) for t in grid]
    if not g or any(t <= 0 for t in g) or any(b <= a for a, b in zip(g, g[1:])):
        raise InvalidParameter("grid must be positive and strictly increasing")
    return g


def entropy_profile(F, mu: Optional[Measure] = None, cap: int = EXACT_CAP):
    """Exact step description of t -> D(F, L2(mu), t) at its breakpoints.

    Returns [(d_j, D(d_j), provenance)]; D is constant on (d_{j-1}, d_j].
    """
    P = as_points(F)
    rows = _distinct_rows(P)
    D = distance_matrix(P, BodySpec("lp", 2.0, mu))
    mode = "exact" if len(rows) <= cap else "greedy"
    sub = D[np.ix_(rows, rows)]
    levels = np.unique(sub[np.triu_indices(len(rows), 1)])
    levels = levels[levels > 0]
    out = []
    for d in levels:
        N, _ = _packing_from_matrix(D, float(d), mode, cap, rows=rows)
        out.append((float(d), math.log(N), "exact" if mode == "exact" else "greedy-bound"))
    return out


def dudley_integral(F, mu: Optional[Measure] = None, grid=None, seed: int = 0, c: float = 1.0,
                    samples: int = 2000, lower: Optional[float] = None, cap: int = EXACT_CAP) -> IntegralReport:
    """Integral of sqrt(D(F, L2(mu), t)) dt from the lower limit to infinity.

    The lower limit c n^{-1/2} E(F) involves E(F) itself; it is resolved in
    two passes: estimate E(F) by Monte Carlo, then integrate.
    """
    P = as_points(F)
    n = P.shape[1]
    extra = {}
    if lower is None:
        est = process_supremum(P, "gaussian", samples, seed)
        lower = c * est.mean / math.sqrt(n)
        extra["E_estimate"] = est.to_json()
        extra["c"] = c
    lower = max(0.0, float(lower))
    if grid is None:
        prof = entropy_profile(P, mu, cap)
        steps = [(d, math.sqrt(v)) for d, v, _ in prof]
        xs, ys = _step_samples(steps, lower)
        prov = sorted({p for _, _, p in prof}) or ["exact"]
    else:
        g = [t for t in _check_grid(grid) if t >= lower]
        xs, ys, prov = [], [], set()
        rows = _distinct_rows(P)
        D = distance_matrix(P, BodySpec("lp", 2.0, mu))
        mode = "exact" if len(rows) <= cap else "greedy"
        for t in g:
            N, _ = _packing_from_matrix(D, t, mode, cap, rows=rows)
            xs.append(t)
            ys.append(math.sqrt(math.log(N)))
            prov.add("exact" if mode == "exact" else "greedy-bound")
        prov = sorted(prov)
    return IntegralReport(_trapezoid(xs, ys), xs, ys, lower, prov, extra)


def comb_integral(F, grid=None, lower: float = 0.0, node_budget: int = DEFAULT_NODE_BUDGET) -> IntegralReport:
    """Integral of sqrt(v(F, t)) dt over [lower, infinity)."""
    P = as_points(F)
    lower = max(0.0, float(lower))
    if grid is None:
        steps = [(d, math.sqrt(v)) for d, v in profile_steps(P, node_budget)]
        xs, ys = _step_samples(steps, lower)
    else:
        xs = [t for t in _check_grid(grid) if t >= lower]
        ys = [math.sqrt(fat_dimension(P, t, node_budget)[0]) for t in xs]
    return IntegralReport(_trapezoid(xs, ys), xs, ys, lower, ["exact"])


def sup_t_sqrt_v(F, node_budget: int = DEFAULT_NODE_BUDGET) -> float:
    """sup_t t sqrt(v(F, t)); attained at a breakpoint since v is left-continuous."""
    steps = profile_steps(as_points(F), node_budget)
    return max((d * math.sqrt(v) for d, v in steps), default=0.0)


def iteration_bound(F, t: float, a: float, c: float = 1.0, jmax: Optional[int] = None,
                    node_budget: int = DEFAULT_NODE_BUDGET) -> float:
    """log(a) * sum_{j <= jmax} 4^j v(F, c a^j t)."""
    if not a > 2:
        raise InvalidParameter("a must exceed 2")
    if not (t > 0 and c > 0):
        raise InvalidParameter("t and c must be positive")
    P = as_points(F)
    bp = difference_breakpoints(P)
    top = float(bp[-1]) if bp.size else 0.0
    if jmax is None:
        jmax = 0
        while c * a ** jmax * t <= top:
            jmax += 1
    total = 0
    for j in range(jmax + 1):
        total += 4 ** j * fat_dimension(P, c * a ** j * t, node_budget)[0]
    assert c * a ** jmax * t > top or jmax is not None, "truncation must reach v = 0"
    return math.log(a) * total


# ---------------------------------------------------------------- no-Sudakov class


def random_vertices(N: int, n: int, seed: int, stream: int = 0) -> np.ndarray:
    """N independent uniform vertices of {-1, 1}^n as int8 rows."""
    rng = make_rng(seed, 101, stream)
    return (rng.integers(0, 2, size=(N, n), dtype=np.int8) * 2 - 1).astype(np.int8)


@dataclass
class MinkowskiClass:
    """The class sum_k scale_k * A_k, kept in factored form.

    Rows of the sum are indexed by one row choice per component; the
    materialized order is lexicographic in those choices.
    """

    components: list
    scales: list
    n: int
    subsampled: bool = False
    full_sizes: list = field(default_factory=list)
    tags: tuple = ()

    @property
    def size(self) -> int:
        return int(np.prod([len(A) for A in self.components], dtype=object))

    def materialize(self, cap: int = MINKOWSKI_CAP) -> FunctionClass:
        if self.size * self.n > cap * 64:
            raise ResourceLimit(f"Minkowski sum has {self.size} rows; materializing needs a smaller class")
        acc = np.zeros((1, self.n))
        for A, s in zip(self.components, self.scales):
            acc = (acc[:, None, :] + s * A.astype(float)[None, :, :]).reshape(-1, self.n)
        return FunctionClass(acc, tags=self.tags)

    def noise_supremum(self, G) -> np.ndarray:
        """sup over the sum = sum over components of each component's sup."""
        total = np.zeros(G.shape[0])
        exact32 = np.all(np.abs(G) == 1)
        for A, s in zip(self.components, self.scales):
            dtype = np.float32 if exact32 else np.float64
            total += s * _row_max(G, A, dtype)
        return total

    def coordinate_ranges(self) -> np.ndarray:
        """(components, n) array of per-coordinate ranges of scale_k * A_k."""
        return np.array([s * (A.max(axis=0).astype(float) - A.min(axis=0))
                         for A, s in zip(self.components, self.scales)])

    def dimension_bounds(self):
        """Certified upper bounds on v(F, t) as steps [(d, bound on (d_next, d])].

        If the tail H = sum_{l > k} scale_l A_l has coordinate ranges < t,
        two functions with the same head g in G = sum_{l <= k} cannot realize
        different patterns at height t, so v(F, t) <= log2 |G|. Also
        v <= n, and v = 0 above the largest coordinate range of F.
        """
        R = self.coordinate_ranges()
        K = len(self.components)
        # tail[k] = max_i sum_{l >= k} range_l(i); tail[0] is the range of F
        tail = [float(R[k:].sum(axis=0).max()) for k in range(K)] + [0.0]
        bits = np.cumsum([math.log2(len(A)) for A in self.components])
        steps = []
        for k in range(K):
            hi, lo = tail[k], tail[k + 1]
            if hi > lo:
                bound = int(min(self.n, math.floor(bits[k] + 1e-9)))
                steps.append((lo, hi, bound))
        return steps

    def sup_t_sqrt_v_upper(self) -> float:
        return max((hi * math.sqrt(b) for lo, hi, b in self.dimension_bounds()), default=0.0)


def nosudakov_levels(n: int, alpha_cap: float) -> int:
    """k1 = max k with 2^(4^k) <= exp(alpha_cap * n)."""
    k = 0
    while 4 ** (k + 1) * math.log(2) <= alpha_cap * n:
        k += 1
    return k


def build_nosudakov_class(n: int, alpha_cap: float = 1.0, seed: int = 0, cap: int = MINKOWSKI_CAP,
                          on_cap: str = "subsample") -> MinkowskiClass:
    """sum_{k=1}^{k1} 2^{-k} A_k with A_k = 2^(4^k) random vertices of {-1,1}^n.

    When the product of sizes exceeds ``cap`` and ``on_cap`` is "subsample",
    levels are filled in order k = 1, 2, ... with as many bits as remain; the
    rest keep a single random vertex. The result is tagged "subsampled".
    """
    if n < 16:
        raise InvalidParameter("n must be >= 16")
    if not 0 < alpha_cap <= 1:
        raise InvalidParameter("alpha_cap must lie in (0, 1]")
    k1 = nosudakov_levels(n, alpha_cap)
    if k1 < 1:
        raise InvalidParameter("2^4 <= exp(alpha_cap * n) fails: no level fits")
    full_bits = [4 ** k for k in range(1, k1 + 1)]
    budget = int(math.floor(math.log2(cap)))
    if sum(full_bits) > budget and on_cap != "subsample":
        raise ResourceLimit(f"Minkowski sum would have 2^{sum(full_bits)} rows (cap {cap}); "
                            "lower n or alpha_cap, or subsample the sum")
    comps, scales, remaining = [], [], budget
    for k, fb in zip(range(1, k1 + 1), full_bits):
        b = min(fb, remaining)
        remaining -= b
        comps.append(random_vertices(2 ** b, n, seed, k))
        scales.append(2.0 ** -k)
    sub = sum(full_bits) > budget
    return MinkowskiClass(comps, scales, n, sub, [2 ** fb if fb < 64 else math.inf for fb in full_bits],
                          ("subsampled",) if sub else ())


def _log_cdf_power(n: int, log_count: float):
    """Support s (ascending) of S = sum of n Rademachers and log P(max of N iid S <= s),
    N = exp(log_count), with N log P(S <= s) formed in log space."""
    from scipy.stats import binom

    s = np.arange(-n, n + 1, 2)
    # P(S > s) = P(#minus signs < (n - s) / 2)
    log_tail = binom.logcdf((n - s) // 2 - 1, n, 0.5)
    tail = np.exp(log_tail)
    with np.errstate(divide="ignore"):
        # log(-log(1 - tail)), ~ log_tail when tail is tiny
        llf = np.where(tail < 1e-8, log_tail, np.log(-np.log1p(-np.minimum(tail, 1.0))))
        out = -np.exp(np.minimum(log_count + llf, 700.0))
    out[-1] = 0.0
    return s, out


def max_rademacher_sums(n: int, log_count: float, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draws of the max of exp(log_count) iid sums of n Rademachers."""
    s, log_cdf = _log_cdf_power(n, log_count)
    idx = np.searchsorted(log_cdf, np.log(u), side="left")
    return s[np.minimum(idx, s.size - 1)].astype(float)


@dataclass(frozen=True)
class NoSudakovFull:
    """The full construction sum_k 2^{-k} A_k, |A_k| = 2^(4^k), kept symbolic.

    For a fixed sign vector eps, <eps, a> over uniform random vertices a are
    iid sums of n Rademachers, so sup over A_k is a max of 2^(4^k) of them.
    """
    n: int
    k1: int

    @property
    def log2_sizes(self):
        return [4 ** k for k in range(1, self.k1 + 1)]

    def dimension_bounds(self):
        """Same head/tail argument as MinkowskiClass, with the worst case range 2 per level."""
        ranges = [2.0 * 2.0 ** -k for k in range(1, self.k1 + 1)]
        tail = [sum(ranges[k:]) for k in range(self.k1)] + [0.0]
        bits = np.cumsum(self.log2_sizes)
        return [(tail[k + 1], tail[k], int(min(self.n, bits[k]))) for k in range(self.k1)]

    def sup_t_sqrt_v_upper(self) -> float:
        return max((hi * math.sqrt(b) for lo, hi, b in self.dimension_bounds()), default=0.0)

    def rademacher_samples(self, samples: int, seed: int) -> np.ndarray:
        out = np.zeros(samples)
        for b, start, stop in sample_blocks(samples):
            rng = make_rng(seed, 205, b)
            for k, bits in enumerate(self.log2_sizes, start=1):
                u = rng.random(stop - start)
                out[start:stop] += 2.0 ** -k * max_rademacher_sums(self.n, bits * math.log(2), u)
        return out / math.sqrt(self.n)

    def expected_rademacher(self, samples: int = 10_000, seed: int = 0) -> SupremumEstimate:
        v = self.rademacher_samples(samples, seed)
        se = float(v.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
        return SupremumEstimate(float(v.mean()), se, samples, "rademacher")

    def expected_rademacher_exact(self) -> float:
        total = 0.0
        for k, bits in enumerate(self.log2_sizes, start=1):
            s, log_cdf = _log_cdf_power(self.n, bits * math.log(2))
            cdf = np.exp(log_cdf)
            total += 2.0 ** -k * float(np.sum(s * np.diff(cdf, prepend=0.0)))
        return total / math.sqrt(self.n)


def nosudakov_full(n: int, alpha_cap: float = 1.0) -> NoSudakovFull:
    if n < 16:
        raise InvalidParameter("n must be >= 16")
    if not 0 < alpha_cap <= 1:
        raise InvalidParameter("alpha_cap must lie in (0, 1]")
    k1 = nosudakov_levels(n, alpha_cap)
    if k1 < 1:
        raise InvalidParameter("2^4 <= exp(alpha_cap * n) fails: no level fits")
    return NoSudakovFull(n, k1)


# ---------------------------------------------------------------- selection


SELECTION_KINDS = ("binomial", "discrepancy", "one-function", "reduction")


def _selectors(rng, shape, delta):
    return rng.random(shape) < delta


def _trial_blocks(trials, seed, body):
    successes = 0
    for b, start, stop in sample_blocks(trials):
        rng = make_rng(seed, 202, b)
        for _ in range(stop - start):
            successes += bool(body(rng))
    return successes


def selection_experiment(kind: str, params: dict, trials: int = 1000, seed: int = 0) -> dict:
    """Monte Carlo frequency of each random-selection lemma's conclusion.

    The random coordinate set keeps each index independently with
    probability delta = k / n.
    """
    if kind not in SELECTION_KINDS:
        raise InvalidParameter(f"unknown selection kind {kind!r}")
    if trials < 1:
        raise InvalidParameter("trials must be >= 1")
    p = dict(params)
    echo = {}
    if kind == "binomial":
        m, delta, eps, t = int(p["m"]), float(p["delta"]), float(p["eps"]), float(p["t"])
        c = float(p.get("c", 1.0))
        if not 0 < eps <= 1:
            raise InvalidParameter("hypothesis 0 < eps <= 1 fails")
        if not 0 < delta < 1:
            raise InvalidParameter("hypothesis 0 < delta < 1 fails")
        if not t >= eps * delta * m:
            raise InvalidParameter("hypothesis t >= eps * delta * m fails")

        def body(rng):
            return abs(_selectors(rng, m, delta).sum() - delta * m) <= t
        succ = _trial_blocks(trials, seed, body)
        bound = 2 * math.exp(-c * eps * t)
        echo = {"m": m, "delta": delta, "eps": eps, "t": t, "c": c,
                "tail_bound": bound, "tail_bound_holds": (1 - succ / trials) <= bound}
    elif kind == "discrepancy":
        n, gamma, k = int(p["n"]), float(p["gamma"]), float(p["k"])
        if not 0 < gamma <= 1:
            raise InvalidParameter("hypothesis 0 < gamma <= 1 fails")
        if not 0 < k <= n:
            raise InvalidParameter("hypothesis 0 < k <= n fails")
        if "Q" in p:
            Q = [np.asarray(S, dtype=int) for S in p["Q"]]
        else:
            size = math.ceil(gamma * n)
            qrng = make_rng(seed, 203)
            Q = [np.sort(qrng.choice(n, size, replace=False)) for _ in range(int(p.get("q", 10)))]
        for S in Q:
            if len(np.unique(S)) < gamma * n:
                raise InvalidParameter("hypothesis |S| >= gamma * n fails")
        c_min = math.log(len(Q) / 0.001) / (gamma * k)
        if "c" in p and len(Q) > 0.001 * math.exp(float(p["c"]) * gamma * k):
            raise InvalidParameter("hypothesis |Q| <= 0.001 exp(c gamma k) fails")
        masks = np.zeros((len(Q), n), dtype=bool)
        for j, S in enumerate(Q):
            masks[j, np.unique(S)] = True
        need = 0.99 * masks.sum(axis=1) / n

        def body(rng):
            sel = _selectors(rng, n, k / n)
            size = sel.sum()
            if size == 0:
                return False
            return bool(np.all((masks & sel).sum(axis=1) / size >= need))
        succ = _trial_blocks(trials, seed, body)
        echo = {"n": n, "gamma": gamma, "k": k, "q": len(Q), "c_min_for_hypothesis": c_min,
                "set_sizes": [int(x) for x in masks.sum(axis=1)]}
    elif kind == "one-function":
        f = np.asarray(p["f"], dtype=float)
        n = f.size
        psi = p["psi"] if isinstance(p["psi"], GeneratingFunction) else GeneratingFunction.parse(p["psi"])
        k, C = float(p["k"]), float(p["C"])
        base = lorentz_norm(f, Measure.uniform(n), psi)
        if base > 1 + 1e-12:
            raise InvalidParameter("hypothesis ||f||_psi(I) <= 1 fails")
        if not k > C:
            raise InvalidParameter("hypothesis k > C fails")

        def body(rng):
            sel = np.flatnonzero(_selectors(rng, n, k / n))
            # the empty selection has no measure; count it as vacuous
            if sel.size == 0:
                return True
            return lorentz_norm(f[sel], Measure.uniform(sel.size), psi) <= C
        succ = _trial_blocks(trials, seed, body)
        echo = {"n": n, "k": k, "C": C, "psi": psi.describe(), "norm_on_I": base}
    else:
        X = as_points(p["F"])
        n = X.shape[1]
        phi = p["phi"] if isinstance(p["phi"], GeneratingFunction) else GeneratingFunction.parse(p["phi"])
        psi = p["psi"] if isinstance(p["psi"], GeneratingFunction) else GeneratingFunction.parse(p["psi"])
        t, k = float(p["t"]), float(p["k"])
        mu = Measure.uniform(n)
        phin = np.array([lorentz_norm(x, mu, phi) for x in X])
        psin = np.array([lorentz_norm(x, mu, psi) for x in X])
        if np.any(psin > 1 + 1e-12):
            raise InvalidParameter("hypothesis ||x||_psi(I) <= 1 fails")
        if np.any(phin < t * (1 - 1e-12)):
            raise InvalidParameter("hypothesis ||x||_phi(I) >= t fails")
        comp = comparison_function(phi, psi, t)
        if "c" in p and len(X) > 0.001 * math.exp(float(p["c"]) * k / comp):
            raise InvalidParameter("hypothesis |F| <= 0.001 exp(c k / (phi|psi)(t)) fails")

        def body(rng):
            sel = np.flatnonzero(_selectors(rng, n, k / n))
            if sel.size == 0:
                return False
            mus = Measure.uniform(sel.size)
            return all(lorentz_norm(x[sel], mus, phi) >= 0.99 * v for x, v in zip(X, phin))
        succ = _trial_blocks(trials, seed, body)
        echo = {"n": n, "size": len(X), "t": t, "k": k, "phi": phi.describe(),
                "psi": psi.describe(), "comparison": comp}
    return {"kind": kind, "success_rate": succ / trials, "successes": succ, "trials": trials,
            "params_echo": echo}
