"""Generating functions, Lorentz norms and comparison functions.

The Lorentz norm of f for a generator phi is the smallest lambda with

    mu{|f| >= lambda * t} <= 1 / phi(t)   for all t > 0.

On a finite space the tail is a step function, so the infimum is attained at
one of the distinct values of |f|.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import Measure
from .errors import InvalidParameter, NumericFailure

BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class GeneratingFunction:
    """phi with phi(0) = 0, increasing to infinity.

    kind "power": phi(t) = t^p, p >= 1 (the weak-L_p family).
    kind "tower": phi(t) = exp(alpha^t - alpha) for t >= 1 and t on [0, 1).
    kind "table": piecewise linear through (0, 0) and the given knots,
    continued past the last knot with the last slope.
    """

    kind: str
    param: float = 1.0
    knots: Optional[tuple] = None

    def __post_init__(self):
        if self.kind == "power":
            if not (self.param >= 1 and math.isfinite(self.param)):
                raise InvalidParameter("power generator needs finite p >= 1")
        elif self.kind == "tower":
            if not self.param >= 2:
                raise InvalidParameter("tower generator needs alpha >= 2")
        elif self.kind == "table":
            self._check_table()
        else:
            raise InvalidParameter(f"unknown generator kind {self.kind!r}")

    def _check_table(self):
        if self.knots is None:
            raise InvalidParameter("table generator needs knots")
        xs, ys = (np.asarray(k, dtype=float) for k in self.knots)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 1:
            raise InvalidParameter("table knots must be two equal-length lists")
        if xs[0] != 0:
            xs, ys = np.r_[0.0, xs], np.r_[0.0, ys]
        if ys[0] != 0:
            raise InvalidParameter("table generator must have phi(0) = 0")
        dx = np.diff(xs)
        if np.any(dx <= 0):
            raise InvalidParameter("table abscissae must be strictly increasing")
        slopes = np.diff(ys) / dx
        if np.any(slopes <= 0):
            raise InvalidParameter("table generator must be increasing")
        if np.any(np.diff(slopes) < -1e-12 * np.abs(slopes[1:])):
            raise InvalidParameter("table generator must be convex")
        object.__setattr__(self, "knots", (tuple(xs.tolist()), tuple(ys.tolist())))

    # -- construction helpers

    @classmethod
    def power(cls, p):
        return cls("power", float(p))

    @classmethod
    def tower(cls, alpha=2.0):
        return cls("tower", float(alpha))

    @classmethod
    def table(cls, xs, ys):
        return cls("table", 0.0, (tuple(map(float, xs)), tuple(map(float, ys))))

    @classmethod
    def parse(cls, spec: str) -> "GeneratingFunction":
        """"power:2", "tower:2" or "table:<path>" (JSON {"t": [...], "phi": [...]} or 2-column CSV)."""
        kind, _, arg = spec.partition(":")
        if kind in ("power", "tower"):
            try:
                value = float(arg)
            except ValueError:
                raise InvalidParameter(f"bad generator parameter in {spec!r}") from None
            return cls(kind, value)
        if kind == "table":
            path = Path(arg)
            text = path.read_text()
            if path.suffix.lower() == ".json":
                doc = json.loads(text)
                return cls.table(doc["t"], doc["phi"])
            rows = [line.split(",") for line in text.splitlines() if line.strip()]
            return cls.table([r[0] for r in rows], [r[1] for r in rows])
        raise InvalidParameter(f"unknown generator spec {spec!r}")

    def describe(self) -> str:
        if self.kind == "table":
            return f"table[{len(self.knots[0])} knots]"
        return f"{self.kind}:{self.param:g}"

    # -- evaluation

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore"):
            if self.kind == "power":
                out = t ** self.param
            elif self.kind == "tower":
                a = self.param
                out = np.where(t >= 1, np.exp(a ** np.maximum(t, 1) - a), t)
            else:
                out = self._table_eval(t)
        return out if out.ndim else float(out)

    def _table_eval(self, t):
        xs, ys = (np.asarray(k) for k in self.knots)
        inside = np.interp(t, xs, ys)
        slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        return np.where(t > xs[-1], ys[-1] + slope * (t - xs[-1]), inside)

    def log(self, t: float) -> float:
        """log phi(t), finite far beyond where phi itself overflows."""
        if t <= 0:
            return -math.inf
        if self.kind == "power":
            return self.param * math.log(t)
        if self.kind == "tower":
            if t < 1:
                return math.log(t)
            try:
                return self.param ** t - self.param
            except OverflowError:
                return math.inf
        return math.log(float(self._table_eval(np.asarray(t))))

    def inverse(self, y: float) -> float:
        if y < 0:
            raise InvalidParameter("phi^{-1} needs y >= 0")
        if y == 0:
            return 0.0
        if self.kind == "power":
            return y ** (1.0 / self.param)
        if self.kind == "tower":
            if y < 1:
                return y
            a = self.param
            return math.log(a + math.log(y)) / math.log(a)
        return bisect_inverse(self, y)

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self(1.0) - 1.0) <= tol

    def is_convex(self) -> bool:
        # the tower generator kinks at t = 1 when log(alpha) < 1
        if self.kind == "tower":
            return math.log(self.param) >= 1
        return True


def bisect_inverse(phi: GeneratingFunction, y: float, rtol: float = 1e-15) -> float:
    """Monotone bisection for phi(x) = y; bracket grows from [1, 2]."""
    lo, hi = 1.0, 2.0
    it = 0
    while phi(lo) > y:
        lo /= 2.0
        it += 1
        if it > BISECT_MAX_ITER:
            raise NumericFailure("could not bracket phi^{-1} from below")
    while phi(hi) < y:
        lo, hi = hi, hi * 2.0
        it += 1
        if it > BISECT_MAX_ITER:
            raise NumericFailure("could not bracket phi^{-1} from above")
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if phi(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            return 0.5 * (lo + hi)
    raise NumericFailure("phi^{-1} bisection did not converge")


def _tail_levels(f, mu: Measure):
    """Distinct |f| values v_k (decreasing, positive) and m_k = mu{|f| >= v_k}."""
    f = np.asarray(f, dtype=float)
    if f.shape != (mu.n,):
        raise InvalidParameter("vector length differs from measure length")
    if not np.all(np.isfinite(f)):
        raise InvalidParameter("f must be finite")
    a = np.abs(f)
    keep = (mu.weights > 0) & (a > 0)
    a, w = a[keep], mu.weights[keep]
    if a.size == 0:
        return a, w
    order = np.argsort(-a, kind="stable")
    a, w = a[order], w[order]
    # rounding can push the running mass past 1, which would shrink phi^{-1}(1/m)
    cum = np.minimum(np.cumsum(w), 1.0)
    last = np.r_[a[1:] != a[:-1], True]
    return a[last], cum[last]


def lorentz_norm(f, mu: Measure, phi: GeneratingFunction) -> float:
    v, m = _tail_levels(f, mu)
    if v.size == 0:
        return 0.0
    return float(max(vk / phi.inverse(1.0 / mk) for vk, mk in zip(v, m)))


def lorentz_norm_bisection(f, mu: Measure, phi: GeneratingFunction, rtol: float = 1e-13) -> float:
    """Reference: bisection on lambda against the tail condition itself.

    The condition only needs checking at t = v_k / lambda since the tail
    mu{|f| >= lambda t} is constant on each (v_{k+1}/lambda, v_k/lambda].
    """
    v, m = _tail_levels(f, mu)
    if v.size == 0:
        return 0.0

    def ok(lam):
        with np.errstate(over="ignore"):
            return bool(np.all(m * np.asarray(phi(v / lam)) <= 1.0))

    lo, hi = 0.0, float(v[0])
    while not ok(hi):
        lo, hi = hi, hi * 2.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= rtol * hi:
            break
    return hi


def tower_norm(f, mu: Measure, alpha: float = 2.0) -> float:
    if not alpha >= 2:
        raise InvalidParameter("tower norm needs alpha >= 2")
    return lorentz_norm(f, mu, GeneratingFunction.tower(alpha))


def double_exp_mean(f, mu: Measure) -> float:
    """sum_i mu_i exp(exp |f_i|), the doubly exponential Orlicz-type functional."""
    f = np.abs(np.asarray(f, dtype=float))
    with np.errstate(over="ignore"):
        return float(np.dot(mu.weights, np.exp(np.exp(f))))


@dataclass(frozen=True)
class LorentzBall:
    generator: GeneratingFunction
    measure: Measure
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidParameter("ball radius must be positive")

    def norm(self, f) -> float:
        return lorentz_norm(f, self.measure, self.generator)

    def contains(self, f) -> bool:
        return self.norm(f) <= self.radius


def comparison_function(phi: GeneratingFunction, psi: GeneratingFunction, t: float,
                        tol: float = 1e-12) -> float:
    """(phi|psi)(t) = sup{phi(s) : phi(s) >= psi(t s)}; may return math.inf.

    Works with g(s) = log phi(s) - log psi(t s) on a geometric scan of s in
    [2^-200, 2^200], then refines the last sign change in log s by bisection.
    s = 0 is always feasible, so the result is >= 0.
    """
    if not t > 0:
        raise InvalidParameter("t must be positive")

    def feasible(log_s):
        s = math.exp(log_s)
        a, b = phi.log(s), psi.log(t * s)
        if math.isinf(a) and math.isinf(b):
            return None
        return a - b >= -tol

    grid = [k * math.log(2.0) for k in range(-200, 201)]
    flags = []
    for x in grid:
        f = feasible(x)
        if f is None:
            break
        flags.append(f)
    if flags and flags[-1]:
        return math.inf
    hits = [k for k, f in enumerate(flags) if f]
    if not hits:
        return 0.0
    k = hits[-1]
    lo, hi = grid[k], grid[k + 1]
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return float(phi(math.exp(lo)))


def power_law_comparison(p: float, q: float, t: float) -> float:
    """Closed form (t^p | t^q)(t) = t^{pq/(p-q)} for p < q."""
    return t ** (p * q / (p - q))
