"""Function classes on a finite domain, measures, norms and seeded randomness."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyInput, InvalidParameter, ParseError

SEED_MAX = 2**64 - 1
SAMPLE_BLOCK = 1024


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Measure:
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 1 or w.size == 0:
            raise InvalidParameter("measure needs a nonempty weight vector")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidParameter("measure weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise InvalidParameter(f"measure weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> "Measure":
        return cls(np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def support(self) -> np.ndarray:
        return self.weights > 0

    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))


@dataclass(frozen=True)
class FunctionClass:
    """A finite class of functions on {0..n-1}, one function per row.

    Rows keep insertion order. Duplicate rows are allowed; ``duplicate_rows``
    lists them so callers can report it.
    """

    values: np.ndarray
    labels: Optional[tuple] = None
    measure: Optional[Measure] = None
    tags: tuple = field(default=())

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim == 1:
            v = _frozen(v.reshape(1, -1))
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise InvalidParameter("a function class needs |F| >= 1 and n >= 1")
        if not np.all(np.isfinite(v)):
            raise InvalidParameter("function values must be finite")
        object.__setattr__(self, "values", v)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != v.shape[0]:
                raise InvalidParameter("one label per function is required")
            object.__setattr__(self, "labels", labels)
        if self.measure is not None and self.measure.n != v.shape[1]:
            raise InvalidParameter("measure length differs from domain size")
        object.__setattr__(self, "tags", tuple(self.tags))

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.size

    @property
    def duplicate_rows(self) -> list:
        seen = {}
        dups = []
        for i, row in enumerate(self.values):
            key = row.tobytes()
            if key in seen:
                dups.append((seen[key], i))
            else:
                seen[key] = i
        return dups

    def default_measure(self) -> Measure:
        return self.measure if self.measure is not None else Measure.uniform(self.n)

    def subset(self, rows: Sequence[int]) -> "FunctionClass":
        rows = list(rows)
        labels = None if self.labels is None else [self.labels[i] for i in rows]
        return FunctionClass(self.values[rows], labels, self.measure)

    def to_json(self) -> dict:
        out = {"values": self.values.tolist()}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        if self.measure is not None:
            out["measure"] = self.measure.weights.tolist()
        return out


def as_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise InvalidParameter("seed must be a 64-bit unsigned integer")
    return seed


def make_rng(seed, *stream) -> np.random.Generator:
    """Generator for ``seed`` and an optional substream key."""
    ss = np.random.SeedSequence(as_seed(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.default_rng(ss)


def sample_blocks(samples: int, block: int = SAMPLE_BLOCK):
    """Yield (block_index, start, stop) covering range(samples).

    Each block gets its own substream, so results do not depend on how the
    blocks are scheduled.
    """
    for b, start in enumerate(range(0, samples, block)):
        yield b, start, min(start + block, samples)


# ---------------------------------------------------------------- ingestion


def _parse_float(text, row, col):
    try:
        x = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"non-numeric entry {text!r}", row=row, col=col) from None
    if not math.isfinite(x):
        raise ParseError(f"non-finite entry {text!r}", row=row, col=col)
    return x


def _rows_to_class(rows, labels=None, measure=None) -> FunctionClass:
    if not rows:
        raise EmptyInput("no functions in input")
    width = len(rows[0])
    if width == 0:
        raise EmptyInput("functions have no domain points")
    for r, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(f"expected {width} entries, found {len(row)}", row=r)
    values = [[_parse_float(x, r, c) for c, x in enumerate(row, start=1)]
              for r, row in enumerate(rows, start=1)]
    mu = None
    if measure is not None:
        mu = Measure([_parse_float(x, None, c) for c, x in enumerate(measure, start=1)])
    return FunctionClass(np.array(values, dtype=float), labels, mu)


def parse_csv(text: str) -> FunctionClass:
    rows = [row for row in csv.reader(io.StringIO(text)) if row and any(c.strip() for c in row)]
    return _rows_to_class([[c.strip() for c in row] for row in rows])


def parse_json(text: str) -> FunctionClass:
    if not text.strip():
        raise EmptyInput("empty JSON document")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", row=exc.lineno) from None
    if not isinstance(doc, dict) or "values" not in doc:
        raise ParseError('JSON input needs a "values" array')
    rows = doc["values"]
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise ParseError('"values" must be a list of lists')
    return _rows_to_class(rows, doc.get("labels"), doc.get("measure"))


def load_class(path, format: Optional[str] = None) -> FunctionClass:
    path = Path(path)
    fmt = format or path.suffix.lstrip(".").lower()
    text = path.read_text()
    if fmt == "csv":
        return parse_csv(text)
    if fmt == "json":
        return parse_json(text)
    raise InvalidParameter(f"unknown class format {fmt!r}")


def dumps_class(F: FunctionClass, format: str = "json") -> str:
    # repr() of a float round-trips exactly
    if format == "json":
        return json.dumps(F.to_json())
    if format == "csv":
        return "".join(",".join(repr(float(x)) for x in row) + "\n" for row in F.values)
    raise InvalidParameter(f"unknown class format {format!r}")


def save_class(F: FunctionClass, path, format: Optional[str] = None) -> None:
    path = Path(path)
    path.write_text(dumps_class(F, format or path.suffix.lstrip(".").lower()))


# ---------------------------------------------------------------- norms


def lp_norm(f, mu: Measure, p: float) -> float:
    """(sum_i w_i |f_i|^p)^(1/p); the max over the support of mu for p = inf.

    p < 1 is allowed and returns the quasi-norm value.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (mu.n,):
        raise InvalidParameter("vector length differs from measure length")
    if not p > 0:
        raise InvalidParameter("p must be positive")
    a = np.abs(f)
    if math.isinf(p):
        s = mu.support
        return float(a[s].max()) if s.any() else 0.0
    m = a.max()
    if m == 0:
        return 0.0
    # factor out the max to keep large p from overflowing
    return float(m * np.dot(mu.weights, (a / m) ** p) ** (1.0 / p))


def affine_image(F: FunctionClass, scale: float, shift=None) -> FunctionClass:
    if scale == 0 or not math.isfinite(scale):
        raise InvalidParameter("scale must be finite and nonzero")
    if shift is None:
        shift = np.zeros(F.n)
    shift = np.asarray(shift, dtype=float)
    if shift.shape != (F.n,):
        raise InvalidParameter("shift length differs from domain size")
    return FunctionClass(scale * F.values + shift, F.labels, F.measure)


def split_atoms(F: FunctionClass, mu: Measure, tol: float = 1e-9, max_atoms: int = 10_000):
    """Replace a weighted domain by a uniform one by repeating columns.

    Finds the smallest q <= max_atoms with integer counts c_i, sum c_i = q and
    |w_i - c_i/q| <= tol. Returns the expanded class and the counts.
    """
    w = mu.weights
    for q in range(1, max_atoms + 1):
        c = np.rint(w * q).astype(int)
        if c.sum() == q and np.all(np.abs(w - c / q) <= tol):
            cols = np.repeat(np.arange(F.n), c)
            return FunctionClass(F.values[:, cols], F.labels), c
    raise InvalidParameter(f"no rational approximation within {tol} using <= {max_atoms} atoms")
