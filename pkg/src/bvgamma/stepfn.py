"""Step functions on an interval and the three simplifying operators.

A step function holds value values[i] on the open interval
(breakpoints[i], breakpoints[i+1]); point values at breakpoints are
irrelevant to every integral computed here.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "StepFunction",
    "truncate",
    "segment",
    "rearrange",
    "oscillation",
    "total_variation",
    "gaps",
    "staircase_from_gaps",
]


@dataclass(frozen=True)
class StepFunction:
    breakpoints: tuple  # x0 < x1 < ... < xn
    values: tuple       # v1..vn, value v_i on (x_{i-1}, x_i)

    def __post_init__(self):
        xs = tuple(float(x) for x in self.breakpoints)
        vs = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", xs)
        object.__setattr__(self, "values", vs)
        if len(vs) < 1 or len(xs) != len(vs) + 1:
            raise ValueError("need n >= 1 pieces and n + 1 breakpoints")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @property
    def domain(self):
        return (self.breakpoints[0], self.breakpoints[-1])

    @property
    def lengths(self):
        xs = np.asarray(self.breakpoints)
        return tuple(np.diff(xs))

    def __call__(self, x):
        """Evaluate at x (value at a breakpoint is taken from the right piece)."""
        xs = np.asarray(self.breakpoints)
        vs = np.asarray(self.values)
        i = np.clip(np.searchsorted(xs, np.asarray(x, dtype=float), side="right") - 1,
                    0, len(vs) - 1)
        return vs[i][()]

    def canonical(self) -> "StepFunction":
        """Merge adjacent pieces with equal values."""
        xs = [self.breakpoints[0]]
        vs = []
        for x, v in zip(self.breakpoints[1:], self.values):
            if vs and v == vs[-1]:
                xs[-1] = x
            else:
                vs.append(v)
                xs.append(x)
        return StepFunction(tuple(xs), tuple(vs))

    def is_nondecreasing(self) -> bool:
        return all(b >= a for a, b in zip(self.values, self.values[1:]))

    def to_json(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "values": list(self.values)}

    @classmethod
    def from_json(cls, doc) -> "StepFunction":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls(tuple(doc["breakpoints"]), tuple(doc["values"]))

    @classmethod
    def from_csv(cls, path) -> "StepFunction":
        """Read (x, v) rows: breakpoints with the value holding to the right.

        The last row supplies the final breakpoint; its value field is ignored
        (may be empty).
        """
        xs, vs = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                xs.append(float(row[0]))
                vs.append(row[1].strip() if len(row) > 1 else "")
        values = tuple(float(v) for v in vs[:-1])
        return cls(tuple(xs), values)


def truncate(u: StepFunction, lo: float, hi: float) -> StepFunction:
    """Clamp all values into [lo, hi]."""
    if not lo < hi:
        raise ValueError("truncation needs lo < hi")
    vs = tuple(min(max(v, lo), hi) for v in u.values)
    return StepFunction(u.breakpoints, vs)


def _lattice_floor(v: float, delta: float) -> int:
    """floor(v / delta) with a relative guard against values sitting on the lattice."""
    q = v / delta
    k = math.floor(q)
    if (k + 1) - q < 1e-12 * max(1.0, abs(q)):
        k += 1
    return k


def segment(u: StepFunction, delta: float) -> StepFunction:
    """Snap every value down to the lattice delta * Z."""
    if not delta > 0:
        raise ValueError("segmentation step must be positive")
    vs = tuple(delta * _lattice_floor(v, delta) for v in u.values)
    return StepFunction(u.breakpoints, vs)


def rearrange(u: StepFunction) -> StepFunction:
    """Nondecreasing function with the same level-set measures."""
    order = sorted(range(len(u.values)), key=lambda i: u.values[i])
    xs = [u.breakpoints[0]]
    vs = []
    lengths = u.lengths
    for i in order:
        xs.append(xs[-1] + lengths[i])
        vs.append(u.values[i])
    # guard against accumulation drift at the right endpoint
    xs[-1] = u.breakpoints[-1]
    return StepFunction(tuple(xs), tuple(vs)).canonical()


def oscillation(u: StepFunction) -> float:
    return max(u.values) - min(u.values)


def total_variation(u: StepFunction) -> float:
    return math.fsum(abs(b - a) for a, b in zip(u.values, u.values[1:]))


def level_indices(u: StepFunction, delta: float) -> tuple:
    """Integer lattice indices of the values (values must sit on delta * Z)."""
    out = []
    for v in u.values:
        q = v / delta
        k = round(q)
        if abs(q - k) > 1e-12 * max(1.0, abs(q)):
            raise ValueError(f"value {v} is not a multiple of {delta}")
        out.append(int(k))
    return tuple(out)


def transition_abscissae(u: StepFunction, delta: float) -> tuple:
    """Points where a nondecreasing lattice staircase passes each level.

    Entry 0 is the left end of the domain; entry i (i >= 1) is the abscissa
    where the function reaches level min + i * delta.  Skipped levels repeat
    the same abscissa.
    """
    if not u.is_nondecreasing():
        raise ValueError("transition abscissae need a nondecreasing function")
    ks = level_indices(u, delta)
    rise = ks[-1] - ks[0]
    xs = [u.breakpoints[0]]
    for i in range(1, rise + 1):
        target = ks[0] + i
        # first piece at or above the target level starts at the transition
        for p, k in enumerate(ks):
            if k >= target:
                xs.append(u.breakpoints[p])
                break
    return tuple(xs)


def gaps(u: StepFunction, delta: float) -> tuple:
    """Lengths between consecutive level transitions of a lattice staircase.

    Zero entries mark levels of measure zero (a jump of more than one lattice
    step).
    """
    xs = transition_abscissae(u, delta)
    return tuple(b - a for a, b in zip(xs, xs[1:]))


def staircase_from_gaps(lengths, delta: float, start: float = 0.0,
                        tail: float = 1.0) -> StepFunction:
    """Monotone staircase with the given inter-transition lengths.

    Level i * delta holds between transitions i and i+1; the first entry of
    the tuple must be positive (the base level needs positive measure), and a
    final piece of length ``tail`` carries the top level.
    """
    lengths = [float(l) for l in lengths]
    if not lengths or lengths[0] <= 0:
        raise ValueError("first length must be positive")
    if any(l < 0 for l in lengths):
        raise ValueError("lengths must be nonnegative")
    xs = [start]
    vs = []
    level = 0
    pos = start
    for l in lengths:
        if l > 0:
            pos += l
            xs.append(pos)
            vs.append(level * delta)
        level += 1
    xs.append(pos + tail)
    vs.append(len(lengths) * delta)
    return StepFunction(tuple(xs), tuple(vs))
