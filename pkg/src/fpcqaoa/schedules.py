"""Schedule functions F1 (mixer), F2 (problem) and F3 (auxiliary bias) on s in [0, 1].

Each schedule is a monotone piecewise-cubic Hermite interpolant through its two
fixed boundary values and ``n_p`` trainable values on the uniform grid
``s_j = j / (n_p + 1)``.  Slopes follow the Fritsch-Carlson construction, so each
piece stays between the values at its two ends.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from fpcqaoa.ising import InvalidInputError

BOUNDARY = {1: (1.0, 0.0), 2: (0.0, 1.0), 3: (0.0, 0.0)}


class ScheduleDomainError(ValueError):
    pass


def fritsch_carlson_slopes(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    h = np.diff(x)
    delta = np.diff(y) / h
    m = np.empty_like(y)
    m[0] = delta[0]
    m[-1] = delta[-1]
    if y.size > 2:
        left, right = delta[:-1], delta[1:]
        same = (left * right) > 0
        m[1:-1] = np.where(same, 0.5 * (left + right), 0.0)
    for k in range(delta.size):
        if delta[k] == 0.0:
            m[k] = m[k + 1] = 0.0
            continue
        # limit (a, b) = (m_k, m_k+1) / delta_k to the disc of radius 3, written
        # without forming a and b so tiny secants cannot overflow
        norm = np.hypot(m[k], m[k + 1])
        bound = 3.0 * abs(delta[k])
        if norm > bound:
            m[k] *= bound / norm
            m[k + 1] *= bound / norm
    return m


class MonotoneCubic:
    """C1 piecewise-cubic Hermite interpolant with Fritsch-Carlson limited slopes."""

    def __init__(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise InvalidInputError("need at least two (s, y) points of matching shape")
        if not np.all(np.diff(x) > 0):
            raise InvalidInputError("abscissae must be strictly increasing")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InvalidInputError("points must be finite")
        self.x = x
        self.y = y
        self.slopes = fritsch_carlson_slopes(x, y)

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=np.float64)
        if np.any(s_arr < self.x[0]) or np.any(s_arr > self.x[-1]) or np.any(np.isnan(s_arr)):
            raise ScheduleDomainError(
                f"evaluation point outside [{self.x[0]}, {self.x[-1]}]; no extrapolation"
            )
        k = np.clip(np.searchsorted(self.x, s_arr, side="right") - 1, 0, self.x.size - 2)
        h = self.x[k + 1] - self.x[k]
        t = (s_arr - self.x[k]) / h
        t2 = t * t
        t3 = t2 * t
        val = (
            (2 * t3 - 3 * t2 + 1) * self.y[k]
            + (t3 - 2 * t2 + t) * h * self.slopes[k]
            + (-2 * t3 + 3 * t2) * self.y[k + 1]
            + (t3 - t2) * h * self.slopes[k + 1]
        )
        return float(val) if np.ndim(s) == 0 else val


def build_interpolant(points) -> MonotoneCubic:
    """Interpolant over ordered (s, y) pairs spanning s = 0 .. 1."""
    pts = [(float(s), float(y)) for s, y in points]
    if len(pts) < 2:
        raise InvalidInputError("need at least two points")
    xs = np.array([p[0] for p in pts])
    if xs[0] != 0.0 or xs[-1] != 1.0:
        raise InvalidInputError(f"points must start at s=0 and end at s=1, got {xs[0]}..{xs[-1]}")
    return MonotoneCubic(xs, [p[1] for p in pts])


def control_grid(n_p: int) -> np.ndarray:
    """Full grid s_0 .. s_{n_p+1}, boundaries included."""
    return np.arange(n_p + 2, dtype=np.float64) / (n_p + 1)


@dataclass(frozen=True)
class ScheduleSet:
    n_p: int
    y1: tuple
    y2: tuple
    y3: tuple

    def __post_init__(self):
        if int(self.n_p) != self.n_p or self.n_p < 0:
            raise InvalidInputError(f"n_p must be a non-negative integer, got {self.n_p!r}")
        for name in ("y1", "y2", "y3"):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) != self.n_p:
                raise InvalidInputError(f"{name} has {len(vals)} values, expected {self.n_p}")
            object.__setattr__(self, name, vals)

    @classmethod
    def from_vector(cls, vec) -> "ScheduleSet":
        """Split a flat trainable vector ``[y1..., y2..., y3...]``."""
        vec = [float(v) for v in np.asarray(vec, dtype=np.float64).ravel()]
        if len(vec) % 3:
            raise InvalidInputError(f"trainable vector length {len(vec)} is not a multiple of 3")
        n_p = len(vec) // 3
        return cls(n_p, vec[:n_p], vec[n_p : 2 * n_p], vec[2 * n_p :])

    def to_vector(self) -> np.ndarray:
        return np.array(self.y1 + self.y2 + self.y3, dtype=np.float64)

    def values(self, k: int) -> tuple:
        return {1: self.y1, 2: self.y2, 3: self.y3}[k]

    @cached_property
    def interpolants(self) -> dict[int, MonotoneCubic]:
        grid = control_grid(self.n_p)
        out = {}
        for k, (start, end) in BOUNDARY.items():
            out[k] = MonotoneCubic(grid, (start,) + self.values(k) + (end,))
        return out

    def __call__(self, k: int, s):
        return eval_schedule(self, k, s)

    def to_json(self) -> dict:
        return {"n_p": self.n_p, "y1": list(self.y1), "y2": list(self.y2), "y3": list(self.y3)}

    @classmethod
    def from_json(cls, data) -> "ScheduleSet":
        return cls(int(data["n_p"]), data["y1"], data["y2"], data["y3"])

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    def curve_csv(self, points: int = 101) -> str:
        s = np.linspace(0.0, 1.0, points)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "F1", "F2", "F3"])
        cols = [self.interpolants[k](s) for k in (1, 2, 3)]
        for i, si in enumerate(s):
            w.writerow([repr(float(si))] + [repr(float(c[i])) for c in cols])
        return buf.getvalue()


def eval_schedule(schedules: ScheduleSet, k: int, s):
    if k not in BOUNDARY:
        raise InvalidInputError(f"schedule index must be 1, 2 or 3, got {k!r}")
    return schedules.interpolants[k](s)


def linear_ramp_set(n_p: int) -> ScheduleSet:
    """Control values on the lines F1 = 1 - s, F2 = s, F3 = 0."""
    s = control_grid(n_p)[1:-1]
    return ScheduleSet(n_p, tuple(1.0 - s), tuple(s), (0.0,) * n_p)
