"""Equidistribution statistics for sequences mod 1.

Points come from ``frac_array``, so every fractional part is taken after its
floor has been resolved rigorously; the statistics themselves are ordinary
float64 computations with a fixed reduction order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import realkernel as rk
from .gp.ast import GPExpr
from .gp.evaluate import DEFAULT, PrecisionConfig, compare, decide, frac_array


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    radius: float
    count: int
    total: int

    @property
    def certified_positive(self) -> bool:
        return self.value - self.radius > 0

    @property
    def interval(self) -> tuple[float, float]:
        return max(0.0, self.value - self.radius), min(1.0, self.value + self.radius)

    def to_dict(self) -> dict:
        return {"value": self.value, "radius": self.radius, "count": self.count, "total": self.total}


def density_estimate(count: int, total: int) -> DensityEstimate:
    """Three binomial standard errors plus 1/total for the finite range."""
    if total <= 0:
        return DensityEstimate(0.0, 1.0, 0, 0)
    p = count / total
    return DensityEstimate(p, 3 * math.sqrt(p * (1 - p) / total) + 1 / total, count, total)


@dataclass
class DistReport:
    N: int
    window: dict
    weyl: dict = field(default_factory=dict)
    star_discrepancy: float | None = None
    box_discrepancy: float | None = None
    histogram: list | None = None
    flags: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"N": self.N, "window": self.window,
               "weyl": {str(h): v for h, v in sorted(self.weyl.items())},
               "star_discrepancy": self.star_discrepancy, "box_discrepancy": self.box_discrepancy,
               "histogram": self.histogram, "flags": self.flags}
        out.update(self.extra)
        return out


# ---------------------------------------------------------------------------
# point statistics


def weyl_sum(points, h: int) -> complex:
    """(1/N) sum e(h x_n) with exactly rounded component sums."""
    if h == 0:
        raise ValueError("h must be nonzero")
    x = np.asarray(points, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty point set")
    # reduce h*x mod 1 first so the angle stays small and accurate
    t = np.mod(h * x, 1.0) * (2 * math.pi)
    re = math.fsum(np.cos(t).tolist()) / x.size
    im = math.fsum(np.sin(t).tolist()) / x.size
    return complex(re, im)


def star_discrepancy_1d(points) -> float:
    x = np.sort(np.asarray(points, dtype=np.float64))
    n = x.size
    if n == 0:
        raise ValueError("empty point set")
    i = np.arange(1, n + 1, dtype=np.float64)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


def _anchored_counts(points: np.ndarray, grid: int) -> np.ndarray:
    k = points.shape[1]
    cells = np.minimum((points * grid).astype(np.int64), grid - 1)
    flat = np.ravel_multi_index(cells.T, (grid,) * k)
    counts = np.bincount(flat, minlength=grid ** k).reshape((grid,) * k)
    for ax in range(k):
        counts = np.cumsum(counts, axis=ax)
    return counts


def box_discrepancy_kd(points, grid: int = 10) -> float:
    """max over anchored grid boxes [0, j1/g) x ... x [0, jk/g) of |count/N - volume|."""
    p = np.asarray(points, dtype=np.float64)
    if p.ndim == 1:
        p = p[:, None]
    n, k = p.shape
    if n == 0:
        raise ValueError("empty point set")
    if k > 4:
        raise ValueError("at most 4 dimensions")
    counts = _anchored_counts(p, grid)
    vol = np.ones((grid,) * k)
    axis = np.arange(1, grid + 1) / grid
    for ax in range(k):
        shape = [1] * k
        shape[ax] = grid
        vol = vol * axis.reshape(shape)
    return float(np.max(np.abs(counts / n - vol)))


def histogram(points, bins: int = 10) -> list[int]:
    counts, _ = np.histogram(np.asarray(points, dtype=np.float64), bins=bins, range=(0.0, 1.0))
    return [int(c) for c in counts]


def discrepancy_series(points, checkpoints: Sequence[int]) -> list[tuple[int, float]]:
    """(N, D*_N) for prefixes of the point sequence."""
    x = np.asarray(points, dtype=np.float64)
    return [(int(c), star_discrepancy_1d(x[:c])) for c in checkpoints if 0 < c <= x.size]


# ---------------------------------------------------------------------------
# sequence-level tests


def sequence_points(q, lam, ns, cfg: PrecisionConfig = DEFAULT) -> np.ndarray:
    """{q(n) lam} for one expression, or an (len(ns), k) array for a list of expressions."""
    ns = list(ns)
    if isinstance(q, GPExpr):
        return frac_array(q, ns, lam, cfg)
    return np.column_stack([frac_array(c, ns, lam, cfg) for c in q])


def _weyl_dict(x: np.ndarray, hs: Sequence[int]) -> dict:
    out = {}
    for h in hs:
        w = weyl_sum(x, h)
        out[h] = {"re": w.real, "im": w.imag, "abs": abs(w)}
    return out


def ud_report(q: GPExpr, lam=None, N: int = 10_000, M: int = 1, hs: Sequence[int] = (1, 2, 3),
              bins: int = 10, cfg: PrecisionConfig = DEFAULT) -> tuple[DistReport, np.ndarray]:
    """Statistics of {q(n) lam} over n = M..N."""
    ns = range(M, N + 1)
    x = sequence_points(q, lam, ns, cfg)
    rep = DistReport(N=N, window={"M": M, "N": N}, weyl=_weyl_dict(x, hs),
                     star_discrepancy=star_discrepancy_1d(x), histogram=histogram(x, bins))
    return rep, x


def window_starts(N: int, L: int, stride: int | None = None) -> list[int]:
    """Left ends of the length-L windows inside [-N, N] at the given stride (default L/10)."""
    total = 2 * N + 1
    if L < 1 or L > total:
        raise ValueError("window length must lie in [1, 2N+1]")
    stride = stride or max(1, L // 10)
    starts = list(range(0, total - L + 1, stride))
    if starts[-1] != total - L:
        starts.append(total - L)
    return starts


def windowed_discrepancy(x: np.ndarray, L: int, starts: Sequence[int], grid: int = 10) -> list[float]:
    if x.ndim == 1:
        return [star_discrepancy_1d(x[s:s + L]) for s in starts]
    return [box_discrepancy_kd(x[s:s + L], grid) for s in starts]


def wd_test(q, lam=None, N: int = 10_000, L: int = 1_000, grid: int = 10, stride: int | None = None,
            hs: Sequence[int] = (1, 2, 3), cfg: PrecisionConfig = DEFAULT) -> DistReport:
    """Max discrepancy of {q(n) lam} over windows of length L in [-N, N].

    ``q`` may be a list of expressions, in which case the anchored-box
    discrepancy on a grid^k mesh replaces the 1-D star discrepancy.
    """
    x = sequence_points(q, lam, range(-N, N + 1), cfg)
    starts = window_starts(N, L, stride)
    per = windowed_discrepancy(x, L, starts, grid)
    worst = int(np.argmax(per))
    rep = DistReport(N=N, window={"L": L, "stride": stride or max(1, L // 10), "windows": len(starts),
                                  "range": [-N, N]})
    if x.ndim == 1:
        rep.weyl = _weyl_dict(x, hs)
        rep.star_discrepancy = star_discrepancy_1d(x)
        rep.histogram = histogram(x)
    else:
        rep.box_discrepancy = box_discrepancy_kd(x, grid)
        rep.extra["grid"] = grid
        rep.extra["dimension"] = int(x.shape[1])
    rep.extra["max_window_discrepancy"] = float(per[worst])
    rep.extra["worst_window"] = [starts[worst] - N, starts[worst] - N + L - 1]
    return rep


def wd_trend(q, lam=None, Ns: Sequence[int] = (1_000, 10_000, 100_000), window_fraction: float = 0.1,
             slack: float = 2.0, grid: int = 10, cfg: PrecisionConfig = DEFAULT) -> dict:
    """Max windowed discrepancy with L = window_fraction * N along the N-ladder."""
    series = []
    for N in Ns:
        L = max(1, int(round(window_fraction * N)))
        rep = wd_test(q, lam, N, L, grid=grid, cfg=cfg)
        series.append({"N": N, "L": L, "max_window_discrepancy": rep.extra["max_window_discrepancy"]})
    vals = [s["max_window_discrepancy"] for s in series]
    ok = all(b <= slack * a for a, b in zip(vals, vals[1:]))
    return {"series": series, "slack": slack, "non_increasing": ok}


# ---------------------------------------------------------------------------
# densities


def natural_density(pred: Callable[[int], bool], N: int) -> DensityEstimate:
    """|E cap [-N, N]| / (2N+1)."""
    count = sum(1 for n in range(-N, N + 1) if pred(n))
    return density_estimate(count, 2 * N + 1)


def banach_density_lower(pred: Callable[[int], bool], N: int, L: int) -> dict:
    """max over length-L windows in [-N, N] of the window frequency (a lower bound for d*)."""
    ind = np.fromiter((1 if pred(n) else 0 for n in range(-N, N + 1)), dtype=np.int64, count=2 * N + 1)
    if not 1 <= L <= ind.size:
        raise ValueError("window length must lie in [1, 2N+1]")
    c = np.concatenate(([0], np.cumsum(ind)))
    sums = c[L:] - c[:-L]
    i = int(np.argmax(sums))
    return {"value": float(sums[i] / L), "window": [i - N, i - N + L - 1], "L": L}


def _abs_below(q: GPExpr, n: int, A, cfg: PrecisionConfig) -> bool:
    def test(v, F):
        return compare(v, A, F) < 0 and compare(-v, A, F) < 0
    return decide(q, n, test, cfg)


def adequacy_test(q: GPExpr, As: Sequence, N: int, cfg: PrecisionConfig = DEFAULT,
                  witnesses: int = 20) -> list[dict]:
    """Per threshold A: density of {n in [-N, N] : |q(n)| < A} and the first few witnesses."""
    out = []
    for A in As:
        A_q = A if isinstance(A, rk.RealConst) else Fraction(A)
        hits = [n for n in range(-N, N + 1) if _abs_below(q, n, A_q, cfg)]
        est = density_estimate(len(hits), 2 * N + 1)
        out.append({"A": str(A), **est.to_dict(), "witnesses": hits[:witnesses],
                    "positive_witnesses": [n for n in hits if n > 0][:witnesses]})
    return out
