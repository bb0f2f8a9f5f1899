"""Mean-normalized sliding cross-correlation of 1D series and 2D matrices.

The score at integer shift (dr, dc) is the mean of elementwise products
over the overlap region of the two arrays, considering only shifts whose
overlap covers at least ``min_overlap_fraction`` of the smaller array.
Small problems are evaluated shift-by-shift; large ones go through an
FFT-based product-sum that is exact up to float rounding (the admissible
shift band is narrow enough that a reduced circular transform reproduces
the linear correlation without aliasing).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import fft as _fft

from .errors import InsufficientOverlapError, InvalidInputError

# Direct evaluation bound: (#row shifts) * (#col shifts) * max overlap cells.
_DIRECT_COST_LIMIT = 3e7


class XCorr2Result(NamedTuple):
    value: float
    shift: tuple[int, int]


class XCorr1Result(NamedTuple):
    value: float
    shift: int


@dataclass(frozen=True)
class XCorrConfig:
    """Correlation and affinity-blend parameters."""

    min_overlap_fraction: float = 0.5
    normalize: str = "mean-product"
    alpha: float = 0.9
    gamma: float = 0.5
    method: str = "auto"  # auto | direct | fft

    def __post_init__(self):
        if not (0.0 < self.min_overlap_fraction <= 1.0):
            raise InvalidInputError("min_overlap_fraction must be in (0, 1]")
        if self.normalize != "mean-product":
            raise InvalidInputError(f"unknown normalization {self.normalize!r}")
        if not (0.0 <= self.alpha <= 1.0):
            raise InvalidInputError("alpha must be in [0, 1]")
        if self.gamma <= 0.0:
            raise InvalidInputError("gamma must be positive")
        if self.method not in ("auto", "direct", "fft"):
            raise InvalidInputError(f"unknown method {self.method!r}")


class FFTCache:
    """Bounded cache of forward rFFTs keyed by (array identity, pad shape)."""

    def __init__(self, capacity: int = 40):
        self.capacity = capacity
        self._store: dict = {}

    def rfft2(self, arr: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
        key = (id(arr), shape)
        hit = self._store.get(key)
        if hit is not None:
            return hit[1]
        f = _fft.rfft2(arr, shape)
        if len(self._store) >= self.capacity:
            self._store.pop(next(iter(self._store)))
        self._store[key] = (arr, f)  # keep arr alive so id() stays unique
        return f


def _overlap_counts(n_a: int, n_b: int) -> np.ndarray:
    """Overlap length per shift d in [-(n_a - 1), n_b - 1]."""
    d = np.arange(-(n_a - 1), n_b)
    return np.minimum(n_a, n_b - d) - np.maximum(0, -d)


def _values_of(m) -> np.ndarray:
    vals = np.asarray(getattr(m, "values", m), dtype=np.float64)
    if vals.size == 0:
        raise InvalidInputError("empty input to cross-correlation")
    return vals


def _pick_best(means: np.ndarray, drs: np.ndarray, dcs: np.ndarray) -> XCorr2Result:
    """Max value; ties broken by smallest |dr|+|dc|, then (dr, dc)."""
    top = means.max()
    rows, cols = np.nonzero(means == top)
    dr = drs[rows]
    dc = dcs[cols]
    order = np.lexsort((dc, dr, np.abs(dr) + np.abs(dc)))
    k = order[0]
    return XCorr2Result(float(top), (int(dr[k]), int(dc[k])))


def _sums_direct(a, b, drs, dcs, adm) -> np.ndarray:
    ma, na = a.shape
    mb, nb = b.shape
    s = np.zeros((drs.size, dcs.size))
    for i, dr in enumerate(drs):
        r0 = max(0, -dr)
        r1 = min(ma, mb - dr)
        for j, dc in enumerate(dcs):
            if not adm[i, j]:
                continue
            c0 = max(0, -dc)
            c1 = min(na, nb - dc)
            s[i, j] = np.sum(a[r0:r1, c0:c1] * b[r0 + dr:r1 + dr, c0 + dc:c1 + dc])
    return s


def _sums_fft(a, b, drs, dcs, cache: FFTCache | None) -> np.ndarray:
    ma, na = a.shape
    mb, nb = b.shape
    # Smallest circular size with no aliasing inside the requested band.
    lr = _fft.next_fast_len(max(mb - int(drs[0]), int(drs[-1]) + ma), real=True)
    lc = _fft.next_fast_len(max(nb - int(dcs[0]), int(dcs[-1]) + na), real=True)
    if cache is not None:
        fa = cache.rfft2(a, (lr, lc))
        fb = cache.rfft2(b, (lr, lc))
    else:
        fa = _fft.rfft2(a, (lr, lc))
        fb = _fft.rfft2(b, (lr, lc))
    s_circ = _fft.irfft2(np.conj(fa) * fb, (lr, lc))
    return s_circ[np.ix_(np.mod(drs, lr), np.mod(dcs, lc))]


def xcorr2_max(a, b, cfg: XCorrConfig, cache: FFTCache | None = None) -> XCorr2Result:
    """Best mean-of-products over all admissible 2D shifts of ``b`` vs ``a``.

    The returned shift (dr, dc) is where ``b`` holds ``a``'s content:
    it maximizes mean(a[r, c] * b[r + dr, c + dc]) over the overlap.
    Raises InsufficientOverlapError if no shift meets the overlap floor.
    """
    av = _values_of(a)
    bv = _values_of(b)
    if av.ndim != 2 or bv.ndim != 2:
        raise InvalidInputError("xcorr2_max expects 2D matrices")
    ma, na = av.shape
    mb, nb = bv.shape
    req = cfg.min_overlap_fraction * min(ma * na, mb * nb)

    o_r = _overlap_counts(ma, mb)
    o_c = _overlap_counts(na, nb)
    r_ok = o_r * o_c.max() >= req
    c_ok = o_c * o_r.max() >= req
    if not (r_ok.any() and c_ok.any()):
        raise InsufficientOverlapError(
            f"no shift reaches {cfg.min_overlap_fraction:.0%} of the smaller matrix")
    drs = np.nonzero(r_ok)[0] - (ma - 1)
    dcs = np.nonzero(c_ok)[0] - (na - 1)
    overlap = np.outer(o_r[drs + ma - 1], o_c[dcs + na - 1]).astype(np.float64)
    adm = overlap >= req
    if not adm.any():
        raise InsufficientOverlapError(
            f"no shift reaches {cfg.min_overlap_fraction:.0%} of the smaller matrix")

    cost = drs.size * dcs.size * min(ma, mb) * min(na, nb)
    method = cfg.method
    if method == "auto":
        method = "direct" if cost <= _DIRECT_COST_LIMIT else "fft"
    if method == "direct":
        sums = _sums_direct(av, bv, drs, dcs, adm)
    else:
        sums = _sums_fft(av, bv, drs, dcs, cache)

    means = sums / overlap
    if av.min() >= 0.0 and bv.min() >= 0.0:
        np.maximum(means, 0.0, out=means)  # scrub FFT round-off below zero
    means[~adm] = -np.inf
    return _pick_best(means, drs, dcs)


def xcorr1_max(a, b, cfg: XCorrConfig) -> XCorr1Result:
    """1D analogue of :func:`xcorr2_max` for count series.

    Both series are first scaled by 1 / max(1, joint maximum) so the
    result lands in [0, 1] and is commensurable with the 2D term.
    """
    av = _values_of(a).ravel()
    bv = _values_of(b).ravel()
    la, lb = av.size, bv.size
    scale = 1.0 / max(1.0, float(max(av.max(), bv.max())))
    avs = av * scale
    bvs = bv * scale

    o = _overlap_counts(la, lb).astype(np.float64)
    req = cfg.min_overlap_fraction * min(la, lb)
    adm = o >= req
    if not adm.any():
        raise InsufficientOverlapError("no admissible 1D shift")

    sums = np.convolve(avs[::-1], bvs, mode="full")  # index d + la - 1 holds shift d
    ds = np.arange(-(la - 1), lb)
    means = np.where(adm, sums / o, -np.inf)
    if av.min() >= 0.0 and bv.min() >= 0.0:
        means[adm] = np.maximum(means[adm], 0.0)

    top = means.max()
    cand = np.nonzero(means == top)[0]
    d = ds[cand]
    k = np.lexsort((d, np.abs(d)))[0]
    return XCorr1Result(float(top), int(d[k]))
