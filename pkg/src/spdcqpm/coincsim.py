"""
Monte Carlo model of a two-detector coincidence measurement.

Pairs are emitted as a Poisson process, each photon is routed to a detector
arm, thinned by that arm's efficiency and smeared with Gaussian timing
jitter. Uncorrelated dark counts are added per arm. Every random source has
its own child of one SeedSequence, so switching darks on or off leaves the
pair times untouched.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .pairstats import car

__all__ = [
    "Splitter",
    "SimConfig",
    "SimResult",
    "CoincidenceHistogram",
    "HistogramAnalysis",
    "simulate",
    "build_histogram",
    "analyze_histogram",
]

DEFAULT_BIN_WIDTH = 100e-12
DEFAULT_SPAN = 50e-9
DEFAULT_WINDOW = 2e-9

# order matters: it fixes which child seed feeds which source
_STREAMS = ("pairs", "routing", "thin_a", "thin_b", "jitter_a", "jitter_b", "dark_a", "dark_b")


class Splitter(enum.Enum):
    FIFTY_FIFTY = "fifty-fifty"
    DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class SimConfig:
    pair_rate: float  # Hz
    duration: float  # s
    detector_efficiency_a: float = 1.0
    detector_efficiency_b: float = 1.0
    dark_rate_a: float = 0.0  # Hz
    dark_rate_b: float = 0.0  # Hz
    jitter_sigma: float = 0.0  # s, per detection
    seed: int = 0
    splitter: Splitter = Splitter.FIFTY_FIFTY

    def __post_init__(self):
        if min(self.pair_rate, self.dark_rate_a, self.dark_rate_b, self.jitter_sigma) < 0:
            raise DomainError("rates and jitter must be non-negative")
        for eff in (self.detector_efficiency_a, self.detector_efficiency_b):
            if not (0 <= eff <= 1):
                raise DomainError(f"detector efficiency {eff} outside [0, 1]")
        if self.duration <= 0:
            raise DomainError("duration must be positive")
        object.__setattr__(self, "splitter", Splitter(self.splitter))


@dataclass
class SimResult:
    stream_a: np.ndarray
    stream_b: np.ndarray
    n_pairs: int
    config: SimConfig

    @property
    def duration(self) -> float:
        return self.config.duration


@dataclass
class CoincidenceHistogram:
    """Counts of (t_b - t_a) over [-span/2, span/2) in bins of ``bin_width``.

    Bin edges are aligned with zero delay, so a zero difference falls into
    the bin [0, bin_width).
    """

    bin_width: float
    counts: np.ndarray
    span: float
    duration: float

    @property
    def n_bins(self) -> int:
        return len(self.counts)

    @property
    def edges(self) -> np.ndarray:
        return -0.5 * self.span + self.bin_width * np.arange(self.n_bins + 1)

    @property
    def centers(self) -> np.ndarray:
        return -0.5 * self.span + self.bin_width * (np.arange(self.n_bins) + 0.5)

    @property
    def zero_bin(self) -> int:
        return self.n_bins // 2

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def rebin(self, factor: int) -> "CoincidenceHistogram":
        if factor < 1 or self.n_bins % factor:
            raise DomainError(f"cannot merge {self.n_bins} bins in groups of {factor}")
        merged = self.counts.reshape(-1, factor).sum(axis=1)
        return CoincidenceHistogram(self.bin_width * factor, merged, self.span, self.duration)


@dataclass(frozen=True)
class HistogramAnalysis:
    measured: float  # Hz, all coincidences inside the window
    accidentals: float  # Hz, side-bin estimate scaled to the window
    true: float  # Hz
    car: float  # true / accidentals
    raw_car: float  # measured / accidentals, ~1 for uncorrelated streams
    window_counts: int
    side_counts: int


def _arm(rng_thin, rng_jit, rng_dark, times, eff, jitter, dark_rate, duration) -> np.ndarray:
    if eff < 1.0:
        times = times[rng_thin.random(times.size) < eff]
    if jitter > 0:
        times = times + rng_jit.normal(0.0, jitter, times.size)
    n_dark = rng_dark.poisson(dark_rate * duration)
    darks = rng_dark.uniform(0.0, duration, n_dark)
    return np.sort(np.concatenate([times, darks]))


def simulate(config: SimConfig) -> SimResult:
    children = np.random.SeedSequence(config.seed).spawn(len(_STREAMS))
    rng = {name: np.random.default_rng(ss) for name, ss in zip(_STREAMS, children)}

    n_pairs = int(rng["pairs"].poisson(config.pair_rate * config.duration))
    t = np.sort(rng["pairs"].uniform(0.0, config.duration, n_pairs))

    if config.splitter is Splitter.DETERMINISTIC:
        to_a, to_b = t, t
    else:
        # column 0 = signal, column 1 = idler; 0 routes to arm A
        route = rng["routing"].integers(0, 2, size=(n_pairs, 2))
        to_a = np.concatenate([t[route[:, 0] == 0], t[route[:, 1] == 0]])
        to_b = np.concatenate([t[route[:, 0] == 1], t[route[:, 1] == 1]])

    a = _arm(rng["thin_a"], rng["jitter_a"], rng["dark_a"], to_a,
             config.detector_efficiency_a, config.jitter_sigma, config.dark_rate_a, config.duration)
    b = _arm(rng["thin_b"], rng["jitter_b"], rng["dark_b"], to_b,
             config.detector_efficiency_b, config.jitter_sigma, config.dark_rate_b, config.duration)
    return SimResult(a, b, n_pairs, config)


def build_histogram(
    stream_a: np.ndarray,
    stream_b: np.ndarray,
    bin_width: float = DEFAULT_BIN_WIDTH,
    span: float = DEFAULT_SPAN,
    duration: float | None = None,
) -> CoincidenceHistogram:
    """Histogram of all pairwise delays b - a inside [-span/2, span/2).

    Both streams must be sorted. For each tag in A the matching range in B is
    located by binary search, so the cost scales with the number of pairs
    inside the span, not with len(a) * len(b).
    """
    a = np.asarray(stream_a, dtype=float)
    b = np.asarray(stream_b, dtype=float)
    ratio = span / bin_width
    n_bins = int(round(ratio))
    if n_bins < 1 or abs(ratio - n_bins) > 1e-6 * ratio:
        raise DomainError("span must be an integer multiple of bin_width")
    if duration is None:
        tags = np.concatenate([a, b])
        duration = float(tags.max() - tags.min()) if tags.size else 0.0

    half = 0.5 * span
    lo = np.searchsorted(b, a - half, side="left")
    hi = np.searchsorted(b, a + half, side="left")
    per_a = hi - lo
    total = int(per_a.sum())
    counts = np.zeros(n_bins, dtype=np.int64)
    if total:
        owner = np.repeat(np.arange(a.size), per_a)
        start = np.repeat(lo - np.concatenate([[0], np.cumsum(per_a)[:-1]]), per_a)
        partner = start + np.arange(total)
        delays = b[partner] - a[owner]
        idx = np.floor(delays / bin_width + 0.5 * n_bins).astype(np.int64)
        np.clip(idx, 0, n_bins - 1, out=idx)
        counts = np.bincount(idx, minlength=n_bins).astype(np.int64)
    return CoincidenceHistogram(bin_width, counts, span, duration)


def analyze_histogram(
    hist: CoincidenceHistogram,
    window: float = DEFAULT_WINDOW,
    side_offset: float | None = None,
) -> HistogramAnalysis:
    """Coincidence and accidental rates from a delay histogram.

    Bins whose centre lies within +-window/2 form the coincidence window.
    Bins with |centre| > ``side_offset`` (default: one full window) estimate the
    flat accidental background.
    """
    if window <= 0 or window > hist.span:
        raise DomainError("window must lie in (0, span]")
    if hist.duration <= 0:
        raise DomainError("histogram has no duration to normalise by")
    side_offset = window if side_offset is None else side_offset
    centers = hist.centers
    in_window = np.abs(centers) < 0.5 * window
    side = np.abs(centers) > side_offset
    if not side.any():
        raise DomainError("no side bins left to estimate accidentals")
    window_counts = int(hist.counts[in_window].sum())
    side_counts = int(hist.counts[side].sum())
    acc_counts = hist.counts[side].mean() * in_window.sum()
    measured = window_counts / hist.duration
    accidentals = acc_counts / hist.duration
    true = max(measured - accidentals, 0.0)
    raw = car(measured, accidentals)
    return HistogramAnalysis(measured, accidentals, true, car(true, accidentals), raw,
                             window_counts, side_counts)
