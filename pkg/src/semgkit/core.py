"""Recording types, overlapped segmentation and the decision-latency model.

A recording is stored channel-major: ``samples`` has shape
``(n_channels, n_samples)``. Windows are described by their start offsets
only; the sample data is never copied by the segmentation bookkeeping.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class InsufficientSamplesError(ValueError):
    """Raised when a recording is shorter than a single analysis window."""


class GestureLabel(enum.IntEnum):
    REST = 0
    FIST = 1
    OPEN = 2
    WRIST_UP = 3
    WRIST_DOWN = 4
    WRIST_LEFT = 5
    WRIST_RIGHT = 6

    @property
    def label(self) -> str:
        """Hyphenated display name, e.g. ``'wrist-up'``."""
        return self.name.lower().replace("_", "-")

    @classmethod
    def from_label(cls, name: str) -> "GestureLabel":
        try:
            return cls[name.strip().upper().replace("-", "_")]
        except KeyError:
            raise ValueError(f"unknown gesture name {name!r}") from None


N_GESTURES = len(GestureLabel)
GESTURE_NAMES = tuple(g.label for g in GestureLabel)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SemgRecording:
    """Multi-channel sEMG recording with one gesture label per sample.

    Parameters
    ----------
    samples : array_like, shape (n_channels, n_samples)
        Sample values. Integer input is widened to float64.
    labels : array_like of int, shape (n_samples,)
        Gesture id of every sample.
    sample_rate_hz : int
        Sampling frequency; the Myo armband streams at 200 Hz.
    """

    samples: np.ndarray
    labels: np.ndarray
    sample_rate_hz: int = 200

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2:
            raise ValueError("samples must be 2-D (n_channels, n_samples)")
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != samples.shape[1]:
            raise ValueError(
                f"labels length {labels.shape} does not match sample count "
                f"{samples.shape[1]}")
        if labels.size and (labels.min() < 0 or labels.max() >= N_GESTURES):
            raise ValueError("labels must be gesture ids in 0..6")
        if int(self.sample_rate_hz) <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if samples.shape[0] < 1:
            raise ValueError("recording needs at least one channel")
        object.__setattr__(self, "samples", _frozen(samples))
        object.__setattr__(self, "labels", _frozen(labels.astype(np.int64)))
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    def __eq__(self, other):
        if not isinstance(other, SemgRecording):
            return NotImplemented
        return (self.sample_rate_hz == other.sample_rate_hz
                and self.samples.shape == other.samples.shape
                and np.array_equal(self.samples, other.samples)
                and np.array_equal(self.labels, other.labels))

    __hash__ = None


@dataclass(frozen=True)
class WindowSpec:
    win_size: int = 51
    win_inc: int = 25

    def __post_init__(self):
        if int(self.win_size) <= 0 or int(self.win_inc) <= 0:
            raise ValueError("win_size and win_inc must be positive")
        if self.win_inc > self.win_size:
            raise ValueError("win_inc may not exceed win_size")
        object.__setattr__(self, "win_size", int(self.win_size))
        object.__setattr__(self, "win_inc", int(self.win_inc))

    @property
    def overlap(self) -> int:
        return self.win_size - self.win_inc

    def count(self, n_samples: int) -> int:
        """Number of whole windows that fit into ``n_samples``."""
        if n_samples < self.win_size:
            return 0
        return (n_samples - self.win_size) // self.win_inc + 1


@dataclass(frozen=True, eq=False)
class WindowIndex:
    starts: np.ndarray
    labels: np.ndarray
    win_size: int
    win_inc: int

    def __post_init__(self):
        object.__setattr__(self, "starts", _frozen(np.asarray(self.starts, dtype=np.int64)))
        object.__setattr__(self, "labels", _frozen(np.asarray(self.labels, dtype=np.int64)))

    def __len__(self):
        return self.starts.shape[0]

    @property
    def spec(self) -> WindowSpec:
        return WindowSpec(self.win_size, self.win_inc)


def segment(rec: SemgRecording, spec: WindowSpec, *,
            drop_transitions: bool = False) -> WindowIndex:
    """Cut a recording into overlapping windows.

    Each window is labelled with the label of its centre sample
    ``start + win_size // 2``. With ``drop_transitions`` windows whose
    samples carry more than one distinct label are discarded; the
    surviving starts then no longer have a constant stride.
    """
    n = rec.n_samples
    if n < spec.win_size:
        raise InsufficientSamplesError(
            f"insufficient samples: recording has {n}, window needs {spec.win_size}")
    starts = np.arange(spec.count(n), dtype=np.int64) * spec.win_inc
    labels = rec.labels[starts + spec.win_size // 2]
    if drop_transitions:
        lab = rec.labels
        # label changes inside [start, start + win): compare via cumulative change count
        changes = np.concatenate(([0], np.cumsum(lab[1:] != lab[:-1])))
        pure = changes[starts + spec.win_size - 1] == changes[starts]
        starts, labels = starts[pure], labels[pure]
    return WindowIndex(starts, labels, spec.win_size, spec.win_inc)


def window_slice(rec: SemgRecording, idx: WindowIndex, w: int, ch: int) -> np.ndarray:
    """Samples of channel ``ch`` (0-based) inside window ``w``."""
    if not 0 <= w < len(idx):
        raise IndexError(f"window {w} out of range (0..{len(idx) - 1})")
    if not 0 <= ch < rec.n_channels:
        raise IndexError(f"channel {ch} out of range (0..{rec.n_channels - 1})")
    s = int(idx.starts[w])
    return rec.samples[ch, s:s + idx.win_size]


def window_view(rec: SemgRecording, idx: WindowIndex) -> np.ndarray:
    """Read-only view of all windows, shape ``(n_windows, n_channels, win_size)``."""
    view = np.lib.stride_tricks.sliding_window_view(rec.samples, idx.win_size, axis=1)
    # view: (n_channels, n_samples - win + 1, win)
    return view[:, idx.starts, :].transpose(1, 0, 2)


@dataclass(frozen=True)
class LatencyBudget:
    """Decision latency of the overlapped scheme, all fields in milliseconds."""

    t_analysis_ms: float
    t_new_ms: float
    t_processing_ms: float
    decision_ms: float = field(init=False)

    def __post_init__(self):
        for name in ("t_analysis_ms", "t_new_ms", "t_processing_ms"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        object.__setattr__(
            self, "decision_ms",
            0.5 * self.t_analysis_ms + 0.5 * self.t_new_ms + self.t_processing_ms)

    def processing_budget_ms(self, limit_ms: float = 300.0) -> float:
        """Largest processing time that keeps the decision under ``limit_ms``."""
        return limit_ms - 0.5 * self.t_analysis_ms - 0.5 * self.t_new_ms


def decision_latency(win_size: int, win_inc: int, rate_hz: int,
                     t_processing_ms: float = 0.0) -> LatencyBudget:
    """Decision time D = T_a/2 + T_new/2 + tau for an overlapped window scheme.

    >>> decision_latency(51, 25, 200, 20.0).decision_ms
    210.0
    """
    if rate_hz <= 0:
        raise ValueError("rate_hz must be positive")
    spec = WindowSpec(win_size, win_inc)
    return LatencyBudget(1000.0 * spec.win_size / rate_hz,
                         1000.0 * spec.win_inc / rate_hz,
                         float(t_processing_ms))
