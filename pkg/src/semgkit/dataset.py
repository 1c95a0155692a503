"""Session protocol, synthetic sEMG generator and the ``emgrec`` text format.

``emgrec`` v1 layout, one record per line, ``\\n`` terminated::

    emgrec,v1,rate_hz=200,channels=8
    <ch1>,<ch2>,...,<ch8>,<gesture name>
    ...

Values use ``.`` as decimal separator and are written with the shortest
representation that reads back to the identical double.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .core import GESTURE_NAMES, N_GESTURES, GestureLabel, SemgRecording
from .rng import Pcg32

EMGREC_VERSION = 1
SMOOTHING_COEF = 0.5


class RecordingFormatError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class SessionProtocol:
    """Recording schedule: a rest bookend, the gesture blocks, a rest bookend.

    With ``order='round-robin'`` the blocks cycle through all gestures once
    per repetition; ``order='blocked'`` holds each gesture for all its
    repetitions before moving on. The defaults give 7 x 4 x 5 s plus 2 x 2.5 s
    of rest, i.e. 145 s.
    """

    gestures: tuple = tuple(GestureLabel)
    reps: int = 4
    hold_s: float = 5.0
    bookend_rest: bool = True
    rate_hz: int = 200
    bookend_s: tuple = (2.5, 2.5)
    order: str = "round-robin"

    def __post_init__(self):
        if len(self.gestures) == 0:
            raise ValueError("protocol needs at least one gesture")
        object.__setattr__(self, "gestures", tuple(GestureLabel(int(g)) for g in self.gestures))
        if self.reps < 1 or self.hold_s <= 0 or self.rate_hz <= 0:
            raise ValueError("reps, hold_s and rate_hz must be positive")
        if self.order not in ("round-robin", "blocked"):
            raise ValueError("order must be 'round-robin' or 'blocked'")
        if min(self.bookend_s) < 0:
            raise ValueError("bookend durations must be non-negative")

    def _n(self, seconds):
        return int(round(seconds * self.rate_hz))

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.rate_hz

    @property
    def n_samples(self) -> int:
        n = self.reps * len(self.gestures) * self._n(self.hold_s)
        if self.bookend_rest:
            n += self._n(self.bookend_s[0]) + self._n(self.bookend_s[1])
        return n

    def blocks(self):
        """``(gesture, n_samples)`` segments in recording order."""
        if self.order == "round-robin":
            seq = [g for _ in range(self.reps) for g in self.gestures]
        else:
            seq = [g for g in self.gestures for _ in range(self.reps)]
        hold = self._n(self.hold_s)
        out = [(g, hold) for g in seq]
        if self.bookend_rest:
            out = ([(GestureLabel.REST, self._n(self.bookend_s[0]))] + out
                   + [(GestureLabel.REST, self._n(self.bookend_s[1]))])
        return [(g, n) for g, n in out if n > 0]


def build_protocol_labels(p: SessionProtocol) -> np.ndarray:
    return np.concatenate([np.full(n, int(g), dtype=np.int64) for g, n in p.blocks()])


# Per-gesture, per-channel amplitude of the synthetic muscle activity.
# Rows follow GestureLabel order, columns are channels 1..8.
DEFAULT_PROFILE = np.array([
    [0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05],   # rest
    [1.00, 0.90, 0.80, 0.70, 0.80, 0.90, 1.00, 0.90],   # fist
    [0.20, 0.30, 0.90, 1.00, 0.60, 0.20, 0.20, 0.20],   # open
    [0.90, 0.20, 0.20, 0.30, 0.30, 0.20, 0.80, 1.00],   # wrist-up
    [0.20, 0.30, 0.30, 0.20, 0.40, 1.00, 0.90, 0.30],   # wrist-down
    [0.70, 1.00, 0.90, 0.30, 0.20, 0.20, 0.20, 0.40],   # wrist-left
    [0.30, 0.20, 0.30, 0.90, 1.00, 0.80, 0.30, 0.20],   # wrist-right
])


def default_profile(uninformative=(), level=0.5) -> np.ndarray:
    """The default profile, optionally flattening some channels (1-based).

    A flattened channel has the same amplitude ``level`` for every gesture
    and so carries no class information.
    """
    prof = DEFAULT_PROFILE.copy()
    for c in uninformative:
        prof[:, int(c) - 1] = level
    return prof


def profile_gap(profile) -> float:
    """Smallest Euclidean distance between two gesture rows."""
    prof = np.asarray(profile, dtype=np.float64)
    d = np.sqrt(((prof[:, None, :] - prof[None, :, :]) ** 2).sum(-1))
    return float(d[np.triu_indices(len(prof), 1)].min())


@dataclass(frozen=True, eq=False)
class SynthConfig:
    """Synthetic signal model.

    Channel ``c`` during gesture ``g`` is unit-variance low-pass noise scaled
    by ``profile[g, c]``, plus white noise of standard deviation
    ``noise_std``. A positive ``burst_freq_hz`` additionally modulates the
    muscle component by ``1 + 0.3 sin(2 pi f t)``.
    """

    seed: int = 0
    profile: np.ndarray = DEFAULT_PROFILE
    noise_std: float = 0.05
    burst_freq_hz: float = 0.0

    def __post_init__(self):
        prof = np.array(self.profile, dtype=np.float64)
        if prof.ndim != 2 or prof.shape[0] != N_GESTURES:
            raise ValueError(f"profile must have {N_GESTURES} rows, got shape {prof.shape}")
        if np.any(prof < 0):
            raise ValueError("profile amplitudes must be non-negative")
        if self.noise_std < 0 or self.burst_freq_hz < 0:
            raise ValueError("noise_std and burst_freq_hz must be non-negative")
        if np.any(prof) and len({tuple(r) for r in prof}) != N_GESTURES:
            raise ValueError("profile rows must be distinct")
        prof.setflags(write=False)
        object.__setattr__(self, "profile", prof)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n_channels(self) -> int:
        return self.profile.shape[1]

    def with_seed(self, seed) -> "SynthConfig":
        return SynthConfig(seed, self.profile, self.noise_std, self.burst_freq_hz)


def synth_recording(p: SessionProtocol = SessionProtocol(),
                    cfg: SynthConfig = SynthConfig()) -> SemgRecording:
    labels = build_protocol_labels(p)
    n, n_ch = labels.size, cfg.n_channels
    rng = Pcg32(cfg.seed)
    drive = rng.normal(n_ch * n).reshape(n_ch, n)
    white = rng.normal(n_ch * n).reshape(n_ch, n)

    gain = np.sqrt(1.0 - SMOOTHING_COEF ** 2)
    # start in the stationary state so every sample has unit variance
    zi = drive[:, :1] * (1.0 - gain)
    muscle, _ = lfilter([gain], [1.0, -SMOOTHING_COEF], drive, axis=1, zi=zi)

    amp = cfg.profile[labels].T
    if cfg.burst_freq_hz > 0:
        t = np.arange(n) / p.rate_hz
        amp = amp * (1.0 + 0.3 * np.sin(2.0 * np.pi * cfg.burst_freq_hz * t))
    samples = amp * muscle + cfg.noise_std * white
    return SemgRecording(samples, labels, p.rate_hz)


_HEADER = re.compile(r"^emgrec,v(\d+),rate_hz=(\d+),channels=(\d+)$")


def write_recording(rec: SemgRecording, path):
    names = GESTURE_NAMES
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"emgrec,v{EMGREC_VERSION},rate_hz={rec.sample_rate_hz},"
                 f"channels={rec.n_channels}\n")
        rows = rec.samples.T.tolist()
        for row, lab in zip(rows, rec.labels.tolist()):
            fh.write(",".join(map(repr, row)))
            fh.write("," + names[lab] + "\n")


def read_recording(path) -> SemgRecording:
    with open(path, encoding="ascii", newline="") as fh:
        header = fh.readline().rstrip("\n")
        m = _HEADER.match(header)
        if not m:
            raise RecordingFormatError(f"malformed header {header[:60]!r}", 1)
        version, rate, n_ch = (int(v) for v in m.groups())
        if version > EMGREC_VERSION:
            raise RecordingFormatError(
                f"emgrec version {version} is newer than supported v{EMGREC_VERSION}", 1)
        if rate <= 0 or n_ch <= 0:
            raise RecordingFormatError("rate_hz and channels must be positive", 1)
        lookup = {name: i for i, name in enumerate(GESTURE_NAMES)}
        values, labels = [], []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                raise RecordingFormatError("empty line", lineno)
            fields = line.split(",")
            if len(fields) != n_ch + 1:
                raise RecordingFormatError(
                    f"expected {n_ch + 1} fields, found {len(fields)}", lineno)
            try:
                row = [float(v) for v in fields[:-1]]
            except ValueError:
                raise RecordingFormatError("non-numeric sample value", lineno) from None
            if not all(map(math.isfinite, row)):
                raise RecordingFormatError("non-finite sample value", lineno)
            lab = lookup.get(fields[-1])
            if lab is None:
                raise RecordingFormatError(f"unknown gesture name {fields[-1]!r}", lineno)
            values.append(row)
            labels.append(lab)
    samples = np.array(values, dtype=np.float64).reshape(-1, n_ch).T
    return SemgRecording(samples, np.array(labels, dtype=np.int64), rate)
