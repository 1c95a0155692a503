"""Simulated online mode.

Samples are pushed one at a time into :class:`IncrementalPipeline`; every
``win_inc`` samples after the first full window it classifies the newest
window, smooths the decision by majority vote and, when the smoothed
gesture changes, writes a command frame to the serial sink.
:func:`run_stream` drives a whole recording through the pipeline, either
as fast as possible on one thread or paced by a producer thread feeding a
bounded queue.
"""

from __future__ import annotations

import os
import queue
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .classifiers import TrainedModel, predict
from .commands import encode_command
from .core import GestureLabel, SemgRecording, decision_latency, segment
from .dataset import SessionProtocol, SynthConfig, read_recording, synth_recording
from .features import column_meta, extract_matrix, window_features
from .modelfile import load_model
from .smoothing import MajorityVoter, VoteConfig


class PipelineMismatchError(ValueError):
    """The model cannot featurize the given source."""


@dataclass(frozen=True)
class Decision:
    window_index: int
    raw_label: int
    smoothed_label: int
    tau_ms: float
    decision_ms: float
    emitted: bool
    wall_s: float = 0.0

    def csv(self) -> str:
        return (f"{self.window_index},{GestureLabel(self.raw_label).label},"
                f"{GestureLabel(self.smoothed_label).label},{self.tau_ms:.6f},"
                f"{self.decision_ms:.6f},{int(self.emitted)}")


def check_model(model: TrainedModel, n_channels: int, rate_hz: int | None = None):
    if model.feature_spec is None or model.channel_mask is None or model.window_spec is None:
        raise PipelineMismatchError("model lacks feature/channel/window configuration")
    if max(model.channel_mask.enabled) > n_channels:
        raise PipelineMismatchError(
            f"model uses channel {max(model.channel_mask.enabled)} but the source "
            f"has {n_channels} channels")
    if tuple(column_meta(model.feature_spec, model.channel_mask)) != tuple(model.col_meta):
        raise PipelineMismatchError("model columns do not match its feature configuration")
    trained_rate = model.extra.get("sample_rate_hz")
    if rate_hz is not None and trained_rate is not None and int(trained_rate) != int(rate_hz):
        raise PipelineMismatchError(
            f"model trained at {trained_rate} Hz, source streams at {rate_hz} Hz")


class IncrementalPipeline:
    """Per-sample recognizer with majority-vote smoothing.

    Parameters
    ----------
    model : TrainedModel
        Must carry its feature spec, channel mask and window spec.
    n_channels : int
        Channels per pushed sample.
    rate_hz : int
        Sample rate, used for the latency model.
    vote : VoteConfig
    emit_every : bool
        Send a frame for every decision instead of only on changes.
    fixed_tau_ms : float, optional
        Record this processing time instead of measuring it (reproducible traces).
    """

    def __init__(self, model: TrainedModel, n_channels: int, rate_hz: int = 200,
                 vote: VoteConfig = VoteConfig(), emit_every: bool = False,
                 fixed_tau_ms: float | None = None, clock=time.perf_counter):
        check_model(model, n_channels, rate_hz)
        self.model = model
        self.spec = model.window_spec
        self.rate_hz = rate_hz
        self.n_channels = n_channels
        self.voter = MajorityVoter(vote)
        self.last_sent = int(vote.initial)
        self.emit_every = emit_every
        self.fixed_tau_ms = fixed_tau_ms
        self.clock = clock
        self._mask = model.channel_mask.indices
        self._buf = np.zeros((n_channels, self.spec.win_size))
        self._pos = 0
        self.n_pushed = 0
        self.n_decisions = 0
        self.frames = bytearray()

    def _window(self) -> np.ndarray:
        # oldest sample sits at the write position once the buffer has wrapped
        return np.concatenate((self._buf[:, self._pos:], self._buf[:, :self._pos]), axis=1)

    def push(self, sample) -> Decision | None:
        self._buf[:, self._pos] = sample
        self._pos = (self._pos + 1) % self.spec.win_size
        self.n_pushed += 1
        past = self.n_pushed - self.spec.win_size
        if past < 0 or past % self.spec.win_inc:
            return None
        return self._decide()

    def push_many(self, samples) -> list:
        """Push a ``(n_channels, n)`` block; returns the decisions it produced."""
        out = []
        for col in np.asarray(samples, dtype=np.float64).T:
            d = self.push(col)
            if d is not None:
                out.append(d)
        return out

    def _decide(self) -> Decision:
        t0 = self.clock()
        win = self._window()[self._mask][None]
        feats = window_features(win, self.model.feature_spec)
        z = self.model.standardizer.transform(feats)
        raw = int(self.model.payload.predict(z)[0])
        smoothed = self.voter.push(raw)
        emitted = self.emit_every or smoothed != self.last_sent
        if emitted:
            self.frames += encode_command(smoothed)
            self.last_sent = smoothed
        tau = (self.clock() - t0) * 1000.0 if self.fixed_tau_ms is None else self.fixed_tau_ms
        budget = decision_latency(self.spec.win_size, self.spec.win_inc, self.rate_hz, tau)
        d = Decision(self.n_decisions, raw, smoothed, tau, budget.decision_ms, emitted,
                     time.perf_counter())
        self.n_decisions += 1
        return d


def recognize(model: TrainedModel, rec: SemgRecording) -> np.ndarray:
    """Batch path: segment, featurize and classify every window of ``rec``."""
    idx = segment(rec, model.window_spec)
    fm = extract_matrix(rec, idx, model.feature_spec, model.channel_mask)
    return predict(model, fm)


@dataclass
class StreamConfig:
    """What to stream and how.

    ``source`` is a recording, an ``emgrec`` path, or a
    ``(SessionProtocol, SynthConfig)`` pair. ``model`` is a trained model
    or a model-file path. ``realtime_factor`` scales the sample period:
    1.0 paces at the recording's own rate, 0 streams as fast as possible
    on a single thread.
    """

    source: object
    model: object
    vote: VoteConfig = field(default_factory=VoteConfig)
    realtime_factor: float = 0.0
    latency_limit_ms: float = 300.0
    emit_every: bool = False
    sink_path: str | None = None
    trace_path: str | None = None
    fixed_tau_ms: float | None = None
    queue_capacity: int | None = None

    def __post_init__(self):
        if self.realtime_factor < 0:
            raise ValueError("realtime_factor must be >= 0")
        if self.latency_limit_ms <= 0:
            raise ValueError("latency_limit_ms must be positive")


@dataclass
class PredictionTrace:
    decisions: list
    frames: bytes
    latency_limit_ms: float
    backpressure_events: int = 0
    wall_time_s: float = 0.0

    @property
    def violations(self) -> list:
        return [d for d in self.decisions if d.decision_ms > self.latency_limit_ms]

    @property
    def max_tau_ms(self) -> float:
        return max((d.tau_ms for d in self.decisions), default=0.0)

    def to_csv(self) -> str:
        return "".join(d.csv() + "\n" for d in self.decisions)

    def write(self, path):
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(self.to_csv())


def _load_source(source) -> SemgRecording:
    if isinstance(source, SemgRecording):
        return source
    if isinstance(source, (str, os.PathLike)):
        return read_recording(source)
    proto, cfg = source
    if not isinstance(proto, SessionProtocol) or not isinstance(cfg, SynthConfig):
        raise TypeError("source must be a recording, a path or (SessionProtocol, SynthConfig)")
    return synth_recording(proto, cfg)


def run_stream(cfg: StreamConfig) -> PredictionTrace:
    model = cfg.model if isinstance(cfg.model, TrainedModel) else load_model(cfg.model)
    rec = _load_source(cfg.source)
    pipe = IncrementalPipeline(model, rec.n_channels, rec.sample_rate_hz, cfg.vote,
                               cfg.emit_every, cfg.fixed_tau_ms)
    decisions = []
    backpressure = 0
    t_start = time.perf_counter()

    if cfg.realtime_factor == 0:
        decisions = pipe.push_many(rec.samples)
    else:
        capacity = cfg.queue_capacity or 2 * model.window_spec.win_size
        fifo = queue.Queue(maxsize=capacity)
        period = cfg.realtime_factor / rec.sample_rate_hz
        counter = {"overflow": 0}
        done = object()

        def produce():
            t0 = time.perf_counter()
            for n, col in enumerate(rec.samples.T):
                delay = t0 + n * period - time.perf_counter()
                if delay > 0:
                    time.sleep(delay)
                try:
                    fifo.put_nowait(col)
                except queue.Full:
                    # consumer fell behind: note it, then wait rather than drop
                    counter["overflow"] += 1
                    fifo.put(col)
            fifo.put(done)

        producer = threading.Thread(target=produce, name="semg-producer", daemon=True)
        producer.start()
        while True:
            col = fifo.get()
            if col is done:
                break
            d = pipe.push(col)
            if d is not None:
                decisions.append(d)
        producer.join()
        backpressure = counter["overflow"]

    trace = PredictionTrace(decisions, bytes(pipe.frames), cfg.latency_limit_ms,
                            backpressure, time.perf_counter() - t_start)
    if cfg.sink_path:
        with open(cfg.sink_path, "wb") as fh:
            fh.write(trace.frames)
    if cfg.trace_path:
        trace.write(cfg.trace_path)
    return trace
