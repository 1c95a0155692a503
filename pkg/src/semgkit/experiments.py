"""Batch studies: per-channel/per-feature efficiency, SSC and channel
ablations, and the window-length sweep.

Every study trains on one recording and scores on another. Reports render
as aligned text tables (accuracies to 6 significant digits, which the text
parser reads back) or as JSON documents.
"""

from __future__ import annotations

import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classifiers import evaluate, predict, train
from .core import LatencyBudget, SemgRecording, WindowSpec, decision_latency, segment
from .features import ChannelMask, FeatureSpec, extract_matrix, select_columns

REPORT_FORMAT = "semgkit-report"
REPORT_VERSION = 1
EFFICIENCY_FEATURES = ("RMS", "MAV", "WL", "AR", "ZC", "SSC")


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _map(fn, items, n_jobs):
    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def _check_pair(train_rec: SemgRecording, test_rec: SemgRecording):
    if train_rec.sample_rate_hz != test_rec.sample_rate_hz:
        raise ValueError("train and test recordings differ in sample rate")
    if train_rec.n_channels != test_rec.n_channels:
        raise ValueError("train and test recordings differ in channel count")


def _full_matrices(train_rec, test_rec, wspec, fspec):
    mask = ChannelMask.all(train_rec.n_channels)
    return (extract_matrix(train_rec, segment(train_rec, wspec), fspec, mask),
            extract_matrix(test_rec, segment(test_rec, wspec), fspec, mask))


def score(kind, train_fm, test_fm, **kw) -> float:
    model = train(kind, train_fm, **kw)
    return evaluate(predict(model, test_fm), test_fm.row_labels).accuracy_pct


def parse_table(text: str):
    """Rows of an aligned table as lists of cells, skipping ``#`` comment lines."""
    rows = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        rows.append(re.split(r"\s{2,}", line.strip()))
    return rows


def _align(rows):
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip()
                     for r in rows) + "\n"


# ---------------------------------------------------------------- ablations

@dataclass
class AblationRow:
    kind: str
    configuration: str
    n_columns: int
    accuracy_pct: float


@dataclass
class AblationReport:
    title: str
    rows: list = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for r in self.rows:
            if not 0.0 <= r.accuracy_pct <= 100.0:
                raise ValueError(f"accuracy out of range: {r.accuracy_pct}")
            key = (r.kind, r.configuration)
            if key in seen:
                raise ValueError(f"duplicate configuration {key}")
            seen.add(key)

    def accuracy(self, kind: str, configuration: str) -> float:
        for r in self.rows:
            if r.kind == kind and r.configuration == configuration:
                return r.accuracy_pct
        raise KeyError((kind, configuration))

    def to_text(self) -> str:
        head = [["classifier", "configuration", "columns", "accuracy_pct"]]
        body = [[r.kind, r.configuration, str(r.n_columns), _fmt(r.accuracy_pct)]
                for r in self.rows]
        return f"# {self.title}\n" + _align(head + body)

    @classmethod
    def from_text(cls, text: str) -> "AblationReport":
        first = text.splitlines()[0]
        title = first[2:] if first.startswith("# ") else ""
        rows = parse_table(text)[1:]
        return cls(title, [AblationRow(k, c, int(n), float(a)) for k, c, n, a in rows])

    def to_dict(self) -> dict:
        return {"format": REPORT_FORMAT, "version": REPORT_VERSION, "type": "ablation",
                "title": self.title, "rows": [vars(r).copy() for r in self.rows]}

    @classmethod
    def from_dict(cls, d) -> "AblationReport":
        return cls(d["title"], [AblationRow(**r) for r in d["rows"]])


def ssc_ablation(train_rec, test_rec, wspec=WindowSpec(), kinds=("SVM", "LDA", "KNN"),
                 fspec=FeatureSpec(), n_jobs=1) -> AblationReport:
    """Each classifier with all six features, then with SSC removed."""
    _check_pair(train_rec, test_rec)
    full_tr, full_te = _full_matrices(train_rec, test_rec, wspec, fspec)
    mask = ChannelMask.all(train_rec.n_channels)
    configs = [("with SSC", fspec), ("without SSC", fspec.without("SSC"))]
    jobs = [(k, name, fs) for k in kinds for name, fs in configs]

    def run(job):
        kind, name, fs = job
        tr, te = select_columns(full_tr, fs, mask), select_columns(full_te, fs, mask)
        return AblationRow(kind.upper(), name, tr.shape[1], score(kind, tr, te))

    return AblationReport("SSC ablation", _map(run, jobs, n_jobs))


def channel_ablation(train_rec, test_rec, wspec=WindowSpec(), kinds=("SVM", "LDA", "KNN"),
                     drop=(2, 5), fspec=FeatureSpec(), n_jobs=1) -> AblationReport:
    """Each classifier on all channels, then with ``drop`` removed."""
    _check_pair(train_rec, test_rec)
    full_tr, full_te = _full_matrices(train_rec, test_rec, wspec, fspec)
    everything = ChannelMask.all(train_rec.n_channels)
    dropped = ",".join(str(c) for c in drop)
    configs = [("all channels", everything), (f"without ch {dropped}", everything.without(*drop))]
    jobs = [(k, name, m) for k in kinds for name, m in configs]

    def run(job):
        kind, name, m = job
        tr, te = select_columns(full_tr, fspec, m), select_columns(full_te, fspec, m)
        return AblationRow(kind.upper(), name, tr.shape[1], score(kind, tr, te))

    return AblationReport("channel ablation", _map(run, jobs, n_jobs))


# ------------------------------------------------------- efficiency matrix

@dataclass
class EfficiencyMatrix:
    """Accuracy of single-feature classifiers: rows are channels 1..n plus all
    channels together, columns follow :data:`EFFICIENCY_FEATURES`. A cell that
    could not be computed is NaN and its reason is kept in ``missing``."""

    kind: str
    values: np.ndarray
    row_names: tuple
    col_names: tuple = EFFICIENCY_FEATURES
    missing: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.row_names), len(self.col_names)):
            raise ValueError("efficiency grid shape does not match its labels")
        ok = self.values[~np.isnan(self.values)]
        if np.any((ok < 0) | (ok > 100)):
            raise ValueError("accuracies must lie in [0, 100]")

    def to_text(self) -> str:
        head = [["channel", *self.col_names]]
        body = [[name, *("n/a" if np.isnan(v) else _fmt(v) for v in row)]
                for name, row in zip(self.row_names, self.values)]
        text = f"# feature efficiency (%) of {self.kind}\n" + _align(head + body)
        for (r, c), why in sorted(self.missing.items()):
            text += f"# missing {self.row_names[r]} / {self.col_names[c]}: {why}\n"
        return text

    @classmethod
    def from_text(cls, text: str) -> "EfficiencyMatrix":
        kind = text.splitlines()[0].rsplit(" ", 1)[-1]
        rows = parse_table(text)
        cols = tuple(rows[0][1:])
        names = tuple(r[0] for r in rows[1:])
        vals = [[np.nan if v == "n/a" else float(v) for v in r[1:]] for r in rows[1:]]
        missing = {}
        for line in text.splitlines():
            m = re.match(r"# missing (.+?) / (\S+): (.*)$", line)
            if m:
                missing[(names.index(m.group(1)), cols.index(m.group(2)))] = m.group(3)
        return cls(kind, np.array(vals), names, cols, missing)

    def to_dict(self) -> dict:
        return {"format": REPORT_FORMAT, "version": REPORT_VERSION, "type": "efficiency",
                "kind": self.kind, "row_names": list(self.row_names),
                "col_names": list(self.col_names),
                "values": [[None if np.isnan(v) else float(v) for v in r] for r in self.values],
                "missing": [[r, c, why] for (r, c), why in sorted(self.missing.items())]}

    @classmethod
    def from_dict(cls, d) -> "EfficiencyMatrix":
        vals = np.array([[np.nan if v is None else v for v in r] for r in d["values"]])
        return cls(d["kind"], vals, tuple(d["row_names"]), tuple(d["col_names"]),
                   {(r, c): why for r, c, why in d["missing"]})


def feature_channel_efficiency(train_rec, test_rec, wspec=WindowSpec(), kind="SVM",
                               ar_order=2, threshold_alpha=0.0, n_jobs=1) -> EfficiencyMatrix:
    """Cell (c, f) is the accuracy using only channel ``c`` and feature ``f``;
    the last row uses every channel for that single feature."""
    _check_pair(train_rec, test_rec)
    base = FeatureSpec(EFFICIENCY_FEATURES, ar_order, threshold_alpha)
    full_tr, full_te = _full_matrices(train_rec, test_rec, wspec, base)
    n_ch = train_rec.n_channels
    masks = [ChannelMask((c,), n_ch) for c in range(1, n_ch + 1)] + [ChannelMask.all(n_ch)]
    names = tuple(f"Channel {c}" for c in range(1, n_ch + 1)) + ("All Channels",)
    jobs = [(r, c) for r in range(len(masks)) for c in range(len(EFFICIENCY_FEATURES))]

    def run(job):
        r, c = job
        fs = FeatureSpec((EFFICIENCY_FEATURES[c],), ar_order, threshold_alpha)
        try:
            tr = select_columns(full_tr, fs, masks[r])
            te = select_columns(full_te, fs, masks[r])
            return score(kind, tr, te), None
        except Exception as exc:  # a degenerate cell must not abort the grid
            return np.nan, f"{type(exc).__name__}: {exc}"

    results = _map(run, jobs, n_jobs)
    values = np.full((len(masks), len(EFFICIENCY_FEATURES)), np.nan)
    missing = {}
    for (r, c), (acc, why) in zip(jobs, results):
        values[r, c] = acc
        if why is not None:
            missing[(r, c)] = why
    return EfficiencyMatrix(kind.upper(), values, names, EFFICIENCY_FEATURES, missing)


# ------------------------------------------------------------ window sweep

def half_overlap(win_size: int) -> int:
    """Default sweep increment: ``floor(win / 2)``, at least one sample."""
    return max(1, win_size // 2)


@dataclass
class SweepRow:
    win_size: int
    win_inc: int
    accuracy_pct: float
    latency: LatencyBudget


@dataclass
class SweepReport:
    kind: str
    rate_hz: int
    rows: list = field(default_factory=list)

    def accuracies(self) -> np.ndarray:
        return np.array([r.accuracy_pct for r in self.rows])

    def to_text(self) -> str:
        head = [["win_size", "win_inc", "accuracy_pct", "t_analysis_ms", "t_new_ms",
                 "tau_ms", "decision_ms"]]
        body = [[str(r.win_size), str(r.win_inc), _fmt(r.accuracy_pct),
                 _fmt(r.latency.t_analysis_ms), _fmt(r.latency.t_new_ms),
                 _fmt(r.latency.t_processing_ms), _fmt(r.latency.decision_ms)]
                for r in self.rows]
        return f"# window sweep, {self.kind} at {self.rate_hz} Hz\n" + _align(head + body)

    @classmethod
    def from_text(cls, text: str) -> "SweepReport":
        m = re.match(r"# window sweep, (\S+) at (\d+) Hz", text.splitlines()[0])
        rows = []
        for w, inc, acc, ta, tn, tau, _ in parse_table(text)[1:]:
            rows.append(SweepRow(int(w), int(inc), float(acc),
                                 LatencyBudget(float(ta), float(tn), float(tau))))
        return cls(m.group(1), int(m.group(2)), rows)

    def to_dict(self) -> dict:
        return {"format": REPORT_FORMAT, "version": REPORT_VERSION, "type": "sweep",
                "kind": self.kind, "rate_hz": self.rate_hz,
                "rows": [{"win_size": r.win_size, "win_inc": r.win_inc,
                          "accuracy_pct": r.accuracy_pct,
                          "t_processing_ms": r.latency.t_processing_ms,
                          "decision_ms": r.latency.decision_ms} for r in self.rows]}

    @classmethod
    def from_dict(cls, d) -> "SweepReport":
        rows = [SweepRow(r["win_size"], r["win_inc"], r["accuracy_pct"],
                         decision_latency(r["win_size"], r["win_inc"], d["rate_hz"],
                                          r["t_processing_ms"]))
                for r in d["rows"]]
        return cls(d["kind"], d["rate_hz"], rows)


def window_sweep(train_rec, test_rec, sizes, inc_rule=half_overlap, kind="SVM",
                 fspec=FeatureSpec(), mask=None, fixed_tau_ms=None, n_jobs=1) -> SweepReport:
    """Accuracy and decision latency for each window size.

    ``inc_rule`` maps a window size to its increment (an int fixes it). The
    processing time per decision is the wall time to featurize and classify
    the test windows divided by their number, unless ``fixed_tau_ms`` pins
    it for reproducible reports.
    """
    _check_pair(train_rec, test_rec)
    if mask is None:
        mask = ChannelMask.all(train_rec.n_channels)
    rule = inc_rule if callable(inc_rule) else (lambda w: min(int(inc_rule), w))
    rate = train_rec.sample_rate_hz
    limit = min(train_rec.n_samples, test_rec.n_samples)
    for w in sizes:
        if not 2 <= w <= limit:
            raise ValueError(f"window size {w} outside 2..{limit}")

    def run(w):
        ws = WindowSpec(w, rule(w))
        tr = extract_matrix(train_rec, segment(train_rec, ws), fspec, mask)
        model = train(kind, tr)
        t0 = time.perf_counter()
        te = extract_matrix(test_rec, segment(test_rec, ws), fspec, mask)
        pred = predict(model, te)
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        tau = fixed_tau_ms if fixed_tau_ms is not None else elapsed_ms / len(te)
        acc = evaluate(pred, te.row_labels).accuracy_pct
        return SweepRow(ws.win_size, ws.win_inc, acc,
                        decision_latency(ws.win_size, ws.win_inc, rate, tau))

    return SweepReport(kind.upper(), rate, _map(run, list(sizes), n_jobs))


def report_to_json(report) -> str:
    return json.dumps(report.to_dict(), indent=1) + "\n"


def report_from_json(text: str):
    d = json.loads(text)
    if d.get("format") != REPORT_FORMAT:
        raise ValueError("not a report document")
    if d.get("version", 0) > REPORT_VERSION:
        raise ValueError(f"unsupported report version {d.get('version')}")
    return {"ablation": AblationReport, "efficiency": EfficiencyMatrix,
            "sweep": SweepReport}[d["type"]].from_dict(d)
