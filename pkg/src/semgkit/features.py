"""Time-domain sEMG features and feature-matrix assembly.

Notation:
    - :math:`f_k` : sample ``k`` of a window
    - :math:`N` : window length in samples

Every extractor reduces over the last axis, so it accepts a single window
(1-D) as well as any stack of windows. The scalar results for a stack are
computed with exactly the same arithmetic as for a lone window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SemgRecording, WindowIndex, WindowSpec, window_view

FEATURE_ORDER = ("RMS", "MAV", "WL", "ZC", "SSC", "AR")
SCALAR_FEATURES = FEATURE_ORDER[:-1]


def _check_len(x, minimum, name):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] < minimum:
        raise ValueError(f"{name} needs at least {minimum} samples per segment")
    return x


def rms(x):
    """Root mean square, :math:`\\sqrt{\\frac{1}{N}\\sum f_k^2}`."""
    x = _check_len(x, 1, "rms")
    return np.sqrt(np.mean(x * x, axis=-1))


def mav(x):
    """Mean absolute value, :math:`\\frac{1}{N}\\sum |f_k|`."""
    x = _check_len(x, 1, "mav")
    return np.mean(np.abs(x), axis=-1)


def wl(x):
    """Waveform length, :math:`\\sum_{k=1}^{N-1} |f_{k+1} - f_k|`."""
    x = _check_len(x, 2, "wl")
    return np.sum(np.abs(np.diff(x, axis=-1)), axis=-1)


def zc(x, alpha=0.0):
    """Zero crossings.

    Counts neighbouring pairs with opposite signs (product strictly
    negative) whose amplitude difference is at least ``alpha``. Samples that
    are exactly zero never count as a crossing.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    x = _check_len(x, 2, "zc")
    a, b = x[..., :-1], x[..., 1:]
    hit = (a * b < 0) & (np.abs(a - b) >= alpha)
    return np.count_nonzero(hit, axis=-1)


def ssc(x, alpha=0.0):
    """Slope sign changes.

    Counts interior samples where :math:`(f_k - f_{k-1})(f_k - f_{k+1})` is
    at least ``alpha`` and strictly positive, i.e. local extrema. Plateaus
    and monotone runs contribute nothing.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    x = _check_len(x, 3, "ssc")
    mid = x[..., 1:-1]
    prod = (mid - x[..., :-2]) * (mid - x[..., 2:])
    return np.count_nonzero((prod > 0) & (prod >= alpha), axis=-1)


def autocorrelation(x, maxlag):
    """Biased autocorrelation ``r[k] = sum(x[n] x[n+k]) / N`` for ``k = 0..maxlag``."""
    n = x.shape[-1]
    r = np.empty(x.shape[:-1] + (maxlag + 1,))
    for k in range(maxlag + 1):
        r[..., k] = np.sum(x[..., :n - k] * x[..., k:], axis=-1) / n
    return r


def levinson(r, order):
    """Solve the Yule-Walker equations by the Levinson-Durbin recursion.

    Parameters
    ----------
    r : ndarray, shape (..., order + 1)
        Autocorrelation sequence, lag 0 first.
    order : int
        Model order ``p``.

    Returns
    -------
    a : ndarray, shape (..., order)
        Prediction coefficients with :math:`x_n \\approx \\sum_k a_k x_{n-k}`.
    err : ndarray, shape (...)
        Final prediction error variance.
    """
    r = np.asarray(r, dtype=np.float64)
    a = np.zeros(r.shape[:-1] + (order,))
    err = r[..., 0].copy()
    for m in range(order):
        acc = r[..., m + 1] - np.sum(a[..., :m] * r[..., m:0:-1], axis=-1)
        ok = err > 0
        kappa = np.divide(acc, err, out=np.zeros_like(acc), where=ok)
        prev = a[..., :m].copy()
        a[..., :m] = prev - kappa[..., None] * prev[..., ::-1]
        a[..., m] = kappa
        err = np.where(ok, err * (1.0 - kappa * kappa), err)
    return a, err


def ar_coeffs(x, p=2):
    """Autoregressive coefficients ``a_1..a_p`` of each segment.

    The segment mean is removed and the Yule-Walker equations built from
    the biased autocorrelation are solved by Levinson-Durbin. A segment
    whose samples are all identical has no defined model; zeros are
    returned for it. The residual variance is not reported.
    """
    if p < 1:
        raise ValueError("AR order must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] <= 2 * p:
        raise ValueError(f"AR({p}) needs more than {2 * p} samples per segment")
    flat = np.all(x == x[..., :1], axis=-1)
    xc = x - np.mean(x, axis=-1, keepdims=True)
    a, _ = levinson(autocorrelation(xc, p), p)
    a[flat] = 0.0
    return a


@dataclass(frozen=True)
class FeatureSpec:
    """Which features to extract, in canonical column order."""

    enabled: tuple = FEATURE_ORDER
    ar_order: int = 2
    threshold_alpha: float = 0.0

    def __post_init__(self):
        names = [str(f).upper() for f in self.enabled]
        if not names:
            raise ValueError("at least one feature must be enabled")
        unknown = set(names) - set(FEATURE_ORDER)
        if unknown:
            raise ValueError(f"unknown features: {sorted(unknown)}")
        if len(set(names)) != len(names):
            raise ValueError("duplicate feature names")
        if "AR" in names and int(self.ar_order) < 1:
            raise ValueError("ar_order must be >= 1 when AR is enabled")
        if self.threshold_alpha < 0:
            raise ValueError("threshold_alpha must be non-negative")
        object.__setattr__(self, "enabled", tuple(f for f in FEATURE_ORDER if f in names))
        object.__setattr__(self, "ar_order", int(self.ar_order))
        object.__setattr__(self, "threshold_alpha", float(self.threshold_alpha))

    @classmethod
    def parse(cls, text: str, **kw) -> "FeatureSpec":
        """``'all'`` or a comma list such as ``'rms,mav,wl'``."""
        if text.strip().lower() == "all":
            return cls(FEATURE_ORDER, **kw)
        return cls(tuple(t for t in text.replace(" ", "").split(",") if t), **kw)

    def without(self, *names: str) -> "FeatureSpec":
        drop = {n.upper() for n in names}
        return FeatureSpec(tuple(f for f in self.enabled if f not in drop),
                           self.ar_order, self.threshold_alpha)

    @property
    def values_per_channel(self) -> int:
        n = sum(1 for f in self.enabled if f != "AR")
        return n + (self.ar_order if "AR" in self.enabled else 0)

    def column_names(self):
        """``(feature, coefficient index)`` pairs for one channel; scalars use index 0."""
        out = []
        for f in self.enabled:
            if f == "AR":
                out.extend(("AR", k) for k in range(1, self.ar_order + 1))
            else:
                out.append((f, 0))
        return out


FINAL_FEATURES = FeatureSpec(("RMS", "MAV", "WL", "ZC", "AR"))


@dataclass(frozen=True)
class ChannelMask:
    """Retained electrode channels, 1-based as printed on the armband."""

    enabled: tuple = (1, 2, 3, 4, 5, 6, 7, 8)
    n_channels: int = 8

    def __post_init__(self):
        ids = [int(c) for c in self.enabled]
        if not ids:
            raise ValueError("channel mask must not be empty")
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate channel ids in mask")
        bad = [c for c in ids if not 1 <= c <= self.n_channels]
        if bad:
            raise ValueError(f"channel ids {bad} outside 1..{self.n_channels}")
        object.__setattr__(self, "enabled", tuple(sorted(ids)))

    @classmethod
    def all(cls, n_channels: int = 8) -> "ChannelMask":
        return cls(tuple(range(1, n_channels + 1)), n_channels)

    @classmethod
    def parse(cls, text: str, n_channels: int = 8) -> "ChannelMask":
        """``'all'``, ``'1,3,4'`` or ``'-2,5'`` (all channels except 2 and 5)."""
        text = text.replace(" ", "")
        if text.lower() == "all":
            return cls.all(n_channels)
        if text.startswith("-"):
            drop = {int(t) for t in text[1:].split(",") if t}
            return cls.all(n_channels).without(*drop)
        return cls(tuple(int(t) for t in text.split(",") if t), n_channels)

    def without(self, *ids: int) -> "ChannelMask":
        return ChannelMask(tuple(c for c in self.enabled if c not in ids), self.n_channels)

    @property
    def indices(self) -> np.ndarray:
        """0-based row indices into a recording's sample array."""
        return np.asarray(self.enabled, dtype=np.intp) - 1


FINAL_CHANNELS = ChannelMask((1, 3, 4, 6, 7, 8))


class NonFiniteFeatureError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Rows are windows; columns are ``(channel, feature, coef)`` triples."""

    values: np.ndarray
    row_labels: np.ndarray
    col_meta: tuple
    feature_spec: FeatureSpec | None = None
    channel_mask: ChannelMask | None = None
    window_spec: WindowSpec | None = None

    def __post_init__(self):
        meta = tuple((int(c), str(f), int(i)) for c, f, i in self.col_meta)
        values = np.array(self.values, dtype=np.float64)
        if values.size == 0:
            values = values.reshape(0, len(meta))
        if values.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        if len(meta) != values.shape[1]:
            raise ValueError(f"{len(meta)} column descriptors for {values.shape[1]} columns")
        if len(set(meta)) != len(meta):
            raise ValueError("column descriptors must be unique")
        labels = np.asarray(self.row_labels, dtype=np.int64).reshape(-1)
        if labels.shape[0] != values.shape[0]:
            raise ValueError("one label per row required")
        if not np.all(np.isfinite(values)):
            raise NonFiniteFeatureError("feature matrix contains non-finite values")
        values.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "row_labels", labels)
        object.__setattr__(self, "col_meta", meta)

    @classmethod
    def from_arrays(cls, X, y, feature="X") -> "FeatureMatrix":
        """Wrap a plain matrix; column ``j`` is described as ``(j + 1, feature, 0)``."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        return cls(X, y, tuple((j + 1, feature, 0) for j in range(X.shape[1])))

    @property
    def shape(self):
        return self.values.shape

    def __len__(self):
        return self.values.shape[0]

    def take(self, rows) -> "FeatureMatrix":
        return FeatureMatrix(self.values[rows], self.row_labels[rows], self.col_meta,
                             self.feature_spec, self.channel_mask, self.window_spec)


def window_features(windows: np.ndarray, fspec: FeatureSpec) -> np.ndarray:
    """Feature block for a stack of windows.

    ``windows`` has shape ``(n_windows, n_channels, win_size)``; the result
    has shape ``(n_windows, n_channels * fspec.values_per_channel)`` in
    channel-major order.
    """
    alpha = fspec.threshold_alpha
    parts = []
    for f in fspec.enabled:
        if f == "RMS":
            parts.append(rms(windows)[..., None])
        elif f == "MAV":
            parts.append(mav(windows)[..., None])
        elif f == "WL":
            parts.append(wl(windows)[..., None])
        elif f == "ZC":
            parts.append(zc(windows, alpha)[..., None].astype(np.float64))
        elif f == "SSC":
            parts.append(ssc(windows, alpha)[..., None].astype(np.float64))
        else:
            parts.append(ar_coeffs(windows, fspec.ar_order))
    block = np.concatenate(parts, axis=-1)
    return block.reshape(block.shape[0], -1)


def column_meta(fspec: FeatureSpec, mask: ChannelMask) -> tuple:
    return tuple((c, f, k) for c in mask.enabled for f, k in fspec.column_names())


def extract_matrix(rec: SemgRecording, idx: WindowIndex, fspec: FeatureSpec,
                   mask: ChannelMask | None = None) -> FeatureMatrix:
    """Feature matrix with one row per window of ``idx``."""
    if mask is None:
        mask = ChannelMask.all(rec.n_channels)
    if max(mask.enabled) > rec.n_channels:
        raise ValueError(f"mask references channel {max(mask.enabled)} but the "
                         f"recording has {rec.n_channels}")
    windows = window_view(rec, idx)[:, mask.indices, :]
    with np.errstate(invalid="ignore", over="ignore"):
        values = window_features(windows, fspec)
    meta = column_meta(fspec, mask)
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        w, j = bad[0]
        ch, feat, _ = meta[j]
        raise NonFiniteFeatureError(
            f"non-finite value at window {w}, channel {ch}, feature {feat}")
    return FeatureMatrix(values, idx.labels, meta, fspec, mask, idx.spec)


def select_columns(fm: FeatureMatrix, fspec: FeatureSpec, mask: ChannelMask) -> FeatureMatrix:
    """Sub-matrix holding only the columns ``extract_matrix`` would produce for
    ``(fspec, mask)``; every requested column must already be present."""
    meta = column_meta(fspec, mask)
    where = {m: j for j, m in enumerate(fm.col_meta)}
    missing = [m for m in meta if m not in where]
    if missing:
        raise KeyError(f"columns not available: {missing[:3]}")
    cols = [where[m] for m in meta]
    return FeatureMatrix(fm.values[:, cols], fm.row_labels, meta, fspec, mask, fm.window_spec)
