"""Versioned JSON documents for trained models.

Floats are written with Python's shortest round-tripping repr, so a
reloaded model reproduces the original predictions bit for bit.
"""

import json

import numpy as np

from .classifiers import (KNNPayload, LDAPayload, Standardizer, SVMPayload,
                          TrainedModel)
from .core import WindowSpec
from .features import ChannelMask, FeatureSpec

MODEL_FORMAT = "semgkit-model"
MODEL_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _arr(a):
    return np.asarray(a).tolist()


def _payload_doc(model):
    p = model.payload
    if model.kind == "LDA":
        return {"classes": _arr(p.classes), "means": _arr(p.means),
                "precision": _arr(p.precision), "log_priors": _arr(p.log_priors)}
    if model.kind == "KNN":
        return {"k": p.k, "X": _arr(p.X), "y": _arr(p.y)}
    return {"classes": _arr(p.classes), "pairs": _arr(p.pairs), "W": _arr(p.W),
            "b": _arr(p.b), "C": p.C}


def _payload_from(kind, d, n_cols):
    f = lambda key: np.asarray(d[key], dtype=np.float64)  # noqa: E731
    i = lambda key: np.asarray(d[key], dtype=np.int64)    # noqa: E731
    if kind == "LDA":
        return LDAPayload(i("classes"), f("means").reshape(-1, n_cols),
                          f("precision").reshape(n_cols, n_cols), f("log_priors"))
    if kind == "KNN":
        return KNNPayload(f("X").reshape(-1, n_cols), i("y"), int(d["k"]))
    if kind == "SVM":
        return SVMPayload(i("classes"), i("pairs").reshape(-1, 2),
                          f("W").reshape(-1, n_cols), f("b"), float(d["C"]))
    raise ModelFormatError(f"unknown model kind {kind!r}")


def model_to_dict(model: TrainedModel) -> dict:
    fs, cm, ws = model.feature_spec, model.channel_mask, model.window_spec
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind,
        "col_meta": [list(m) for m in model.col_meta],
        "feature_spec": None if fs is None else {
            "enabled": list(fs.enabled), "ar_order": fs.ar_order,
            "threshold_alpha": fs.threshold_alpha},
        "channel_mask": None if cm is None else {
            "enabled": list(cm.enabled), "n_channels": cm.n_channels},
        "window_spec": None if ws is None else {
            "win_size": ws.win_size, "win_inc": ws.win_inc},
        "standardizer": {"mean": _arr(model.standardizer.mean),
                         "std": _arr(model.standardizer.std)},
        "payload": _payload_doc(model),
        "extra": dict(model.extra),
    }


def model_from_dict(d: dict) -> TrainedModel:
    if d.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"not a model document (format tag {d.get('format')!r})")
    version = d.get("version")
    if not isinstance(version, int) or version > MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {version!r}; "
                               f"this build reads up to v{MODEL_VERSION}")
    meta = tuple(tuple(m) for m in d["col_meta"])
    n_cols = len(meta)
    fs = d.get("feature_spec")
    cm = d.get("channel_mask")
    ws = d.get("window_spec")
    return TrainedModel(
        kind=d["kind"],
        standardizer=Standardizer(np.asarray(d["standardizer"]["mean"], dtype=np.float64),
                                  np.asarray(d["standardizer"]["std"], dtype=np.float64)),
        col_meta=meta,
        payload=_payload_from(d["kind"], d["payload"], n_cols),
        feature_spec=None if fs is None else FeatureSpec(tuple(fs["enabled"]), fs["ar_order"],
                                                         fs["threshold_alpha"]),
        channel_mask=None if cm is None else ChannelMask(tuple(cm["enabled"]), cm["n_channels"]),
        window_spec=None if ws is None else WindowSpec(ws["win_size"], ws["win_inc"]),
        extra=dict(d.get("extra", {})),
    )


def dumps(model: TrainedModel) -> str:
    return json.dumps(model_to_dict(model), indent=1) + "\n"


def loads(text: str) -> TrainedModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from None
    return model_from_dict(doc)


def save_model(model: TrainedModel, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(model))


def load_model(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
