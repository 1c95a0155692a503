"""
Offline gesture recognition in a few steps
==========================================

Synthesize a training and a test session, cut them into overlapping
windows, compute time-domain features, and compare the three classifiers.
Run with ``python3 demos/quickstart.py``.
"""

import os
import tempfile

import numpy as np

from semgkit import (FeatureSpec, ChannelMask, SessionProtocol, SynthConfig, WindowSpec,
                     decision_latency, evaluate, extract_matrix, load_model, predict,
                     profile_gap, save_model, segment, synth_recording, train)
from semgkit.dataset import DEFAULT_PROFILE

# Two sessions of the default protocol: 7 gestures x 4 repetitions x 5 s at
# 200 Hz with rest at both ends. Different seeds give independent noise.
noise = 0.25 * profile_gap(DEFAULT_PROFILE)
train_rec = synth_recording(SessionProtocol(), SynthConfig(seed=1, noise_std=noise))
test_rec = synth_recording(SessionProtocol(), SynthConfig(seed=2, noise_std=noise))
print("samples per session:", train_rec.n_samples, "channels:", train_rec.n_channels)

# 51-sample windows advanced by 25 samples; each window takes the label of
# its centre sample
wspec = WindowSpec(51, 25)
idx_train = segment(train_rec, wspec)
idx_test = segment(test_rec, wspec)
print("windows per session:", len(idx_test.starts))

# all six features on all eight channels: 8 x (5 scalars + 2 AR terms) = 56 columns
fspec = FeatureSpec(("RMS", "MAV", "WL", "ZC", "SSC", "AR"))
mask = ChannelMask(tuple(range(1, 9)))
fm_train = extract_matrix(train_rec, idx_train, fspec, mask)
fm_test = extract_matrix(test_rec, idx_test, fspec, mask)
print("feature matrix:", fm_train.values.shape)

for kind in ("LDA", "KNN", "SVM"):
    model = train(kind, fm_train)
    result = evaluate(predict(model, fm_test), fm_test.row_labels)
    print(f"{kind}: {result.accuracy_pct:.2f}% ({result.n_correct}/{result.n_total})")

# the last model (SVM) with its confusion matrix
print(result.render())

# A decision arrives half a window plus half an increment after the
# movement, plus the processing time tau
budget = decision_latency(51, 25, 200, t_processing_ms=5.0)
print(f"decision latency at tau = 5 ms: {budget.decision_ms:.1f} ms")
print(f"processing allowed under 300 ms: {budget.processing_budget_ms():.1f} ms")

# models are plain JSON files and reload to identical predictions
with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "svm.json")
    save_model(model, path)
    again = load_model(path)
    same = np.array_equal(predict(again, fm_test), predict(model, fm_test))
    print("reloaded model agrees:", same)
