import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from semgkit.core import (GestureLabel, InsufficientSamplesError, LatencyBudget,
                          SemgRecording, WindowSpec, decision_latency, segment,
                          window_slice, window_view)


def ramp(n, n_ch=2, labels=None):
    samples = np.arange(n_ch * n, dtype=float).reshape(n_ch, n)
    return SemgRecording(samples, np.zeros(n, int) if labels is None else labels)


def test_gesture_labels():
    assert [int(g) for g in GestureLabel] == list(range(7))
    assert GestureLabel.WRIST_LEFT.label == "wrist-left"
    assert GestureLabel.from_label("open") is GestureLabel.OPEN
    with pytest.raises(ValueError):
        GestureLabel.from_label("thumbs-up")


def test_recording_validation():
    with pytest.raises(ValueError):
        SemgRecording(np.zeros((2, 10)), np.zeros(9, int))
    with pytest.raises(ValueError):
        SemgRecording(np.zeros((2, 10)), np.full(10, 7))
    with pytest.raises(ValueError):
        SemgRecording(np.zeros(10), np.zeros(10, int))
    rec = ramp(400)
    assert rec.duration_s == 2.0
    with pytest.raises(ValueError):
        rec.samples[0, 0] = 5.0


def test_window_count_default_session():
    rec = ramp(29000, n_ch=1)
    idx = segment(rec, WindowSpec(51, 25))
    assert len(idx) == 1158 == (29000 - 51) // 25 + 1


def test_exactly_one_window():
    idx = segment(ramp(51), WindowSpec(51, 25))
    assert idx.starts.tolist() == [0]


def test_insufficient_samples():
    with pytest.raises(InsufficientSamplesError, match="insufficient samples"):
        segment(ramp(50), WindowSpec(51, 25))


def test_window_spec_rejects_zero():
    with pytest.raises(ValueError):
        WindowSpec(0, 25)
    with pytest.raises(ValueError):
        WindowSpec(10, 11)
    assert WindowSpec(51, 25).overlap == 26


def test_window_slice_stride():
    rec = ramp(200)
    idx = segment(rec, WindowSpec(51, 25))
    np.testing.assert_array_equal(window_slice(rec, idx, 0, 0), np.arange(51))
    np.testing.assert_array_equal(window_slice(rec, idx, 1, 1), 200 + np.arange(25, 76))
    with pytest.raises(IndexError):
        window_slice(rec, idx, len(idx), 0)
    with pytest.raises(IndexError):
        window_slice(rec, idx, 0, 2)


def test_constant_zero_slice():
    rec = SemgRecording(np.zeros((1, 100)), np.zeros(100, int))
    idx = segment(rec, WindowSpec(20, 10))
    assert np.all(window_slice(rec, idx, 3, 0) == 0)
    assert window_slice(rec, idx, 3, 0).shape == (20,)


def test_centre_label():
    labels = np.repeat([0, 3], [30, 70])
    rec = ramp(100, labels=labels)
    idx = segment(rec, WindowSpec(20, 10))
    assert idx.labels.tolist() == [labels[s + 10] for s in idx.starts]


def test_drop_transitions():
    labels = np.repeat([0, 3], [30, 70])
    idx = segment(ramp(100, labels=labels), WindowSpec(20, 10), drop_transitions=True)
    for s in idx.starts:
        assert len(set(labels[s:s + 20])) == 1
    assert 20 not in idx.starts.tolist() and {10, 30} <= set(idx.starts.tolist())


def test_window_view_matches_slices():
    rec = ramp(300, n_ch=3)
    idx = segment(rec, WindowSpec(40, 13))
    view = window_view(rec, idx)
    assert view.shape == (len(idx), 3, 40)
    for w in (0, 5, len(idx) - 1):
        for c in range(3):
            np.testing.assert_array_equal(view[w, c], window_slice(rec, idx, w, c))


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 3000), win=st.integers(1, 300), inc=st.integers(1, 300))
def test_slide_oracle(n, win, inc):
    inc = min(inc, win)
    expected = oracles.window_starts(n, win, inc)
    rec = SemgRecording(np.zeros((1, n)), np.zeros(n, int))
    if not expected:
        with pytest.raises(InsufficientSamplesError):
            segment(rec, WindowSpec(win, inc))
        return
    assert segment(rec, WindowSpec(win, inc)).starts.tolist() == expected


def test_latency_examples():
    d = decision_latency(51, 25, 200, 20.0)
    assert (d.t_analysis_ms, d.t_new_ms, d.decision_ms) == (255.0, 125.0, 210.0)
    assert decision_latency(51, 25, 200).decision_ms == 190.0
    assert decision_latency(51, 25, 200).processing_budget_ms(300) == 110.0
    with pytest.raises(ValueError):
        LatencyBudget(-1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        decision_latency(0, 25, 200)
