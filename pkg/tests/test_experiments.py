import json

import numpy as np
import pytest

import semgkit.experiments as ex
from conftest import synth
from semgkit.core import GestureLabel, WindowSpec
from semgkit.dataset import SessionProtocol
from semgkit.experiments import (AblationReport, EfficiencyMatrix, SweepReport,
                                 channel_ablation, feature_channel_efficiency, report_from_json,
                                 report_to_json, ssc_ablation, window_sweep)

SHORT = SessionProtocol(reps=1)


@pytest.fixture(scope="module")
def pair():
    return synth(21, protocol=SHORT), synth(22, protocol=SHORT)


@pytest.fixture(scope="module")
def efficiency(pair):
    return feature_channel_efficiency(*pair, kind="LDA")


def test_efficiency_shape_and_labels(efficiency):
    assert efficiency.values.shape == (9, 6)
    assert efficiency.row_names[0] == "Channel 1" and efficiency.row_names[-1] == "All Channels"
    assert efficiency.col_names == ("RMS", "MAV", "WL", "AR", "ZC", "SSC")
    assert np.all((efficiency.values >= 0) & (efficiency.values <= 100))
    # amplitude features on all channels separate the default profile easily
    assert efficiency.values[8, 0] > 90


def test_single_channel_single_feature_on_separable_data():
    profile = np.full((7, 8), 0.5)
    profile[:, 0] = 0.01 * 2.0 ** np.arange(7)
    protocol = SessionProtocol(reps=2)
    train_rec = synth(31, noise_frac=0.0, profile=profile, protocol=protocol)
    test_rec = synth(32, noise_frac=0.0, profile=profile, protocol=protocol)
    m = feature_channel_efficiency(train_rec, test_rec, kind="KNN")
    assert np.all(m.values[0, :3] > 95)
    # gestures differ only in amplitude, which AR, ZC and SSC do not see
    assert np.all(m.values[0, 3:] < 30)
    # channel 2 is flat across gestures
    assert m.values[1, 0] < 30


def test_failed_cell_recorded_not_fatal(pair, monkeypatch):
    real = ex.score

    def flaky(kind, tr, te, **kw):
        if tr.col_meta == ((2, "SSC", 0),):
            raise ValueError("degenerate")
        return real(kind, tr, te, **kw)

    monkeypatch.setattr(ex, "score", flaky)
    m = feature_channel_efficiency(*pair, kind="LDA")
    assert np.isnan(m.values[1, 5]) and np.isfinite(m.values[1, 4])
    assert "degenerate" in m.missing[(1, 5)]
    back = EfficiencyMatrix.from_text(m.to_text())
    assert back.missing == m.missing and np.isnan(back.values[1, 5])


def test_parallel_equals_serial(pair, efficiency):
    par = feature_channel_efficiency(*pair, kind="LDA", n_jobs=4)
    assert par.to_text() == efficiency.to_text()
    a = ssc_ablation(*pair, kinds=("LDA", "KNN"))
    b = ssc_ablation(*pair, kinds=("LDA", "KNN"), n_jobs=3)
    assert a.to_text() == b.to_text()


def test_reruns_are_identical(pair, efficiency):
    assert feature_channel_efficiency(*pair, kind="LDA").to_text() == efficiency.to_text()


def test_text_round_trip_6_significant_digits(efficiency):
    text = efficiency.to_text()
    back = EfficiencyMatrix.from_text(text)
    assert back.to_text() == text
    np.testing.assert_allclose(back.values, efficiency.values, rtol=5e-6)


def test_json_round_trip_is_exact(efficiency):
    back = report_from_json(report_to_json(efficiency))
    np.testing.assert_array_equal(back.values, efficiency.values)
    with pytest.raises(ValueError):
        report_from_json(json.dumps({"format": "semgkit-report", "version": 9}))


def test_ssc_ablation_structure(pair):
    r = ssc_ablation(*pair, kinds=("LDA", "KNN"))
    assert [(row.kind, row.configuration) for row in r.rows] == [
        ("LDA", "with SSC"), ("LDA", "without SSC"),
        ("KNN", "with SSC"), ("KNN", "without SSC")]
    assert [row.n_columns for row in r.rows] == [56, 48, 56, 48]
    back = AblationReport.from_text(r.to_text())
    assert back.to_text() == r.to_text()
    assert report_from_json(report_to_json(r)).rows == r.rows


def test_channel_ablation_has_42_columns(pair):
    r = channel_ablation(*pair, kinds=("LDA",))
    assert [row.n_columns for row in r.rows] == [56, 42]
    assert r.rows[1].configuration == "without ch 2,5"


def test_report_validation():
    row = ex.AblationRow("LDA", "x", 1, 50.0)
    with pytest.raises(ValueError):
        AblationReport("t", [row, row])
    with pytest.raises(ValueError):
        AblationReport("t", [ex.AblationRow("LDA", "x", 1, 101.0)])


def test_sweep_96_rows_and_latency(pair):
    r = window_sweep(*pair, sizes=range(25, 121), kind="LDA")
    assert len(r.rows) == 96
    assert [row.win_inc for row in r.rows[:3]] == [12, 13, 13]
    for row in r.rows:
        d = row.latency
        assert d.t_analysis_ms == pytest.approx(5.0 * row.win_size)
        assert d.decision_ms == pytest.approx(2.5 * (row.win_size + row.win_inc)
                                              + d.t_processing_ms)
        assert d.t_processing_ms < 10.0
        # with half overlap the fixed part alone passes 300 ms from size 80 on
        assert (d.decision_ms < 300.0) == (2.5 * (row.win_size + row.win_inc)
                                           + d.t_processing_ms < 300.0)
    assert all(row.latency.decision_ms < 300 for row in r.rows if row.win_size <= 79)


def test_sweep_fixed_tau_is_reproducible(pair):
    a = window_sweep(*pair, sizes=[25, 51, 75], kind="LDA", fixed_tau_ms=2.0)
    b = window_sweep(*pair, sizes=[25, 51, 75], kind="LDA", fixed_tau_ms=2.0, n_jobs=3)
    assert a.to_text() == b.to_text()
    assert SweepReport.from_text(a.to_text()).to_text() == a.to_text()
    assert report_from_json(report_to_json(a)).to_dict() == a.to_dict()
    assert a.rows[1].latency.decision_ms == 192.0


def test_sweep_fixed_increment_and_bad_sizes(pair):
    r = window_sweep(*pair, sizes=[30, 40], inc_rule=10, kind="LDA", fixed_tau_ms=0)
    assert [row.win_inc for row in r.rows] == [10, 10]
    with pytest.raises(ValueError):
        window_sweep(*pair, sizes=[1])
    with pytest.raises(ValueError):
        window_sweep(*pair, sizes=[10**6])


def test_mismatched_recordings_rejected(pair):
    from semgkit.core import SemgRecording
    other = SemgRecording(pair[1].samples[:4], pair[1].labels)
    with pytest.raises(ValueError, match="channel"):
        ssc_ablation(pair[0], other, kinds=("LDA",))
