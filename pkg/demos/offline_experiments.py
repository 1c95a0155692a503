"""
Which features, which channels, which window?
=============================================

Three offline studies on synthetic sessions: dropping the slope-sign-change
feature, dropping two channels that carry no gesture information, and
sweeping the window size while the increment stays at half the window.
Run with ``python3 demos/offline_experiments.py``.
"""

import numpy as np

from semgkit import (SessionProtocol, SynthConfig, channel_ablation, default_profile,
                     profile_gap, ssc_ablation, synth_recording, window_sweep)
from semgkit.dataset import DEFAULT_PROFILE

proto = SessionProtocol()


def session(seed, profile=DEFAULT_PROFILE, noise_frac=0.25):
    cfg = SynthConfig(seed=seed, profile=profile, noise_std=noise_frac * profile_gap(profile))
    return synth_recording(proto, cfg)


# --- SSC ablation ---------------------------------------------------------
# Without additive noise the synthetic muscle signal is pure scaled noise, and
# counting slope sign changes ignores scale, so SSC should add nothing.
clean_train = session(1, noise_frac=0.0)
clean_test = session(2, noise_frac=0.0)
report = ssc_ablation(clean_train, clean_test, kinds=("LDA", "KNN"), n_jobs=2)
print(report.to_text())

# --- channel ablation ------------------------------------------------------
# In this profile channels 2 and 5 have the same amplitude for every
# gesture, so removing them should cost next to nothing.
flat = default_profile((2, 5))
print(np.round(flat[:, [1, 4]], 3).T)    # constant rows
report = channel_ablation(session(1, flat), session(2, flat), kinds=("LDA", "KNN"), n_jobs=2)
print(report.to_text())

# --- window sweep ------------------------------------------------------------
# Noisier data makes the window size matter. Longer windows average more
# samples, so accuracy climbs, and so does the decision latency
# 2.5 ms * (w + w // 2) + tau.
noisy_train = session(10, noise_frac=1.5)
noisy_test = session(11, noise_frac=1.5)
sweep = window_sweep(noisy_train, noisy_test, sizes=range(25, 101, 15), kind="LDA",
                     fixed_tau_ms=0.0, n_jobs=2)
print(sweep.to_text())

acc = sweep.accuracies()
print("accuracy gain from the smallest to the largest window: "
      f"{acc[-1] - acc[0]:.1f} points")
over = [r.win_size for r in sweep.rows if r.latency.decision_ms >= 300.0]
print("sizes whose decision time reaches 300 ms even at tau = 0:", over)
