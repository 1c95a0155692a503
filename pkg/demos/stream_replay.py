"""
Replaying a session through the online recognizer
=================================================

Train the final configuration (RMS, MAV, WL, ZC and AR(2) on channels
1, 3, 4, 6, 7, 8 with a linear SVM), then push a test session through the
per-sample pipeline, as a live acquisition would. Every 25 samples the
newest window is classified, the label is smoothed by a 5-decision
majority vote, and each change of gesture is written as a 3-byte frame.
Run with ``python3 demos/stream_replay.py``.
"""

import numpy as np

from semgkit import (FINAL_CHANNELS, FINAL_FEATURES, GestureLabel, SessionProtocol,
                     StreamConfig, SynthConfig, WindowSpec, decode_command, extract_matrix,
                     majority_vote, profile_gap, recognize, run_stream, segment,
                     synth_recording, train)
from semgkit.dataset import DEFAULT_PROFILE

noise = 0.25 * profile_gap(DEFAULT_PROFILE)
train_rec = synth_recording(SessionProtocol(), SynthConfig(seed=1, noise_std=noise))
test_rec = synth_recording(SessionProtocol(), SynthConfig(seed=2, noise_std=noise))

wspec = WindowSpec(51, 25)
fm = extract_matrix(train_rec, segment(train_rec, wspec), FINAL_FEATURES, FINAL_CHANNELS)
model = train("SVM", fm)
print("final model columns:", fm.values.shape[1])     # 6 channels x (4 scalars + 2 AR terms) = 36

# as fast as possible, single thread; tau is measured per decision
trace = run_stream(StreamConfig(source=test_rec, model=model))
print("decisions:", len(trace.decisions), "frames:", len(trace.frames) // 3)
print(f"largest processing time {trace.max_tau_ms:.2f} ms, "
      f"decisions over 300 ms: {len(trace.violations)}")

# the online pipeline sees exactly the windows the batch path sees
raw_online = np.array([d.raw_label for d in trace.decisions])
raw_batch = recognize(model, test_rec)
print("online matches batch:", np.array_equal(raw_online, raw_batch))

# Scored against the window labels, smoothing looks worse: the vote needs
# three agreeing decisions, so it follows each gesture transition a
# couple of windows late. What it buys is fewer spurious commands.
smoothed = np.array(majority_vote(raw_batch))
truth = segment(test_rec, wspec).labels
print(f"raw accuracy {100 * np.mean(raw_batch == truth):.2f}%, "
      f"smoothed {100 * np.mean(smoothed == truth):.2f}%")
print("label changes, raw:", int(np.sum(raw_batch[1:] != raw_batch[:-1])),
      "smoothed:", int(np.sum(smoothed[1:] != smoothed[:-1])))

# the first few commands the arm would receive
for k in range(0, min(len(trace.frames), 5 * 3), 3):
    frame = trace.frames[k:k + 3]
    print(frame, "->", decode_command(frame).label)

# paced replay: a producer thread feeds samples at 20x the recording rate
# through a bounded queue; overflow events would mean the consumer lags
paced = run_stream(StreamConfig(source=test_rec, model=model, realtime_factor=1 / 20))
print(f"paced replay took {paced.wall_time_s:.1f} s, "
      f"backpressure events: {paced.backpressure_events}")
print("same commands as the fast replay:", paced.frames == trace.frames)
print("last smoothed gesture:", GestureLabel(int(smoothed[-1])).label)
