"""semgkit: surface-EMG hand-gesture recognition.

A recording of 8-channel sEMG is cut into overlapping windows, each window
becomes a vector of time-domain features, and a linear classifier (LDA,
KNN or a one-vs-one linear SVM) labels it as one of seven gestures. A
majority vote smooths the label stream, and changes are sent to a robot
arm as three-byte serial frames.
"""

__version__ = "0.1.0"

from .core import (GestureLabel, InsufficientSamplesError, LatencyBudget, SemgRecording,
                   WindowIndex, WindowSpec, decision_latency, segment, window_slice,
                   window_view)
from .features import (FINAL_CHANNELS, FINAL_FEATURES, ChannelMask, FeatureMatrix,
                       FeatureSpec, NonFiniteFeatureError, ar_coeffs, extract_matrix, mav,
                       rms, select_columns, ssc, wl, zc)
from .classifiers import (ColumnMismatchError, EvaluationResult, TrainedModel, evaluate,
                          predict, train, train_knn, train_lda, train_svm)
from .svm import SVMConvergenceError, fit_binary
from .modelfile import ModelFormatError, load_model, save_model
from .smoothing import MajorityVoter, VoteConfig, majority_vote
from .rng import Pcg32
from .dataset import (RecordingFormatError, SessionProtocol, SynthConfig, default_profile,
                      profile_gap, read_recording, synth_recording, write_recording)
from .commands import FrameError, RobotCommand, decode_command, encode_command
from .stream import (IncrementalPipeline, PipelineMismatchError, PredictionTrace,
                     StreamConfig, recognize, run_stream)
from .experiments import (AblationReport, EfficiencyMatrix, SweepReport, channel_ablation,
                          feature_channel_efficiency, ssc_ablation, window_sweep)
