"""Learned order-statistic frame pooling for video event detection."""
from ._kernels import BACKEND
from .core import (
    DimensionError,
    FrameFeatureSequence,
    FramePoolError,
    HyperplaneModel,
    LabeledDataset,
    PoolingWeights,
    ResampledFeatureMatrix,
    TrainedModel,
    joint_objective,
)
from .evaluation import ScoredItem, average_precision, evaluate_model, mean_ap
from .lp import brute_force_theta, build_theta_lp, solve_theta_lp
from .pooling import baseline_weights, decision_score, pool
from .preprocess import interpolant_eval, preprocess_corpus, preprocess_video, resample
from .store import read_manifest, read_model, read_video_features, write_model
from .svm import SvmConfig, train_svm
from .synth import SynthSpec, generate
from .trainer import TrainerConfig, train_event

__version__ = "0.1.0"
