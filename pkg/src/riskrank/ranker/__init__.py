"""Feed-forward ranker with gated last layers, its trainer and synthetic data."""

from .bound import (
    bound_probe,
    confidence_bound,
    gaussian_confidence_bound,
    gaussian_moments,
    last_layer_gaussian,
)
from .infer import sampling_overhead, score_features
from .model import (
    MlpRanker,
    forward_deterministic,
    forward_sample,
    init_ranker,
    load_checkpoint,
    sample_scores,
    save_checkpoint,
)
from .synth import SynthConfig, synth_dataset
from .train import TrainConfig, train
