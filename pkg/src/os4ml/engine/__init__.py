"""Type-driven encoder/decoder model core: fit, train, search, predict."""

from .encoders import EncoderState, encode, encoded_width, fit_encoders
from .model import DecoderWeights, Metrics, SplitMetrics, TrainedModel, deserialize, serialize
from .training import evaluate, forward, loss_and_grad, predict, split_table, train
from .search import hyperparameter_search
from .search_seed import splitmix64, trial_seed

__all__ = [
    "EncoderState",
    "encode",
    "encoded_width",
    "fit_encoders",
    "DecoderWeights",
    "Metrics",
    "SplitMetrics",
    "TrainedModel",
    "deserialize",
    "serialize",
    "evaluate",
    "forward",
    "loss_and_grad",
    "predict",
    "split_table",
    "train",
    "hyperparameter_search",
    "splitmix64",
    "trial_seed",
]
