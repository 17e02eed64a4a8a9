"""Multivariate forecasting with the temporal-slicing stack transform (TSSNet)."""
from .baselines import Cnn1dBaseline, PersistenceForecaster, build_cnn1d, persistence_predict
from .data import (SeriesMatrix, SynthSpec, WindowedDataset, acf, load_csv, make_windows, scale,
                   split_chronological, synth_generate)
from .metrics import EvalReport, corr, evaluate_model, rmse
from .model import TssNetModel, build_tssnet, capture_feature_maps
from .training import (SearchSpace, TrainConfig, grad_check, hyper_search, load_checkpoint,
                       save_checkpoint, train)
from .transform import TemporalTensorConfig, pad_series, slice_count, slice_stack

__version__ = "0.1.0"
