"""Tri-modal (temporal, textual, symbolic) long-horizon forecasting on numpy."""
from .config import RunConfig
from .data import (DatasetSpec, SplitData, WindowSet, benchmark_spec, few_shot_subset, load_csv,
                   load_registry, make_batches, split_and_normalize, synthetic_series, synthetic_split)
from .embedding import AlignProjection, EmbeddingProvider
from .errors import (ConfigurationError, ContractError, DataLoadError, DimensionError, DivergenceError,
                     SplitError)
from .evaluation import Forecast, MetricReport, evaluate, persistence_forecast, predict
from .experiments import AblationReport, pct_deg, run_ablation, run_zero_shot
from .losses import ADFState, adf_loss
from .metrics import dtw, mse_mae, tdi
from .model import ModelConfig, STaTModel, featurize, fit_codebooks
from .outputs import emit_outputs
from .symbolize import Codebook, compress, digitize, multi_scale, reconstruct, symbolize
from .training import load_checkpoint, prepare, save_checkpoint, train

__version__ = "0.1.0"
