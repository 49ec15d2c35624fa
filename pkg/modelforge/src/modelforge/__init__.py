"""Desk-scale training and PGWT export for the detection pipeline's heads."""

from .pgwt import PgwtError, dump, load
from .training import (
    Corpus,
    DivergenceError,
    StageOrderError,
    TrainingRun,
    TrainReport,
    export_pgwt,
    load_corpus,
    prepare_stage_a,
    require_stage_a,
    train_crp_head,
)

__version__ = "0.1.0"
