"""Linear-memory Minimax distances through MST-adaptive sampling."""

from .clustering import ClusterLabels, extend_labels, gmm_fit_predict, kmeans_fit_predict
from .data import DataMatrix, Dissimilarity, dissimilarity, generate_synthetic, load_csv, load_table, save_csv
from .embedding import Embedding, EigenSystem, eigendecompose, embed, embed_minimax, select_dimension, to_mercer_kernel
from .evaluation import EvalScores, evaluate
from .minimax import MstEdgeList, minimax_from_mst, minimax_oracle, prim_incremental
from .pipeline import RunConfig, run_pipeline, run_sweep
from .sampling import (
    SampleSet,
    SubsetAssignment,
    dpp_sample,
    kmeans_sample,
    mm_sample,
    random_sample,
    sample_minimax,
)

__version__ = "0.1.0"
