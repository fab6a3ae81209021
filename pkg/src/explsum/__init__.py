"""Co-cluster summarization of sparse model-explanation matrices.

Compresses an instances-by-features attribution matrix into simultaneous
instance and feature clusters chosen by a minimum-description-length
objective, and serves the resulting summary for interactive exploration.
"""

from .cost import (
    Cluster,
    Clustering,
    CostBreakdown,
    CostState,
    Marginals,
    approx_entry,
    kl_divergence,
    marginal_loss,
    marginals,
    merge_delta,
    total_cost,
)
from .engine import (
    EngineConfig,
    SummarizeResult,
    brute_force_optimal,
    summarize,
)
from .formats import load_matrix, save_matrix
from .generate import adjusted_rand_index, planted_blocks, random_sparse
from .ingest import aggregate_topics, discretize_tabular
from .lsh import LshConfig, build_lsh_table, query_lsh_table, topk_neighbors
from .matrix import (
    ColMeta,
    ExplanationMatrix,
    RowMeta,
    ValueDistribution,
    find_knee,
    normalize,
    smooth,
)
from .pipeline import RunConfig, run_pipeline
from .spectral import SpectralConfig, precluster, truncated_svd
from .summary import (
    FilterSpec,
    SummaryArtifact,
    apply_filter,
    build_summary,
    extract_subset,
    parse_summary,
    serialize_summary,
)

__version__ = "0.1.0"
