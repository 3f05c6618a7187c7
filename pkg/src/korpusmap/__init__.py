"""korpusmap: document maps for labeled judgment corpora.

Pipeline: corpus ingestion -> TF-IDF -> PCA / Barnes-Hut t-SNE -> metrics,
SVG figures and a self-contained map bundle for the interactive viewer.
"""

import os as _os

# KORPUSMAP_THREADS caps worker threads; it must take effect before the
# numeric libraries initialize their pools, hence before any import below.
_threads = _os.environ.get("KORPUSMAP_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                 "MKL_NUM_THREADS", "NUMBA_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)
del _os, _threads

from .corpus import (
    Corpus,
    Document,
    Institution,
    LabelScheme,
    RemoteConfig,
    fetch_remote,
    labels_of,
    load_jsonl,
    sample_stratified,
    save_jsonl,
)
from .errors import (
    BundleError,
    CorpusError,
    KorpusmapError,
    ReductionError,
    VectorizeError,
)
from .linred import PcaModel, pca_fit, pca_transform
from .mapeval import MapMetrics, evaluate_map, grid_occupancy, knn_label_agreement
from .mapio import (
    MapBundle,
    build_bundle,
    color_assignment,
    export_bundle,
    read_bundle,
    render_svg,
    write_bundle,
)
from .textvec import (
    DocTermMatrix,
    Vocabulary,
    build_vocabulary,
    load_matrix,
    save_matrix,
    tokenize,
    vectorize_tfidf,
)
from .tsne import (
    Affinities,
    EmbedState,
    TsneConfig,
    calibrate_affinities,
    gradient_barnes_hut,
    gradient_exact,
    joint_q,
    kl_divergence,
    knn_affinities,
    run_tsne,
    squared_distances,
)

__version__ = "0.1.0"
