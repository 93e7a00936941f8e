"""Pointwise HSIC (PHSIC): kernel-smoothed co-occurrence scores for paired data.

Three interchangeable estimators share one model file format:

* :func:`fit_feature` - explicit feature maps (linear kernel, cosine similarity)
* :func:`fit_icd` - any kernel, via incomplete Cholesky factors
* :func:`fit_naive` - direct data-space reference, O(n) per score

plus the counting PMI baseline and a ranking / data-selection harness.
"""

__version__ = "0.1.0"

from .dataset import (
    EmbeddingTable,
    PairedDataset,
    SentencePair,
    embed_dataset,
    encode_sentence,
    load_embeddings,
    load_pairs,
)
from .errors import (
    CorruptModelError,
    DimensionError,
    EstimatorMismatchError,
    FactorizationError,
    InsufficientDataError,
    ParameterError,
    ParseError,
    PhsicError,
)
from .estimators import fit_model, in_sample_scores, score_arrays, score_pairs
from .evaluation import (
    MetricsReport,
    RankingInstance,
    SelectionResult,
    make_negatives,
    mrr_and_recall,
    roc_auc,
    select_top_k,
    spearman_rho,
)
from .feature import FeatureModel, fit_feature, score_feature, score_feature_batch
from .icd import (
    IcdFactor,
    IcdModel,
    fit_icd,
    hsic_icd,
    icd_extend,
    icd_factorize,
    score_icd,
    score_icd_batch,
)
from .kernels import (
    GramMatrix,
    KernelSpec,
    centered_kernel_vector,
    cosine,
    gram,
    gram_means,
    kernel_eval,
    laplacian,
    linear,
    parse_kernel,
    polynomial,
    product_of,
    rbf,
    sum_of,
)
from .modelio import ModelFile, load_model, read_model_file, save_model
from .naive import NaiveModel, fit_naive, hsic_empirical, score_naive
from .pmi import PmiCountModel, fit_pmi, score_pmi
