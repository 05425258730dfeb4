"""lexidga: inline detection of wordlist-based DGA domains.

Pipeline: strip the public suffix, split the remaining core into words
with a Zipfian unigram dynamic program, mean-pool frozen per-token
embeddings, and score with a small ReLU + logistic classifier.  Includes
seed-deterministic generators for four wordlist DGA families, the full
evaluation-metric suite, experiment runners, and a CLI (``lexidga``).

The ``segment`` and ``embed`` operations live in the submodules of the
same names: ``from lexidga.segment import segment``.
"""

from . import preprocess, segment, dga, embed, model, metrics, experiment

from .preprocess import Domain, SuffixSet, normalize, load_suffixes, default_suffixes
from .segment import RankedLexicon, TokenSeq, load_lexicon, default_lexicon
from .dga import (
    DgaFamilySpec,
    LabeledExample,
    SplitMix64,
    generate,
    load_benign,
    load_family_specs,
    default_family_specs,
)
from .embed import (
    HashNgramProvider,
    CacheProvider,
    FallbackProvider,
    EmbeddingCache,
    hash_token,
    load_cache,
    save_cache,
)
from .model import ModelWeights, TrainConfig, forward, train
from .metrics import (
    confusion,
    roc,
    auc,
    partial_auc_std,
    tpr_at_fpr,
    compute_report,
    MetricsReport,
)
from .experiment import ExperimentConfig, run_single_dga, run_multi_dga, bench_inference

__version__ = "0.1.0"
