"""Multilingual sequence taggers trained from sentence-aligned bi-text.

The pipeline: build a sparse occurrence representation shared by both
sides of a parallel corpus, train a recurrent tagger on the annotated
source side, and tag the target side(s) with the same model. A
projection baseline (EM word alignment + trigram HMM) and a linear
combiner complement the recurrent models.
"""

from .alignment import (
    UNKNOWN_TAG,
    TranslationTable,
    align,
    align_corpus,
    corpus_log_likelihood,
    project_tags,
    train_ibm1,
)
from .cbow import CbowModel, load_cbow, resolve_oov, save_cbow, train_cbow
from .combine import (
    EvalReport,
    combined_tag,
    evaluate,
    interpolate,
    tune_mu,
)
from .corpus import (
    ParallelCorpus,
    TaggedSentence,
    TagSet,
    Vocabulary,
    build_vocabulary,
    load_parallel_corpus,
    load_tagged_corpus,
    load_tagset,
    universal_tagset,
    write_tagged_corpus,
)
from .errors import ConfigError, DataError, DivergenceError
from .hmm import HmmModel, load_hmm, posterior, save_hmm, train_hmm, viterbi
from .representation import (
    CommonWordVector,
    ReprTable,
    build_representation,
    load_repr_table,
    save_repr_table,
)
from .rnn import (
    EncodedSentence,
    RnnConfig,
    RnnModel,
    encode_sentence,
    forward_pass,
    gradient_check,
    init_model,
    load_model,
    save_model,
    tag_sentence,
    train,
)

__version__ = "0.1.0"
