"""Contrastive fine-tuning lab: cross-entropy, supervised contrastive and
label-aware contrastive objectives on a small numpy encoder."""

from .augment import AugmentedBatch, SynonymLexicon, load_lexicon, make_contrastive_batch, synonym_replace
from .corpus import BatchPlan, DatasetSplit, Example, LabelVocab, batch_iter, filter_classes, load_dataset
from .losses import cross_entropy, joint_objective, l_lcl, l_scl, l_self
from .metrics import confusion_matrix, entropy_curve, topk_entropy, weighted_f1, welch_t_test
from .subsets import hard_subset_sequence, rank_subsets
from .trainer import TrainConfig, TrainedModel, evaluate, run_seeds, train

__version__ = "0.1.0"
