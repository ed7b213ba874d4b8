"""
Entropy curves and hard class subsets
=====================================

Given a model's score matrix and confusion matrix, look at how peaked its
predictions are and which groups of classes it mixes up most.
"""

import numpy as np

from lclab.metrics import entropy_curve
from lclab.subsets import hard_subset_sequence, rank_subsets
from lclab.synthetic import bundled
from lclab.trainer import TrainConfig, evaluate, train

split = bundled("confusable")
model, _ = train(split, TrainConfig(objective="ce", lr=1e-3, max_epochs=10))
rep = evaluate(model, split.test)
print("accuracy", rep.accuracy, "weighted F1", round(rep.f1, 4))
print(rep.confusion)

for k, h in entropy_curve(rep.scores):
    print(f"k={k}  mean entropy {h:.4f}")

ranking = rank_subsets(rep.confusion, m=2)
for combo, total in ranking.top(3):
    print([split.vocab.names[c] for c in combo], total)

# A synthetic 32-class confusion matrix with one planted confusable block.
rng = np.random.default_rng(1)
cm = np.diag(rng.integers(20, 40, size=32)) + rng.integers(0, 2, size=(32, 32))
block = [3, 11, 17, 29]
cm[np.ix_(block, block)] += 6
print(len(rank_subsets(cm, 4)), "four-class subsets")
print("hard subsets:", hard_subset_sequence(cm, m=4, rounds=3))
