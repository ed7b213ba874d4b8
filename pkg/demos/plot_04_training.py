"""
Cross-entropy, SCL and LCL on the bundled corpora
=================================================

Train each objective on the separable corpus, then compare cross-entropy with
the label-aware loss on the confusable one.  A few seeds keep this to about a
minute.
"""

import numpy as np

from lclab.metrics import topk_entropy, welch_t_test
from lclab.synthetic import bundled, bundled_lexicon
from lclab.trainer import TrainConfig, run_seeds

lexicon = bundled_lexicon()
# the toy encoder trains from scratch, so it wants a larger step than fine-tuning
base = TrainConfig(lr=1e-3)

easy = bundled("separable")
for objective in ("ce", "scl", "lcl"):
    s = run_seeds(easy, base.replace(objective=objective), [0, 1], lexicon)
    print(f"separable {objective}: accuracy {s.mean('accuracy'):.3f}")

hard = bundled("confusable")
runs = {o: run_seeds(hard, base.replace(objective=o), [0, 1, 2], lexicon) for o in ("ce", "lcl")}
for o, s in runs.items():
    ent = np.mean([topk_entropy(r.report.scores, 2) for r in s.runs])
    print(f"confusable {o}: accuracy {s.mean('accuracy'):.3f} +- {s.sd('accuracy'):.3f}, top-2 entropy {ent:.3f}")

t, p = welch_t_test(runs["lcl"].values("accuracy"), runs["ce"].values("accuracy"))
print(f"Welch t = {t:.3f}, p = {p:.3f}")

best = runs["lcl"].runs[0]
print(best.history.to_csv())
