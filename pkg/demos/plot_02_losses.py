"""
Three contrastive losses on one batch
=====================================

A four-row batch with two classes.  Rows 0 and 2 are one sample and its
augmented twin; rows 1 and 3 likewise.  The label-aware loss reweights each
comparison by how confident a second network is in the other sample's class.
"""

import numpy as np

from lclab import losses

H = np.array([[1.0, 0.0], [0.6, 0.8], [0.0, 1.0], [0.8, 0.6]])
labels = np.array([0, 1, 0, 1])
pairing = np.array([2, 3, 0, 1])
W = np.array([[0.7, 0.3], [0.2, 0.8], [0.6, 0.4], [0.1, 0.9]])

# Each class appears once among the originals, so the supervised positive set
# is just the twin and SCL coincides with the self-supervised loss here.
for tau in (0.1, 0.3, 0.5):
    print(f"tau={tau}:",
          "self", round(losses.l_self(H, pairing, tau).item(), 4),
          "scl", round(losses.l_scl(H, labels, pairing, tau).item(), 4),
          "lcl", round(losses.l_lcl(H, labels, pairing, W, tau).item(), 4))

# Uniform confidences cancel, so the label-aware loss falls back to SCL.
uniform = np.full_like(W, 0.5)
print("uniform W:", losses.l_lcl(H, labels, pairing, uniform, 0.3).item(),
      "scl:", losses.l_scl(H, labels, pairing, 0.3).item())

# Scaling one row of W changes nothing either; only ratios within a row matter.
scaled = W.copy()
scaled[1] *= 40.0
print("row 1 scaled:", losses.l_lcl(H, labels, pairing, scaled, 0.3).item())
