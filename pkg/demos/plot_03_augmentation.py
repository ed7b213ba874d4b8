"""
Synonym replacement and the doubled batch
=========================================

Each sample gets one augmented twin.  The twin swaps about 30% of the words
that the lexicon knows for a random synonym.
"""

import numpy as np

from lclab.augment import make_contrastive_batch
from lclab.synthetic import bundled, bundled_lexicon

split = bundled("confusable")
lexicon = bundled_lexicon()
print(len(lexicon), "lexicon entries")

batch = split.train[:4]
aug = make_contrastive_batch(batch, lexicon, np.random.default_rng(3))
for i in range(len(batch)):
    j = aug.pairing[i]
    print(split.vocab.names[aug.labels[i]])
    print("   ", " ".join(aug.texts[i]))
    print("   ", " ".join(aug.texts[j]))
print("pairing:", aug.pairing.tolist())
