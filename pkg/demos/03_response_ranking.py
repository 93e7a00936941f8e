"""Ten-choice response ranking with shuffled distractors.

Each held-out context gets its true response plus nine responses taken from
other pairs. A dependence-aware score should put the true one first.
"""

import numpy as np

import phsic
from phsic.cli import rank_instances

rng = np.random.default_rng(2)
A = rng.normal(size=(20, 20)) / np.sqrt(20)


def sample(n):
    X = rng.normal(size=(n, 20))
    return X, X @ A.T + rng.normal(size=(n, 20))


train = phsic.PairedDataset.from_vectors(*sample(10_000))
test = phsic.PairedDataset.from_vectors(*sample(2000))

model = phsic.fit_feature(train, phsic.cosine(), phsic.cosine())
instances, scores = rank_instances(model, test, m=10, seed=0)
print(phsic.mrr_and_recall(instances, list(scores)).to_text())

# Scores that ignore the data land on the chance row: AUC .50, MRR .29,
# Recall@1 .10 and Recall@2 .20.
noise = rng.random(scores.shape)
print(phsic.mrr_and_recall(instances, list(noise)).to_text())
