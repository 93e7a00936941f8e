"""A first look at PHSIC on a toy sample.

Run with ``python3 demos/01_feature_vs_naive.py``.
"""

import numpy as np

import phsic

# Three 1-D pairs that move together.
ds = phsic.PairedDataset.from_vectors([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])

# The feature-space estimator keeps only means and a cross-covariance.
model = phsic.fit_feature(ds, phsic.linear(), phsic.linear())
print("means", model.mean_x, model.mean_y)
print("cov_xy", model.cov_xy)

# Pairs on the same side of the mean score positive, mixed pairs negative,
# and the mean point itself scores zero.
for x, y in [(3, 3), (2, 2), (1, 3)]:
    print(f"PHSIC({x}, {y}) = {phsic.score_feature(model, [x], [y]):+.4f}")

# The naive estimator works directly with kernel evaluations against the
# training set. For linear and cosine kernels it agrees with the feature form.
rng = np.random.default_rng(0)
X = rng.normal(size=(200, 5))
Y = X @ rng.normal(size=(5, 4)) + rng.normal(size=(200, 4))
ds = phsic.PairedDataset.from_vectors(X, Y)
feat = phsic.fit_feature(ds, phsic.cosine(), phsic.cosine())
naive = phsic.fit_naive(ds, phsic.cosine(), phsic.cosine())
a = phsic.score_feature_batch(feat, ds)
b = np.array([phsic.score_naive(naive, x, y) for x, y in zip(X, Y)])
print("largest disagreement", np.abs(a - b).max())

# Averaging PHSIC over the sample gives back HSIC.
print("mean PHSIC", a.mean(), " HSIC", phsic.hsic_empirical(naive, ds))
