"""Filtering a noisy parallel corpus through the command line.

Writes a small corpus of single-token sentences with their embeddings,
corrupts one pair in ten, then asks ``phsic select`` to keep 90%.
"""

import tempfile
from pathlib import Path

import numpy as np

from phsic.cli import main

rng = np.random.default_rng(3)
n, d = 3000, 16
X = rng.normal(size=(n, d))
Y = X @ rng.normal(size=(d, d)) / np.sqrt(d) + rng.normal(size=(n, d))
bad = rng.choice(n, n // 10, replace=False)
Y[bad] = Y[np.roll(bad, 1)]

work = Path(tempfile.mkdtemp())
pairs, emb = work / "corpus.tsv", work / "emb.txt"
pairs.write_text("".join(f"src{i}\ttgt{i}\n" for i in range(n)))
with open(emb, "w") as fh:
    fh.write(f"{2 * n} {d}\n")
    for side, M in (("src", X), ("tgt", Y)):
        for i, row in enumerate(M):
            fh.write(f"{side}{i} " + " ".join(f"{v:.17g}" for v in row) + "\n")

common = ["--pairs", str(pairs), "--embeddings", str(emb)]
main(["fit", *common, "-o", str(work / "model.phsic")])
main(["select", *common, "--model", str(work / "model.phsic"), "--keep", "90%",
      "-o", str(work / "kept.tsv"), "--audit", str(work / "audit.tsv")])

kept = np.loadtxt(work / "audit.tsv", usecols=2, dtype=int)
print(f"kept {kept.sum()} of {n} pairs")
print(f"corrupted pairs rejected: {np.mean(kept[bad] == 0):.1%} (10% expected at random)")
print("files in", work)
