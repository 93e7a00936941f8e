"""The counting PMI baseline and why it needs exact matches.

PMI only knows surface strings it has seen. PHSIC on sentence vectors can
still score a paraphrase.
"""

import phsic
from phsic.pmi import format_pmi

train = phsic.PairedDataset.from_texts(
    ["how are you", "how are you", "see you later", "what time is it"],
    ["fine thanks", "good thanks", "bye", "noon"],
)
pmi = phsic.fit_pmi(train)

for x, y in [("how are you", "fine thanks"),
             ("how are you", "bye"),
             ("how are you ?", "fine thanks")]:
    print(f"PMI({x!r}, {y!r}) = {format_pmi(phsic.score_pmi(pmi, x, y))}")

# Unordered token keys make "you are how" collide with "how are you".
bag = phsic.fit_pmi(train, key_mode="token-set")
print("token-set key:", phsic.score_pmi(bag, ("are", "how", "you"), ("fine", "thanks")))

# A tiny embedding table lets PHSIC score the unseen paraphrase.
table = phsic.EmbeddingTable.from_dict({
    "how": [1, 0, 0, 0], "are": [0.5, 0, 0, 0], "you": [0.5, 0.5, 0, 0],
    "see": [0, 1, 0, 0], "later": [0, 1, 0, 0], "what": [0, 0, 1, 0],
    "time": [0, 0, 1, 0], "is": [0, 0, 0.5, 0], "it": [0, 0, 0.5, 0],
    "fine": [1, 0, 0, 0], "good": [1, 0, 0, 0.5], "thanks": [1, 0, 0, 0],
    "bye": [0, 1, 0, 0], "noon": [0, 0, 1, 0],
})
emb = phsic.embed_dataset(train, table, table)
model = phsic.fit_feature(emb, phsic.cosine(), phsic.cosine())
query = phsic.embed_dataset(
    phsic.PairedDataset.from_texts(["how are you ?", "how are you ?"], ["fine thanks", "bye"]),
    table, table,
)
for text, s in zip(query.y_texts, phsic.score_pairs(model, query)):
    print(f"PHSIC('how are you ?', {text!r}) = {s:+.4f}")
