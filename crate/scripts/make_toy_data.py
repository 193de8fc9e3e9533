"""Regenerates the small bundled space and similarity set under data/.

The space contains every term of the builtin specifications plus some
filler words. Vectors are Gaussian with a shared offset along one axis for
the first target and attribute sets, and the opposite offset for the
second ones, so the bundled specs show a visible bias.
"""

import json
import pathlib

import numpy as np

ROOT = pathlib.Path(__file__).resolve().parent.parent
SPECS = ROOT / "crates" / "core" / "data" / "weat"
DIM = 25
SHIFT = 0.8

rng = np.random.default_rng(20200415)
axis = rng.normal(size=DIM)
axis /= np.linalg.norm(axis)

offsets = {}
for path in sorted(SPECS.glob("weat*.json")):
    spec = json.loads(path.read_text())
    for key, sign in (("t1", 1.0), ("a1", 1.0), ("t2", -1.0), ("a2", -1.0)):
        for word in spec[key]:
            offsets[word.lower()] = offsets.get(word.lower(), 0.0) + sign

words = sorted(offsets) + [f"filler{i:03d}" for i in range(150)]
vectors = rng.normal(scale=0.5, size=(len(words), DIM))
for i, w in enumerate(words):
    vectors[i] += SHIFT * np.sign(offsets.get(w, 0.0)) * axis

with open(ROOT / "data" / "spaces" / "toy.vec", "w") as out:
    out.write(f"{len(words)} {DIM}\n")
    for w, v in zip(words, vectors):
        out.write(w + " " + " ".join(f"{x:.6f}" for x in v) + "\n")

unit = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
with open(ROOT / "data" / "similarity" / "toy-sim.tsv", "w") as out:
    out.write("word1\tword2\tscore\n")
    for _ in range(200):
        i, j = rng.choice(len(words), size=2, replace=False)
        score = 5.0 + 5.0 * float(unit[i] @ unit[j]) + rng.normal(scale=0.5)
        out.write(f"{words[i]}\t{words[j]}\t{score:.2f}\n")
