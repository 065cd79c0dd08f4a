"""Fixture writers shared by the Python tests.

The ATN1 writer here is independent of the C++ one; it produces what an
external attention exporter would emit.
"""

import json
import random
import struct

import numpy as np

CATEGORIES = ["PER", "ORG", "LOC", "MISC"]


def synthetic_sentences(n, seed, entity_share=0.3):
    """Random BIO-tagged sentences with a drifting entity share."""
    rng = random.Random(seed)
    words = [f"w{i}" for i in range(400)]
    names = [f"N{i}" for i in range(120)]
    out = []
    for i in range(n):
        share = entity_share * (0.3 + 1.4 * ((i // 25) % 2))
        sentence = []
        length = rng.randint(6, 18)
        while len(sentence) < length:
            if rng.random() < share:
                cat = rng.choice(CATEGORIES)
                for j in range(rng.randint(1, 3)):
                    sentence.append((rng.choice(names), ("B-" if j == 0 else "I-") + cat))
            else:
                sentence.append((rng.choice(words), "O"))
        out.append(sentence)
    return out


def write_conll(path, sentences):
    with open(path, "w", encoding="utf-8") as f:
        for s in sentences:
            for tok, label in s:
                f.write(f"{tok}\t{label}\n")
            f.write("\n")


def drop_entities(sentences, rate, seed):
    """Predictions that miss a share of the gold spans (labelled O)."""
    rng = random.Random(seed)
    out = []
    for s in sentences:
        pred, drop = [], False
        for tok, label in s:
            if label.startswith("B-"):
                drop = rng.random() < rate
            elif label == "O":
                drop = False
            pred.append((tok, "O" if drop else label))
        out.append(pred)
    return out


def softmax_attention(layers, heads, seq_len, seed, temperature=1.0):
    rng = np.random.default_rng(seed)
    logits = rng.normal(size=(layers, heads, seq_len, seq_len)) / temperature
    e = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return (e / e.sum(axis=-1, keepdims=True)).astype("<f4")


def write_atn1(path, arrays, meta=None):
    """Writes (layers, heads, L, L) float32 arrays as consecutive ATN1 records."""
    with open(path, "wb") as f:
        for i, a in enumerate(arrays):
            layers, heads, seq_len, _ = a.shape
            header = {"layers": layers, "heads": heads, "seq_len": seq_len,
                      "dtype": "f32",
                      "meta": {"corpus_id": "py", "sentence_id": str(i),
                               "model_name": "synthetic", **(meta or {})}}
            blob = json.dumps(header, separators=(",", ":")).encode()
            f.write(b"ATN1")
            f.write(struct.pack("<HI", 1, len(blob)))
            f.write(blob)
            f.write(np.ascontiguousarray(a, dtype="<f4").tobytes())
