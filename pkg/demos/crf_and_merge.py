"""Masked CRF decoding and per-slot merging on hand-made scores.

    python3 demos/crf_and_merge.py
"""
import numpy as np

from zat import crf
from zat.crf import CrfParams
from zat.numerics import make_rng
from zat.tagger import merge_slot_predictions

# emission scores that favour I on the first token: an invalid start
U = np.array([[0.0, 1.0, 0.0, 0.0],    # B
              [3.0, 2.0, 0.0, 0.0],    # I
              [1.0, 0.0, 2.0, 2.0]])   # O
for masked in (False, True):
    tags, score = crf.viterbi_decode(U, CrfParams.zeros(masked=masked))
    print(f"mask {'on ' if masked else 'off'}: {tags} score {score:.1f} valid={crf.is_valid(tags)}")

params = CrfParams.zeros()
print("log Z forward", round(crf.log_partition(U, params), 6), "brute force", round(crf.brute_force_logZ(U, params), 6))

# two slots claim overlapping spans; the merge keeps one per conflict
per_slot = {"store": ["O", "B", "I", "O", "O"],
            "location": ["O", "O", "B", "I", "O"],
            "date": ["O", "O", "O", "O", "B"]}
for seed in range(3):
    merged = merge_slot_predictions(per_slot, make_rng(seed, "merge"), "demo")
    print(f"seed {seed}:", [(s.slot_id, s.start, s.end) for s in merged])
