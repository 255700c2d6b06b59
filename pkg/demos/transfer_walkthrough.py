"""Train a small ZAT model on three source domains, tag an unseen target domain
zero-shot, then fine-tune on 50 target utterances.

Runs in a couple of minutes on one CPU core:

    python3 demos/transfer_walkthrough.py
"""
import logging

import numpy as np

from zat.data import GeneratorSpec, bundled_vectors_path, generate_corpus
from zat.embedding import load_pretrained
from zat.experiments import Runner, Schedule, subset_f1, test_report
from zat.train import ExperimentPlan, TrainConfig

logging.basicConfig(level=logging.INFO, format="%(message)s")
logging.getLogger("zat.train").setLevel(logging.WARNING)

domains = ["fashion", "deals", "purchase", "real_estate"]
datasets = {d.name: d for d in generate_corpus(GeneratorSpec(domains=domains, utterances_per_domain=600))}
vocab, vectors = load_pretrained(bundled_vectors_path())

plan = ExperimentPlan("deals", ["fashion", "purchase", "real_estate"], take=150, dev_take=40,
                      zat=dict(hidden=32, char_filters=16, ff_hidden=32))
schedule = Schedule(base=TrainConfig(max_epochs=6, patience=2), finetune=TrainConfig(max_epochs=30, patience=8))
runner = Runner(plan, datasets, vocab, vectors.matrix, schedule)
print("slots shared between the sources and the target:", runner.shared)

for n in (0, 50):
    model = runner.adapt("zat", seed=0, n=n)
    rep = test_report(model, runner.target)
    print(f"n={n:3d}  all slots F1 {100 * rep.f1:5.1f}  shared slots F1 {100 * subset_f1(rep, runner.shared):5.1f}")

# where does the model look when tagging the store slot?
tokens = "deals at Pinemart near Oakville".split()
slot = runner.target.slot("store")
A = model.attention_weights(tokens, slot)
print("\nattention over the description", slot.description_tokens)
for tok, row in zip(tokens, A):
    print(f"  {tok:10s}", " ".join(f"{w:.2f}" for w in row))
tags = model.predict_tags([(tokens, slot)])[0]
print("store tags:", [("B", "I", "O")[t] for t in np.asarray(tags)])
