"""Comparison taggers: the concept tagger (averaged description embedding) and a
closed-tagset BiLSTM tagger with character BiLSTM word features."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import crf
from .embedding import PAD, CHARS, Vocabulary, pad_chars
from .encoder import SlotModelBase, _dropout, bilstm, init_bilstm
from .numerics import Tape, make_rng, ops, xavier_uniform_init
from .tagger import SlotSpan


# ---------------------------------------------------------------------------
# Concept tagger
# ---------------------------------------------------------------------------

@dataclass
class CtConfig:
    hidden1: int = 256
    combine: int = 128
    hidden2: int = 128
    weft: bool = False
    dropout_keep: float = 1.0


class ConceptTagger(SlotModelBase):
    """Word vectors -> BiLSTM -> tanh(affine([context; mean description vector])) -> BiLSTM -> softmax."""

    kind = "ct"

    def __init__(self, vocab, word_vectors, config: CtConfig | None = None, seed=0, params=None):
        super().__init__(vocab, config or CtConfig())
        if params is not None:
            self.params = dict(params)
        else:
            self.params = self.init_params(np.asarray(word_vectors, dtype=float), make_rng(seed, "init", self.kind))

    def init_params(self, word_vectors, rng):
        c = self.config
        dim = word_vectors.shape[1]
        p = {"word_emb": word_vectors.copy()}
        init_bilstm(p, "ct1", dim, c.hidden1, rng)
        p["comb_W"] = xavier_uniform_init((2 * c.hidden1 + dim, c.combine), rng)
        p["comb_b"] = np.zeros(c.combine)
        init_bilstm(p, "ct2", c.combine, c.hidden2, rng)
        p["out_W"] = xavier_uniform_init((2 * c.hidden2, crf.NUM_LABELS), rng)
        p["out_b"] = np.zeros(crf.NUM_LABELS)
        return p

    def slot_encoding(self, P, batch):
        """Masked mean of the description word vectors, ``(S, dim)``."""
        D = ops.embed(P["word_emb"], batch.desc_vocab)                       # (S, J, dim)
        weights = batch.desc_mask / batch.desc_mask.sum(axis=1, keepdims=True)
        return ops.total(ops.mul_const(D, weights[..., None]), axis=1)

    def emissions(self, tape, P, batch, rng=None):
        c = self.config
        E = _dropout(ops.embed(P["word_emb"], batch.tok_vocab), c.dropout_keep, rng)
        X = bilstm(P, "ct1", E, batch.mask)                                 # (B, T, 2*h1)
        B, T = batch.mask.shape
        s = ops.index(self.slot_encoding(P, batch), batch.slot_index)       # (B, dim)
        s = ops.mul_const(ops.reshape(s, (B, 1, s.shape[-1])), np.ones((1, T, 1)))
        Z = ops.tanh(ops.add(ops.matmul(ops.concat([X, s], axis=-1), P["comb_W"]), P["comb_b"]))
        C = _dropout(bilstm(P, "ct2", Z, batch.mask), c.dropout_keep, rng)
        return ops.add(ops.matmul(C, P["out_W"]), P["out_b"]), Z

    def loss(self, tape, P, batch, rng=None):
        U, _ = self.emissions(tape, P, batch, rng)
        return ops.mean(ops.softmax_cross_entropy(U, batch.tags, batch.mask))


def ct_predict_slot(tokens, slot, model: ConceptTagger) -> list[str]:
    return crf.ids_to_tags(model.predict_tags([(list(tokens), slot)])[0])


# ---------------------------------------------------------------------------
# Closed-tagset BiLSTM tagger
# ---------------------------------------------------------------------------

class TagSet:
    """``O`` at 0, then ``B-slot`` / ``I-slot`` pairs in catalog order."""

    def __init__(self, slot_ids):
        self.slot_ids = list(slot_ids)
        self.labels = ["O"] + [f"{p}-{s}" for s in self.slot_ids for p in ("B", "I")]

    def __len__(self):
        return len(self.labels)

    def encode(self, utterance) -> np.ndarray:
        ids = np.zeros(len(utterance), dtype=int)
        for sp in utterance.spans:
            if sp.slot_id not in self.slot_ids:
                continue
            k = self.slot_ids.index(sp.slot_id)
            ids[sp.start] = 2 * k + 1
            ids[sp.start + 1:sp.end] = 2 * k + 2
        return ids

    def repair(self, ids) -> np.ndarray:
        """An I that does not continue a span of its own slot becomes that slot's B."""
        ids = np.array(ids, dtype=int)
        prev = 0
        for t, label in enumerate(ids):
            if label > 0 and label % 2 == 0 and prev not in (label - 1, label):
                ids[t] = label - 1
            prev = ids[t]
        return ids

    def spans(self, ids, utterance_id=None) -> list[SlotSpan]:
        ids = self.repair(ids)
        out, start = [], None
        for t in range(len(ids) + 1):
            label = ids[t] if t < len(ids) else 0
            continuing = start is not None and label == ids[start] + 1
            if start is not None and not continuing:
                out.append(SlotSpan(self.slot_ids[(ids[start] - 1) // 2], start, t, utterance_id))
                start = None
            if label > 0 and label % 2 == 1:
                start = t
        return out


@dataclass
class LstmTaggerConfig:
    char_dim: int = 16
    char_hidden: int = 25
    hidden: int = 100
    weft: bool = True
    dropout_keep: float = 0.8


@dataclass
class UtteranceBatch:
    char_ids: np.ndarray
    char_len: np.ndarray
    tok_word: np.ndarray
    tok_vocab: np.ndarray
    mask: np.ndarray
    tags: np.ndarray

    @property
    def size(self):
        return self.mask.shape[0]


class LstmTagger:
    """Per-token softmax over the target domain's full BIO tagset."""

    kind = "lstm"

    def __init__(self, vocab: Vocabulary, word_vectors, slot_ids, config: LstmTaggerConfig | None = None,
                 seed=0, params=None):
        self.vocab = vocab
        self.config = config or LstmTaggerConfig()
        self.tagset = TagSet(slot_ids)
        if params is not None:
            self.params = dict(params)
        else:
            self.params = self.init_params(np.asarray(word_vectors, dtype=float), make_rng(seed, "init", self.kind))

    def init_params(self, word_vectors, rng):
        c = self.config
        p = {"word_emb": word_vectors.copy(),
             "char_emb": rng.normal(scale=0.1, size=(len(CHARS), c.char_dim))}
        init_bilstm(p, "chr", c.char_dim, c.char_hidden, rng)
        init_bilstm(p, "wrd", word_vectors.shape[1] + 2 * c.char_hidden, c.hidden, rng)
        p["out_W"] = xavier_uniform_init((2 * c.hidden, len(self.tagset)), rng)
        p["out_b"] = np.zeros(len(self.tagset))
        return p

    def trainable_names(self):
        return [k for k in self.params if k != "word_emb" or self.config.weft]

    def bind(self, tape, trainable=True):
        names = set(self.trainable_names()) if trainable else set()
        return {k: tape.leaf(v, name=k) if k in names else tape.const(v, name=k) for k, v in self.params.items()}

    def meta(self):
        return {"kind": self.kind, "config": asdict(self.config), "vocab": self.vocab.words(),
                "slots": self.tagset.slot_ids}

    @staticmethod
    def example_items(utterances):
        return list(utterances)

    def collate(self, items) -> UtteranceBatch:
        """``items`` are utterances or token lists (the latter without gold tags)."""
        B = len(items)
        toks = [getattr(it, "tokens", it) for it in items]
        T = max(len(t) for t in toks)
        words: dict = {}
        tok_word = np.zeros((B, T), dtype=int)
        tok_vocab = np.full((B, T), PAD, dtype=int)
        mask = np.zeros((B, T))
        tags = np.zeros((B, T), dtype=int)
        for b, (it, tokens) in enumerate(zip(items, toks)):
            n = len(tokens)
            tok_word[b, :n] = [words.setdefault(w, len(words)) for w in tokens]
            tok_vocab[b, :n] = self.vocab.encode(tokens)
            mask[b, :n] = 1.0
            if hasattr(it, "spans"):
                tags[b, :n] = self.tagset.encode(it)
        char_ids, char_len = pad_chars(list(words), 1)
        return UtteranceBatch(char_ids, char_len, tok_word, tok_vocab, mask, tags)

    def char_features(self, P, batch):
        """Last forward state and first backward state of the character BiLSTM, ``(N, 2*hc)``."""
        x = ops.embed(P["char_emb"], batch.char_ids)
        cmask = (np.arange(batch.char_ids.shape[1])[None, :] < batch.char_len[:, None]).astype(float)
        h = self.config.char_hidden
        out = bilstm(P, "chr", x, cmask)                                   # (N, L, 2h)
        rows = np.arange(len(batch.char_len))
        fw = ops.index(out, (rows, batch.char_len - 1, slice(0, h)))
        bw = ops.index(out, (rows, 0, slice(h, 2 * h)))
        return ops.concat([fw, bw], axis=-1)

    def logits(self, tape, P, batch, rng=None):
        keep = self.config.dropout_keep
        chars = ops.index(self.char_features(P, batch), batch.tok_word)
        E = ops.concat([ops.embed(P["word_emb"], batch.tok_vocab), chars], axis=-1)
        C = _dropout(bilstm(P, "wrd", _dropout(E, keep, rng), batch.mask), keep, rng)
        return ops.add(ops.matmul(C, P["out_W"]), P["out_b"])

    def loss(self, tape, P, batch, rng=None):
        return ops.mean(ops.softmax_cross_entropy(self.logits(tape, P, batch, rng), batch.tags, batch.mask))

    def predict_ids(self, token_lists, batch_size=256) -> list:
        out = []
        for lo in range(0, len(token_lists), batch_size):
            chunk = token_lists[lo:lo + batch_size]
            batch = self.collate(chunk)
            tape = Tape()
            Z = self.logits(tape, self.bind(tape, trainable=False), batch).value
            out += [self.tagset.repair(np.argmax(Z[b, :len(t)], axis=-1)) for b, t in enumerate(chunk)]
        return out

    def predict_spans(self, utterances) -> dict:
        ids = self.predict_ids([list(u.tokens) for u in utterances])
        return {u.id: self.tagset.spans(p, u.id) for u, p in zip(utterances, ids)}

    def dev_f1(self, utterances) -> float:
        from .eval import span_f1
        pred = self.predict_spans(utterances)
        return span_f1([s for spans in pred.values() for s in spans],
                       [s for u in utterances for s in u.spans if s.slot_id in self.tagset.slot_ids]).f1


def lstm_tag(tokens, model: LstmTagger) -> list[str]:
    return [model.tagset.labels[i] for i in model.predict_ids([list(tokens)])[0]]
