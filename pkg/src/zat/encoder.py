"""ZAT forward stack: contextual BiLSTM, slot-description attention, conditional BiLSTM,
feedforward emission scores, and the assembled per-slot tagger."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import crf
from .embedding import PAD, CharVocabulary, Vocabulary, char_cnn, pad_chars
from .numerics import Tape, make_rng, ops, xavier_uniform_init


# ---------------------------------------------------------------------------
# Layers
# ---------------------------------------------------------------------------

def init_lstm(params, prefix, d_in, hidden, rng):
    params[f"{prefix}_Wx"] = xavier_uniform_init((d_in, 4 * hidden), rng)
    params[f"{prefix}_Wh"] = xavier_uniform_init((hidden, 4 * hidden), rng)
    b = np.zeros(4 * hidden)
    b[hidden:2 * hidden] = 1.0
    params[f"{prefix}_b"] = b


def init_bilstm(params, prefix, d_in, hidden, rng):
    init_lstm(params, f"{prefix}_fw", d_in, hidden, rng)
    init_lstm(params, f"{prefix}_bw", d_in, hidden, rng)


def bilstm(P, prefix, x, mask):
    fw = ops.lstm(x, P[f"{prefix}_fw_Wx"], P[f"{prefix}_fw_Wh"], P[f"{prefix}_fw_b"], mask)
    bw = ops.lstm(x, P[f"{prefix}_bw_Wx"], P[f"{prefix}_bw_Wh"], P[f"{prefix}_bw_b"], mask, reverse=True)
    return ops.concat([fw, bw], axis=-1)


def attention(X, Q, w, q_mask):
    """Scores ``w . [x; q; x*q]`` for every (token, description word) pair.

    ``X`` is ``(B, T, d)``, ``Q`` is ``(B, J, d)``, ``w`` is ``(3d,)``.
    Returns weights ``A (B, T, J)`` (softmax over J) and ``G = A Q``.
    """
    B, T, d = X.shape
    J = Q.shape[1]
    w_x = ops.index(w, slice(0, d))
    w_q = ops.index(w, slice(d, 2 * d))
    w_xq = ops.index(w, slice(2 * d, 3 * d))
    s_x = ops.reshape(ops.matmul(X, w_x), (B, T, 1))
    s_q = ops.reshape(ops.matmul(Q, w_q), (B, 1, J))
    s_xq = ops.matmul(ops.mul(X, w_xq), ops.swapaxes(Q, 1, 2))
    scores = ops.add(ops.add(s_xq, s_x), s_q)
    A = ops.softmax(scores, axis=-1, mask=q_mask[:, None, :])
    return A, ops.matmul(A, Q)


def feedforward(P, prefix, x):
    h = ops.tanh(ops.add(ops.matmul(x, P[f"{prefix}_W1"]), P[f"{prefix}_b1"]))
    return ops.add(ops.matmul(h, P[f"{prefix}_W2"]), P[f"{prefix}_b2"])


def _consts(params):
    tape = Tape()
    return tape, {k: tape.const(v) for k, v in params.items()}


def contextual_encode(E, params, prefix="ctx"):
    """Column-wise BiLSTM encoding of a ``(D, T)`` input; returns ``(2H, T)``."""
    tape, P = _consts(params)
    x = tape.const(np.asarray(E, dtype=float).T[None])
    return bilstm(P, prefix, x, np.ones((1, x.shape[1]))).value[0].T


def attend(X, Q, w):
    """Attention weights ``A (T, J)`` and slot-aware representations ``G (d, T)``."""
    tape = Tape()
    A, G = attention(tape.const(np.asarray(X).T[None]), tape.const(np.asarray(Q).T[None]),
                     tape.const(w), np.ones((1, np.asarray(Q).shape[1])))
    return A.value[0], G.value[0].T


def condition_encode(G, X, params, cond_prefix="cond", ff_prefix="ff"):
    """``H = G + X`` through the conditional BiLSTM and feedforward layer; returns ``U (3, T)``."""
    G, X = np.asarray(G), np.asarray(X)
    if G.shape != X.shape:
        raise ValueError(f"G {G.shape} and X {X.shape} must have the same shape")
    tape, P = _consts(params)
    H = ops.add(tape.const(G.T[None]), tape.const(X.T[None]))
    C = bilstm(P, cond_prefix, H, np.ones((1, X.shape[1])))
    return feedforward(P, ff_prefix, C).value[0].T


# ---------------------------------------------------------------------------
# Batching shared by every slot-conditioned tagger
# ---------------------------------------------------------------------------

@dataclass
class SlotBatch:
    words: list            # unique surface forms in the batch
    char_ids: np.ndarray   # (N, Lc)
    char_len: np.ndarray   # (N,)
    tok_word: np.ndarray   # (B, T) index into ``words``
    tok_vocab: np.ndarray  # (B, T)
    mask: np.ndarray       # (B, T)
    desc_word: np.ndarray  # (S, J)
    desc_vocab: np.ndarray
    desc_mask: np.ndarray
    slot_index: np.ndarray  # (B,) index into the S descriptions
    tags: np.ndarray       # (B, T), O on padding

    @property
    def size(self):
        return self.mask.shape[0]


class SlotModelBase:
    """Parameters, batching and decoding common to ZAT and the concept tagger."""

    kind = "base"
    char_width = 3

    def __init__(self, vocab: Vocabulary, config):
        self.vocab = vocab
        self.config = config
        self.params: dict = {}

    # -- parameters ---------------------------------------------------------
    def trainable_names(self) -> list:
        weft = getattr(self.config, "weft", False)
        return [k for k in self.params if k != "word_emb" or weft]

    def bind(self, tape, trainable=True) -> dict:
        names = set(self.trainable_names()) if trainable else set()
        return {k: tape.leaf(v, name=k) if k in names else tape.const(v, name=k) for k, v in self.params.items()}

    def meta(self) -> dict:
        return {"kind": self.kind, "config": asdict(self.config), "vocab": self.vocab.words()}

    # -- batching -----------------------------------------------------------
    def collate(self, items) -> SlotBatch:
        """``items`` are ``(tokens, slot, tags_or_None)`` triples."""
        B = len(items)
        T = max(len(it[0]) for it in items)
        words: dict = {}
        tok_word = np.zeros((B, T), dtype=int)
        tok_vocab = np.full((B, T), PAD, dtype=int)
        mask = np.zeros((B, T))
        tags = np.full((B, T), crf.O, dtype=int)
        slots: dict = {}
        slot_index = np.zeros(B, dtype=int)
        for b, (tokens, slot, gold) in enumerate(items):
            n = len(tokens)
            tok_word[b, :n] = [words.setdefault(w, len(words)) for w in tokens]
            tok_vocab[b, :n] = self.vocab.encode(tokens)
            mask[b, :n] = 1.0
            if gold is not None:
                tags[b, :n] = gold
            key = (slot.slot_id, slot.description_tokens)
            slot_index[b] = slots.setdefault(key, len(slots))
        S = len(slots)
        J = max(len(desc) for _, desc in slots)
        desc_word = np.zeros((S, J), dtype=int)
        desc_vocab = np.full((S, J), PAD, dtype=int)
        desc_mask = np.zeros((S, J))
        for (_, desc), k in slots.items():
            desc_word[k, :len(desc)] = [words.setdefault(w, len(words)) for w in desc]
            desc_vocab[k, :len(desc)] = self.vocab.encode(desc)
            desc_mask[k, :len(desc)] = 1.0
        word_list = list(words)
        char_ids, char_len = pad_chars(word_list, self.char_width)
        return SlotBatch(word_list, char_ids, char_len, tok_word, tok_vocab, mask,
                         desc_word, desc_vocab, desc_mask, slot_index, tags)

    @staticmethod
    def example_items(examples) -> list:
        return [(ex.utterance.tokens, ex.slot, ex.tags) for ex in examples]

    # -- inference ----------------------------------------------------------
    def emissions(self, tape, P, batch, rng=None):
        raise NotImplementedError

    def loss(self, tape, P, batch, rng=None):
        raise NotImplementedError

    def decode(self, U: np.ndarray, mask: np.ndarray) -> np.ndarray:
        """Softmax-style decoding: per-token argmax followed by orphan-I repair."""
        ids = np.argmax(U, axis=-1)
        return np.stack([crf.repair(row) for row in ids])

    def predict_tags(self, pairs, batch_size=256) -> list:
        """Tag ids for each ``(tokens, slot)`` pair, in input order."""
        order = sorted(range(len(pairs)), key=lambda i: len(pairs[i][0]))
        out = [None] * len(pairs)
        for lo in range(0, len(order), batch_size):
            idx = order[lo:lo + batch_size]
            batch = self.collate([(pairs[i][0], pairs[i][1], None) for i in idx])
            tape = Tape()
            U, _ = self.emissions(tape, self.bind(tape, trainable=False), batch)
            paths = self.decode(U.value, batch.mask)
            for row, i in enumerate(idx):
                out[i] = paths[row, :len(pairs[i][0])]
        return out

    def dev_f1(self, examples) -> float:
        from .eval import span_f1
        from .tagger import bio_to_spans
        pred = self.predict_tags([(ex.utterance.tokens, ex.slot) for ex in examples])
        p_spans, g_spans = [], []
        for k, (ex, tags) in enumerate(zip(examples, pred)):
            uid = f"{ex.utterance.id}#{k}"
            p_spans += bio_to_spans(tags, ex.slot.slot_id, uid)
            g_spans += bio_to_spans(ex.tags, ex.slot.slot_id, uid)
        return span_f1(p_spans, g_spans).f1


def _dropout(x, keep, rng):
    if rng is None or keep >= 1.0:
        return x
    return ops.mul_const(x, (rng.random(x.shape) < keep) / keep)


# ---------------------------------------------------------------------------
# ZAT
# ---------------------------------------------------------------------------

@dataclass
class ZatConfig:
    char_dim: int = 16
    char_width: int = 3
    char_filters: int = 100
    hidden: int = 200
    ff_hidden: int = 100
    use_char: bool = True
    use_crf: bool = True
    weft: bool = False
    mask_transitions: bool = True
    dropout_keep: float = 1.0


class ZatModel(SlotModelBase):
    """ZAT tagger: scores one (sentence, slot description) pair at a time."""

    kind = "zat"

    def __init__(self, vocab, word_vectors, config: ZatConfig | None = None, seed=0, params=None):
        super().__init__(vocab, config or ZatConfig())
        self.char_width = self.config.char_width
        if params is not None:
            self.params = dict(params)
        else:
            self.params = self.init_params(np.asarray(word_vectors, dtype=float), make_rng(seed, "init", self.kind))

    def init_params(self, word_vectors, rng) -> dict:
        c = self.config
        p = {"word_emb": word_vectors.copy()}
        d_in = word_vectors.shape[1]
        if c.use_char:
            p["char_emb"] = rng.normal(scale=0.1, size=(len(CharVocabulary()), c.char_dim))
            p["char_W"] = xavier_uniform_init((c.char_width * c.char_dim, c.char_filters), rng)
            p["char_b"] = np.zeros(c.char_filters)
            d_in += c.char_filters
        d = 2 * c.hidden
        init_bilstm(p, "ctx", d_in, c.hidden, rng)
        p["att_w"] = xavier_uniform_init((3 * d,), rng)
        init_bilstm(p, "cond", d, c.hidden, rng)
        p["ff_W1"] = xavier_uniform_init((d, c.ff_hidden), rng)
        p["ff_b1"] = np.zeros(c.ff_hidden)
        p["ff_W2"] = xavier_uniform_init((c.ff_hidden, crf.NUM_LABELS), rng)
        p["ff_b2"] = np.zeros(crf.NUM_LABELS)
        if c.use_crf:
            p["crf_trans"] = np.zeros((3, 3))
            p["crf_start"] = np.zeros(3)
            p["crf_end"] = np.zeros(3)
        return p

    def _inputs(self, P, batch, word_idx, vocab_ids, char_vecs):
        parts = []
        if char_vecs is not None:
            parts.append(ops.index(char_vecs, word_idx))
        parts.append(ops.embed(P["word_emb"], vocab_ids))
        return parts[0] if len(parts) == 1 else ops.concat(parts, axis=-1)

    def emissions(self, tape, P, batch: SlotBatch, rng=None):
        c = self.config
        char_vecs = None
        if c.use_char:
            char_vecs = char_cnn(P["char_emb"], P["char_W"], P["char_b"], batch.char_ids, batch.char_len,
                                 c.char_width)
        E = _dropout(self._inputs(P, batch, batch.tok_word, batch.tok_vocab, char_vecs), c.dropout_keep, rng)
        D = self._inputs(P, batch, batch.desc_word, batch.desc_vocab, char_vecs)
        X = bilstm(P, "ctx", E, batch.mask)                          # (B, T, d)
        Q_all = bilstm(P, "ctx", D, batch.desc_mask)                 # (S, J, d)
        Q = ops.index(Q_all, batch.slot_index)                       # (B, J, d)
        A, G = attention(X, Q, P["att_w"], batch.desc_mask[batch.slot_index])
        H = ops.add(G, X)
        C = _dropout(bilstm(P, "cond", H, batch.mask), c.dropout_keep, rng)
        return feedforward(P, "ff", C), A

    def crf_params(self) -> crf.CrfParams:
        return crf.CrfParams.from_params(self.params, masked=self.config.mask_transitions)

    def loss(self, tape, P, batch, rng=None):
        U, _ = self.emissions(tape, P, batch, rng)
        if self.config.use_crf:
            tm, sm = crf.transition_mask(self.config.mask_transitions)
            nll = ops.crf_nll(U, P["crf_trans"], P["crf_start"], P["crf_end"], batch.tags, batch.mask, tm, sm)
        else:
            nll = ops.softmax_cross_entropy(U, batch.tags, batch.mask)
        return ops.mean(nll)

    def decode(self, U, mask):
        if not self.config.use_crf:
            return super().decode(U, mask)
        trans, start, end = self.crf_params().effective()
        paths, _ = crf.viterbi_batch(U, trans, start, end, mask)
        return paths

    def attention_weights(self, tokens, slot) -> np.ndarray:
        """``(T, J)`` attention of every token over the slot description words."""
        batch = self.collate([(list(tokens), slot, None)])
        tape = Tape()
        _, A = self.emissions(tape, self.bind(tape, trainable=False), batch)
        return A.value[0, :, :len(slot.description_tokens)]
