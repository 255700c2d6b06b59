"""Vocabularies, pretrained word vectors and the character CNN word encoder."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numerics import Tape, ops, xavier_uniform_init

UNK, PAD = 0, 1
UNK_TOKEN, PAD_TOKEN = "<unk>", "<pad>"


class Vocabulary:
    """Word <-> index map with ``<unk>`` at 0 and ``<pad>`` at 1."""

    def __init__(self, words=()):
        self.itos = [UNK_TOKEN, PAD_TOKEN]
        self.stoi = {UNK_TOKEN: UNK, PAD_TOKEN: PAD}
        for w in words:
            self.add(w)

    def add(self, word) -> int:
        if word not in self.stoi:
            self.stoi[word] = len(self.itos)
            self.itos.append(word)
        return self.stoi[word]

    def __len__(self):
        return len(self.itos)

    def __contains__(self, word):
        return word in self.stoi

    def lookup(self, word) -> int:
        return self.stoi.get(word, UNK)

    def encode(self, tokens) -> np.ndarray:
        return np.array([self.stoi.get(t, UNK) for t in tokens], dtype=int)

    def words(self) -> list:
        return self.itos[2:]


@dataclass
class EmbeddingMatrix:
    matrix: np.ndarray
    trainable: bool = False

    @property
    def dim(self):
        return self.matrix.shape[1]


def load_pretrained(path, dim=None) -> tuple[Vocabulary, EmbeddingMatrix]:
    """Read ``word v1 ... vD`` lines. ``<unk>`` becomes the mean vector, ``<pad>`` zeros."""
    vocab = Vocabulary()
    rows = []
    with open(Path(path), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split(" ")
            if not parts or not parts[0]:
                continue
            word, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            if len(values) != dim:
                raise ValueError(f"{path}: line {lineno}: expected {dim} values, got {len(values)}")
            if word in vocab:
                raise ValueError(f"{path}: line {lineno}: duplicate word {word!r}")
            vocab.add(word)
            rows.append(np.array(values, dtype=np.float64))
    if not rows:
        raise ValueError(f"{path}: no word vectors found")
    loaded = np.stack(rows)
    matrix = np.vstack([loaded.mean(axis=0), np.zeros(dim), loaded])
    return vocab, EmbeddingMatrix(matrix)


def random_embeddings(words, dim, rng) -> tuple[Vocabulary, EmbeddingMatrix]:
    """Small random table, for tests that do not need the bundled vectors."""
    vocab = Vocabulary(words)
    body = rng.normal(scale=0.5, size=(len(vocab) - 2, dim))
    return vocab, EmbeddingMatrix(np.vstack([body.mean(axis=0), np.zeros(dim), body]))


class CharVocabulary:
    """Fixed printable-ASCII alphabet; anything else maps to the unknown character."""

    UNK, PAD = 0, 1

    def __init__(self):
        self.chars = [chr(c) for c in range(32, 127)]
        self.index = {ch: i + 2 for i, ch in enumerate(self.chars)}

    def __len__(self):
        return len(self.chars) + 2

    def encode(self, word) -> np.ndarray:
        return np.array([self.index.get(ch, self.UNK) for ch in word], dtype=int)


CHARS = CharVocabulary()


@dataclass
class CharCnnParams:
    char_emb: np.ndarray   # (n_chars, d_char)
    filters: np.ndarray    # (width * d_char, channels)
    bias: np.ndarray       # (channels,)

    @property
    def width(self):
        return self.filters.shape[0] // self.char_emb.shape[1]

    @property
    def channels(self):
        return self.filters.shape[1]


def init_char_cnn(rng, d_char=16, width=3, channels=100) -> CharCnnParams:
    return CharCnnParams(
        rng.normal(scale=0.1, size=(len(CHARS), d_char)),
        xavier_uniform_init((width * d_char, channels), rng),
        np.zeros(channels),
    )


def pad_chars(words, width) -> tuple[np.ndarray, np.ndarray]:
    """Character ids ``(N, L)`` right-padded with PAD to at least ``width``, plus lengths."""
    encoded = [CHARS.encode(w) for w in words]
    lengths = np.array([len(e) for e in encoded], dtype=int)
    L = max(width, int(lengths.max()) if len(lengths) else width)
    ids = np.full((len(words), L), CharVocabulary.PAD, dtype=int)
    for i, e in enumerate(encoded):
        ids[i, : len(e)] = e
    return ids, lengths


def char_cnn(char_emb, filters, bias, char_ids: np.ndarray, lengths: np.ndarray, width: int):
    """Convolve and max-pool every word; returns ``(N, channels)``.

    Windows that start past ``max(len, width) - width`` only see batch padding
    and are excluded, so a word's vector does not depend on its neighbours.
    """
    N, L = char_ids.shape
    P = L - width + 1
    x = ops.embed(char_emb, char_ids)                                   # (N, L, dc)
    windows = np.arange(P)[:, None] + np.arange(width)[None, :]         # (P, w)
    x = ops.index(x, (slice(None), windows))                            # (N, P, w, dc)
    x = ops.reshape(x, (N, P, width * char_emb.shape[1]))
    resp = ops.add(ops.matmul(x, filters), bias)                        # (N, P, C)
    valid = np.arange(P)[None, :] <= (np.maximum(lengths, width) - width)[:, None]
    return ops.max_pool(resp, axis=1, valid=valid[..., None].astype(float))


def char_cnn_embed(word, params: CharCnnParams) -> np.ndarray:
    if len(word) == 0:
        raise ValueError("cannot embed an empty word")
    tape = Tape()
    ids, lengths = pad_chars([word], params.width)
    out = char_cnn(tape.const(params.char_emb), tape.const(params.filters), tape.const(params.bias),
                   ids, lengths, params.width)
    return out.value[0]


def embed_tokens(tokens, vocab: Vocabulary, emb: EmbeddingMatrix, cnn: CharCnnParams | None,
                 use_char=True) -> np.ndarray:
    """Token representation matrix ``(D, T)``: char-CNN vector stacked on the word vector."""
    word_part = emb.matrix[vocab.encode(tokens)]
    if not use_char:
        return word_part.T
    chars = np.stack([char_cnn_embed(t, cnn) for t in tokens])
    return np.concatenate([chars, word_part], axis=1).T
