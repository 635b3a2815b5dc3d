"""DeepVar forward architecture.

Per token a character encoder (CNN or BiLSTM over one-hot characters) is
concatenated with the word vector and projected to width ``D = 2 *
word_lstm_states``. ``units`` residual units follow, each two stacked BiLSTMs
``F`` with ``y = F(x) + x``. A dense hidden layer and a linear map then give
one score per tag; those emissions feed the CRF.

Sequences are processed as padded batches ``(B, N, ...)`` with a boolean
mask; padding sits at the end of each row and never reaches real positions
(the backward direction keeps a zero state until it meets the last real
token).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import NamedTuple, Sequence

import numpy as np

from . import numerics as nx
from .corpus import NUM_TAGS
from .crf import batch_nll, viterbi
from .embeddings import DEFAULT_ALPHABET, CharAlphabet, CharEncoding, EmbeddingTable, char_indices, resolve_index
from .errors import ConfigError
from .numerics import Parameter, Rng, Tensor

GATES = ("i", "f", "o", "c")


@dataclass
class ModelConfig:
    char_encoder: str = "cnn"  # "cnn" | "bilstm"
    max_char_length: int = 30
    char_emb_size: int | None = None  # None feeds raw one-hot rows to the encoder
    char_emb_dropout: float = 0.0
    cnn_filters: int = 30
    cnn_window: int = 3
    char_lstm_states: int = 25
    char_dropout: float = 0.0
    word_dim: int = 50
    word_lstm_states: int = 50
    units: int = 1
    word_lstm_dropout: float = 0.0
    hidden_states: int = 50
    hidden_dropout: float = 0.0
    dense_activation: str = "tanh"  # "tanh" | "linear"
    candidate_activation: str = "tanh"  # "tanh" | "sigmoid"
    max_word_length: int = 115
    crf_start_stop: bool = False
    fine_tune_embeddings: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.char_encoder not in ("cnn", "bilstm"):
            raise ConfigError(f"model.char_encoder must be 'cnn' or 'bilstm', got {self.char_encoder!r}")
        if self.dense_activation not in ("tanh", "linear"):
            raise ConfigError(f"model.dense_activation must be 'tanh' or 'linear', got {self.dense_activation!r}")
        if self.candidate_activation not in ("tanh", "sigmoid"):
            raise ConfigError(f"model.candidate_activation must be 'tanh' or 'sigmoid'")
        for name in ("max_char_length", "cnn_filters", "cnn_window", "char_lstm_states", "word_dim",
                     "word_lstm_states", "units", "hidden_states", "max_word_length"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"model.{name} must be a positive integer, got {v!r}")
        if self.char_emb_size is not None and (not isinstance(self.char_emb_size, int) or self.char_emb_size < 1):
            raise ConfigError(f"model.char_emb_size must be a positive integer or null")
        for name in ("char_emb_dropout", "char_dropout", "word_lstm_dropout", "hidden_dropout"):
            v = getattr(self, name)
            if not 0 <= v < 1:
                raise ConfigError(f"model.{name} must be in [0, 1), got {v}")
        if self.char_encoder == "cnn" and self.cnn_window > self.max_char_length:
            raise ConfigError(f"model.cnn_window {self.cnn_window} exceeds max_char_length {self.max_char_length}")

    @property
    def char_input_size(self) -> int:
        return self.char_emb_size or DEFAULT_ALPHABET.size

    @property
    def char_dim(self) -> int:
        return self.cnn_filters if self.char_encoder == "cnn" else 2 * self.char_lstm_states

    @property
    def unit_dim(self) -> int:
        return 2 * self.word_lstm_states

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown model config key(s): {', '.join(unknown)}")
        return cls(**d)


# -- initialisation ---------------------------------------------------------------


def glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


# -- LSTM -----------------------------------------------------------------------------


class LstmState(NamedTuple):
    h: Tensor
    c: Tensor


@dataclass
class LstmParams:
    W: dict  # gate -> (state, input)
    U: dict  # gate -> (state, state)
    b: dict  # gate -> (state,)

    @classmethod
    def create(cls, prefix: str, input_size: int, state_size: int, rng: np.random.Generator | None = None):
        W, U, b = {}, {}, {}
        for g in GATES:
            if rng is None:
                w = np.zeros((state_size, input_size))
                u = np.zeros((state_size, state_size))
            else:
                w = glorot(rng, (state_size, input_size), input_size, state_size)
                u = orthogonal(rng, state_size)
            bias = np.ones(state_size) if (g == "f" and rng is not None) else np.zeros(state_size)
            W[g] = Parameter(f"{prefix}.W_{g}", w)
            U[g] = Parameter(f"{prefix}.U_{g}", u)
            b[g] = Parameter(f"{prefix}.b_{g}", bias)
        return cls(W, U, b)

    @property
    def input_size(self) -> int:
        return self.W["i"].shape[1]

    @property
    def state_size(self) -> int:
        return self.W["i"].shape[0]

    def parameters(self) -> list:
        return [d[g] for d in (self.W, self.U, self.b) for g in GATES]

    def fused(self):
        """Gate-stacked (4H, in), (4H, H), (4H,) in i, f, o, c order."""
        return (nx.concat([self.W[g] for g in GATES], 0),
                nx.concat([self.U[g] for g in GATES], 0),
                nx.concat([self.b[g] for g in GATES], 0))


def _activation(name: str):
    return nx.tanh if name == "tanh" else nx.sigmoid


def _gates(pre: Tensor, c_prev: Tensor, h_size: int, candidate: str) -> LstmState:
    ifo = nx.sigmoid(pre[..., :3 * h_size])
    i, f, o = ifo[..., :h_size], ifo[..., h_size:2 * h_size], ifo[..., 2 * h_size:]
    c_hat = _activation(candidate)(pre[..., 3 * h_size:])
    c = f * c_prev + i * c_hat
    return LstmState(o * nx.tanh(c), c)


def lstm_cell(params: LstmParams, x_t, state: LstmState | None = None, candidate: str = "tanh") -> LstmState:
    """One step; ``x_t`` is (input,) or (batch, input)."""
    x_t = nx.as_tensor(x_t)
    if x_t.shape[-1] != params.input_size:
        raise ValueError(f"lstm_cell: input has size {x_t.shape[-1]}, parameters expect {params.input_size}")
    H = params.state_size
    if state is None:
        zero = Tensor(np.zeros(x_t.shape[:-1] + (H,)))
        state = LstmState(zero, zero)
    W, U, b = params.fused()
    pre = x_t @ W.T + state.h @ U.T + b
    return _gates(pre, state.c, H, candidate)


def run_lstm(params: LstmParams, xs, mask: np.ndarray, reverse: bool = False, candidate: str = "tanh"):
    """Unroll over a padded batch ``xs`` (B, N, in); returns outputs (B, N, H) and the final state."""
    xs = nx.as_tensor(xs)
    B, N, D = xs.shape
    if D != params.input_size:
        raise ValueError(f"run_lstm: input has size {D}, parameters expect {params.input_size}")
    H = params.state_size
    W, U, b = params.fused()
    xp = nx.reshape(nx.reshape(xs, (B * N, D)) @ W.T + b, (B, N, 4 * H))
    UT = U.T
    h = c = Tensor(np.zeros((B, H)))
    outs = [None] * N
    for t in (range(N - 1, -1, -1) if reverse else range(N)):
        pre = xp[:, t, :] + h @ UT
        h_new, c_new = _gates(pre, c, H, candidate)
        m = mask[:, t:t + 1]
        h = nx.select(m, h_new, h)
        c = nx.select(m, c_new, c)
        outs[t] = h
    return nx.stack(outs, axis=1), LstmState(h, c)


def bilstm_batch(fwd: LstmParams, bwd: LstmParams, xs, mask: np.ndarray, candidate: str = "tanh") -> Tensor:
    out_f, _ = run_lstm(fwd, xs, mask, False, candidate)
    out_b, _ = run_lstm(bwd, xs, mask, True, candidate)
    return nx.concat([out_f, out_b], axis=-1)


def bilstm(fwd: LstmParams, bwd: LstmParams, sequence, candidate: str = "tanh") -> Tensor:
    """(N, in) -> (N, 2H): forward and backward hidden states side by side."""
    seq = nx.as_tensor(sequence)
    if seq.ndim != 2 or seq.shape[0] == 0:
        raise ValueError(f"bilstm: need a non-empty (N, input) sequence, got shape {seq.shape}")
    n = seq.shape[0]
    out = bilstm_batch(fwd, bwd, nx.reshape(seq, (1,) + seq.shape), np.ones((1, n), bool), candidate)
    return nx.reshape(out, (n, out.shape[-1]))


# -- character encoders ---------------------------------------------------------------


@dataclass
class CharCnnParams:
    filters: Parameter  # (num_filters, window, char input size)
    bias: Parameter  # (num_filters,)

    @property
    def num_filters(self) -> int:
        return self.filters.shape[0]

    @property
    def window(self) -> int:
        return self.filters.shape[1]


def _lengths_mask(lengths, width: int) -> np.ndarray:
    return np.arange(width)[None, :] < np.asarray(lengths)[:, None]


def char_cnn_batch(chars, lengths, params: CharCnnParams) -> Tensor:
    """Same-padded 1-D convolution, tanh, max over real character positions: (M, l, C) -> (M, F)."""
    x = nx.as_tensor(chars)
    M, L, C = x.shape
    F, w, C2 = params.filters.shape
    if C != C2:
        raise ValueError(f"char_cnn: input width {C} does not match filter width {C2}")
    left, right = (w - 1) // 2, w // 2
    parts = [Tensor(np.zeros((M, left, C)))] if left else []
    parts.append(x)
    if right:
        parts.append(Tensor(np.zeros((M, right, C))))
    padded = nx.concat(parts, axis=1) if len(parts) > 1 else x
    windows = padded[:, np.arange(L)[:, None] + np.arange(w)[None, :], :]  # (M, L, w, C)
    flat = nx.reshape(windows, (M * L, w * C))
    act = nx.tanh(flat @ nx.reshape(params.filters, (F, w * C)).T + params.bias)
    return nx.max_pool_over_time(nx.reshape(act, (M, L, F)), _lengths_mask(lengths, L))


def char_bilstm_batch(chars, lengths, fwd: LstmParams, bwd: LstmParams, candidate: str = "tanh") -> Tensor:
    """Final forward and backward states over the real characters only: (M, l, C) -> (M, 2H)."""
    x = nx.as_tensor(chars)
    mask = _lengths_mask(lengths, x.shape[1])
    _, last_f = run_lstm(fwd, x, mask, False, candidate)
    _, last_b = run_lstm(bwd, x, mask, True, candidate)
    return nx.concat([last_f.h, last_b.h], axis=-1)


def char_repr_cnn(encoding: CharEncoding, params: CharCnnParams) -> Tensor:
    if encoding.valid_length < 1:
        raise ValueError("char_repr_cnn: empty encoding")
    out = char_cnn_batch(encoding.matrix[None], [encoding.valid_length], params)
    return nx.reshape(out, (params.num_filters,))


def char_repr_bilstm(encoding: CharEncoding, fwd: LstmParams, bwd: LstmParams, candidate: str = "tanh") -> Tensor:
    if encoding.valid_length < 1:
        raise ValueError("char_repr_bilstm: empty encoding")
    out = char_bilstm_batch(encoding.matrix[None], [encoding.valid_length], fwd, bwd, candidate)
    return nx.reshape(out, (out.shape[-1],))


# -- residual stack ---------------------------------------------------------------------


@dataclass
class StackUnit:
    layers: list  # [(fwd, bwd), (fwd, bwd)]

    @classmethod
    def create(cls, prefix: str, dim: int, rng=None):
        if dim % 2:
            raise ValueError(f"unit dimension must be even, got {dim}")
        h = dim // 2
        return cls([(LstmParams.create(f"{prefix}.layer{k}.fwd", dim, h, rng),
                     LstmParams.create(f"{prefix}.layer{k}.bwd", dim, h, rng)) for k in range(2)])

    @property
    def dim(self) -> int:
        return self.layers[0][0].input_size

    def parameters(self) -> list:
        return [p for f, b in self.layers for p in f.parameters() + b.parameters()]


def residual_unit(unit: StackUnit, sequence, mask=None, training: bool = False, rng=None,
                  dropout: float = 0.0, candidate: str = "tanh") -> Tensor:
    """``F(x) + x`` with ``F`` the two stacked BiLSTMs. Accepts (N, D) or padded (B, N, D)."""
    x = nx.as_tensor(sequence)
    if x.shape[-1] != unit.dim:
        raise ValueError(f"residual_unit: input width {x.shape[-1]} does not match unit width {unit.dim}")
    single = x.ndim == 2
    xb = nx.reshape(x, (1,) + x.shape) if single else x
    if mask is None:
        mask = np.ones(xb.shape[:2], dtype=bool)
    h = xb
    for fwd, bwd in unit.layers:
        h = bilstm_batch(fwd, bwd, h, mask, candidate)
        h = nx.dropout(h, dropout, training, rng)
    y = h + xb
    return nx.reshape(y, x.shape) if single else y


# -- full model --------------------------------------------------------------------------


class DeepVar:
    """Parameters plus vocabulary; all shapes follow :class:`ModelConfig`."""

    def __init__(self, config: ModelConfig, vocab: Sequence[str], embedding_matrix: np.ndarray,
                 rng: Rng | None = None, alphabet: CharAlphabet = DEFAULT_ALPHABET):
        cfg = self.config = config
        self.alphabet = alphabet
        self.vocab = list(vocab)
        self.word_index = {}
        for i, w in enumerate(self.vocab):
            self.word_index.setdefault(w, i)
        if embedding_matrix.shape != (len(self.vocab) + 1, cfg.word_dim):
            raise ValueError(f"embedding matrix shape {embedding_matrix.shape} does not fit "
                             f"{len(self.vocab)} words + unk of dim {cfg.word_dim}")
        gen = rng.generator if rng is not None else None
        self.params: dict[str, Parameter] = {}

        def add(p: Parameter) -> Parameter:
            if p.name in self.params:
                raise ValueError(f"duplicate parameter name {p.name}")
            self.params[p.name] = p
            return p

        def dense(name, n_out, n_in):
            w = glorot(gen, (n_out, n_in), n_in, n_out) if gen is not None else np.zeros((n_out, n_in))
            return add(Parameter(f"{name}.W", w)), add(Parameter(f"{name}.b", np.zeros(n_out)))

        self.word_embedding = add(Parameter("word.embedding", embedding_matrix, trainable=cfg.fine_tune_embeddings))
        C = cfg.char_input_size
        self.char_embedding = None
        if cfg.char_emb_size:
            e = glorot(gen, (alphabet.size, C), alphabet.size, C) if gen is not None else np.zeros((alphabet.size, C))
            self.char_embedding = add(Parameter("char.embedding", e))
        if cfg.char_encoder == "cnn":
            F, w = cfg.cnn_filters, cfg.cnn_window
            filt = glorot(gen, (F, w, C), w * C, F) if gen is not None else np.zeros((F, w, C))
            self.char_cnn = CharCnnParams(add(Parameter("char.cnn.filters", filt)),
                                          add(Parameter("char.cnn.bias", np.zeros(F))))
        else:
            self.char_fwd = LstmParams.create("char.fwd", C, cfg.char_lstm_states, gen)
            self.char_bwd = LstmParams.create("char.bwd", C, cfg.char_lstm_states, gen)
            for p in self.char_fwd.parameters() + self.char_bwd.parameters():
                add(p)
        D = cfg.unit_dim
        self.input_W, self.input_b = dense("input", D, cfg.word_dim + cfg.char_dim)
        self.units = []
        for k in range(cfg.units):
            unit = StackUnit.create(f"unit{k}", D, gen)
            for p in unit.parameters():
                add(p)
            self.units.append(unit)
        self.hidden_W, self.hidden_b = dense("hidden", cfg.hidden_states, D)
        self.output_W, self.output_b = dense("output", NUM_TAGS, cfg.hidden_states)
        self.transitions = add(Parameter("crf.transitions", np.zeros((NUM_TAGS, NUM_TAGS))))
        self.crf_start = self.crf_stop = None
        if cfg.crf_start_stop:
            self.crf_start = add(Parameter("crf.start", np.zeros(NUM_TAGS)))
            self.crf_stop = add(Parameter("crf.stop", np.zeros(NUM_TAGS)))
        self._char_cache: dict[str, list[int]] = {}

    @classmethod
    def from_table(cls, config: ModelConfig, table: EmbeddingTable, rng: Rng | None = None) -> "DeepVar":
        if table.dimension != config.word_dim:
            raise ConfigError(f"model.word_dim {config.word_dim} does not match embedding dimension {table.dimension}")
        matrix = np.vstack([table.vectors, table.unk_vector[None, :]])
        return cls(config, table.words, matrix, rng)

    # -- parameters

    def parameters(self) -> list[Parameter]:
        return list(self.params.values())

    def trainable_parameters(self) -> list[Parameter]:
        return [p for p in self.params.values() if p.trainable]

    def zero_grad(self):
        for p in self.trainable_parameters():
            p.zero_grad()

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.params.items()}

    def load_state_dict(self, state: dict[str, np.ndarray]):
        missing = sorted(set(self.params) - set(state))
        extra = sorted(set(state) - set(self.params))
        if missing or extra:
            raise ValueError(f"state mismatch: missing {missing}, unexpected {extra}")
        for name, arr in state.items():
            p = self.params[name]
            if arr.shape != p.shape:
                raise ValueError(f"parameter {name}: shape {arr.shape} != {p.shape}")
            p.data = np.array(arr, dtype=np.float64)

    # -- inputs

    def word_id(self, word: str) -> int:
        i = resolve_index(self.word_index, word)
        return len(self.vocab) if i is None else i

    def _chars(self, word: str) -> list[int]:
        idx = self._char_cache.get(word)
        if idx is None:
            idx = char_indices(word, self.alphabet, self.config.max_char_length)
            self._char_cache[word] = idx
        return idx

    def _char_inputs(self, words: list[str]):
        L = self.config.max_char_length
        onehot = np.zeros((len(words), L, self.alphabet.size))
        lengths = np.zeros(len(words), dtype=np.int64)
        for m, w in enumerate(words):
            idx = self._chars(w)
            onehot[m, np.arange(len(idx)), idx] = 1.0
            lengths[m] = len(idx)
        return onehot, lengths

    # -- forward

    def char_representation(self, words: list[str], training=False, rng=None) -> Tensor:
        cfg = self.config
        onehot, lengths = self._char_inputs(words)
        x = Tensor(onehot)
        if self.char_embedding is not None:
            M, L, A = onehot.shape
            x = nx.reshape(nx.reshape(x, (M * L, A)) @ self.char_embedding, (M, L, cfg.char_emb_size))
        x = nx.dropout(x, cfg.char_emb_dropout, training, rng)
        if cfg.char_encoder == "cnn":
            rep = char_cnn_batch(x, lengths, self.char_cnn)
        else:
            rep = char_bilstm_batch(x, lengths, self.char_fwd, self.char_bwd, cfg.candidate_activation)
        return nx.dropout(rep, cfg.char_dropout, training, rng)

    def forward_batch(self, sentences: Sequence[Sequence[str]], training: bool = False, rng=None):
        """Emission scores (B, N, K) and the (B, N) mask for a list of word sequences."""
        cfg = self.config
        if training and rng is None:
            rng = Rng(0).child("dropout")
        lengths = [len(s) for s in sentences]
        if not sentences or min(lengths) < 1:
            raise ValueError("forward_batch: sentences must be non-empty")
        if max(lengths) > cfg.max_word_length:
            raise ValueError(f"sentence of {max(lengths)} tokens exceeds max_word_length {cfg.max_word_length}")
        B, N = len(sentences), max(lengths)
        mask = _lengths_mask(lengths, N)
        unk = len(self.vocab)
        word_ids = np.full((B, N), unk, dtype=np.int64)
        flat_words, index_map = [], np.zeros(B * N, dtype=np.int64)
        for b, sent in enumerate(sentences):
            for t, w in enumerate(sent):
                word_ids[b, t] = self.word_id(w)
                flat_words.append(w)
                index_map[b * N + t] = len(flat_words)

        words = self.word_embedding[word_ids]  # (B, N, d)
        chars = self.char_representation(flat_words, training, rng)  # (M, Fc)
        chars = nx.concat([Tensor(np.zeros((1, cfg.char_dim))), chars], axis=0)[index_map]
        chars = nx.reshape(chars, (B, N, cfg.char_dim))
        x = nx.concat([words, chars], axis=-1)
        x = nx.reshape(nx.reshape(x, (B * N, x.shape[-1])) @ self.input_W.T + self.input_b, (B, N, cfg.unit_dim))
        for unit in self.units:
            x = residual_unit(unit, x, mask, training, rng, cfg.word_lstm_dropout, cfg.candidate_activation)
        h = nx.reshape(x, (B * N, cfg.unit_dim)) @ self.hidden_W.T + self.hidden_b
        if cfg.dense_activation == "tanh":
            h = nx.tanh(h)
        h = nx.dropout(h, cfg.hidden_dropout, training, rng)
        em = h @ self.output_W.T + self.output_b
        return nx.reshape(em, (B, N, NUM_TAGS)), mask

    def forward_sentence(self, tokens: Sequence, training: bool = False, rng=None) -> Tensor:
        words = [getattr(t, "text", t) for t in tokens]
        em, _ = self.forward_batch([words], training, rng)
        return nx.reshape(em, (len(words), NUM_TAGS))

    def batch_loss(self, sentences: Sequence[Sequence[str]], tags: np.ndarray, training: bool = False, rng=None):
        """Mean CRF negative log-likelihood over the batch, plus the per-sentence values."""
        em, mask = self.forward_batch(sentences, training, rng)
        per = batch_nll(self.transitions, em, tags, mask, self.crf_start, self.crf_stop)
        return nx.mean(per), per

    def sentence_loss(self, words: Sequence[str], tags: Sequence[int]) -> Tensor:
        from .crf import nll_loss

        em = self.forward_sentence(words)
        return nll_loss(self.transitions, em, tags, self.crf_start, self.crf_stop)

    def predict(self, sentences: Sequence[Sequence[str]], batch_size: int = 64) -> list[list[int]]:
        """Viterbi tags; sentences longer than ``max_word_length`` are decoded in pieces."""
        limit = self.config.max_word_length
        pieces, owners = [], []
        for i, s in enumerate(sentences):
            s = list(s)
            for k in range(0, len(s), limit):
                pieces.append(s[k:k + limit])
                owners.append(i)
        out: list[list[int]] = [[] for _ in sentences]
        for k in range(0, len(pieces), batch_size):
            chunk = pieces[k:k + batch_size]
            em, _ = self.forward_batch(chunk, training=False)
            for j, s in enumerate(chunk):
                out[owners[k + j]].extend(viterbi(self.transitions, em.data[j, :len(s)], self.crf_start, self.crf_stop))
        return out
