"""Linear-chain CRF over emission scores ``U`` (N x K) and transitions ``T`` (K x K).

A path ``z`` scores ``sum_t T[z_t, z_t+1] + sum_t U[t, z_t]``; there are no
start/stop terms unless ``start``/``stop`` vectors are passed explicitly.
The loss is ``log_partition - path_score(gold)``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import numerics as nx
from .numerics import Tensor


def _check_path(U: Tensor, z) -> np.ndarray:
    z = np.asarray(z, dtype=np.int64)
    n, k = U.shape
    if z.shape != (n,):
        raise ValueError(f"path length {z.shape[0] if z.ndim else 0} does not match {n} positions")
    if np.any(z < 0) or np.any(z >= k):
        raise ValueError(f"tag index out of range [0, {k}) in path {z.tolist()}")
    return z


def path_score(transitions, emissions, z, start=None, stop=None) -> Tensor:
    T, U = nx.as_tensor(transitions), nx.as_tensor(emissions)
    z = _check_path(U, z)
    score = nx.sum(U[np.arange(len(z)), z])
    if len(z) > 1:
        score = score + nx.sum(T[z[:-1], z[1:]])
    if start is not None:
        score = score + nx.as_tensor(start)[int(z[0])]
    if stop is not None:
        score = score + nx.as_tensor(stop)[int(z[-1])]
    return score


def log_partition(transitions, emissions, start=None, stop=None) -> Tensor:
    """Forward algorithm in log space."""
    T, U = nx.as_tensor(transitions), nx.as_tensor(emissions)
    n, k = U.shape
    if n < 1:
        raise ValueError("log_partition: empty sequence")
    alpha = U[0]
    if start is not None:
        alpha = alpha + start
    for t in range(1, n):
        alpha = nx.log_sum_exp(nx.reshape(alpha, (k, 1)) + T, axis=0) + U[t]
    if stop is not None:
        alpha = alpha + stop
    return nx.log_sum_exp(alpha, axis=0)


def nll_loss(transitions, emissions, z_gold, start=None, stop=None) -> Tensor:
    return log_partition(transitions, emissions, start, stop) - path_score(transitions, emissions, z_gold, start, stop)


def viterbi(transitions, emissions, start=None, stop=None) -> list[int]:
    """Best path; ties go to the lowest tag index at every backtrack step."""
    T = np.asarray(getattr(transitions, "data", transitions), dtype=np.float64)
    U = np.asarray(getattr(emissions, "data", emissions), dtype=np.float64)
    n, k = U.shape
    if n < 1:
        raise ValueError("viterbi: empty sequence")
    delta = U[0].copy()
    if start is not None:
        delta += np.asarray(getattr(start, "data", start))
    back = np.zeros((n, k), dtype=np.int64)
    for t in range(1, n):
        cand = delta[:, None] + T
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], np.arange(k)] + U[t]
    if stop is not None:
        delta = delta + np.asarray(getattr(stop, "data", stop))
    path = [int(np.argmax(delta))]
    for t in range(n - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    return path[::-1]


# -- padded batches -------------------------------------------------------------


def batch_nll(transitions, emissions: Tensor, tags: np.ndarray, mask: np.ndarray, start=None, stop=None) -> Tensor:
    """Per-sentence NLL for a padded batch.

    ``emissions`` is (B, N, K); ``tags``/``mask`` are (B, N) with padding at the
    end of each row. Padded positions leave the recursion untouched and add
    nothing to the gold score.
    """
    T = nx.as_tensor(transitions)
    U = nx.as_tensor(emissions)
    b, n, k = U.shape
    mask = np.asarray(mask, dtype=bool)
    tags = np.asarray(tags, dtype=np.int64)
    lengths = mask.sum(axis=1)
    if np.any(lengths < 1) or np.any(mask[:, 0] == 0):
        raise ValueError("batch_nll: every sentence needs at least one unpadded first position")
    rows = np.arange(b)

    # log partition
    alpha = U[:, 0, :]
    if start is not None:
        alpha = alpha + start
    for t in range(1, n):
        nxt = nx.log_sum_exp(nx.reshape(alpha, (b, k, 1)) + T, axis=1) + U[:, t, :]
        alpha = nx.select(mask[:, t:t + 1], nxt, alpha)
    if stop is not None:
        alpha = alpha + stop
    log_z = nx.log_sum_exp(alpha, axis=1)

    # gold path score
    maskf = mask.astype(np.float64)
    gold = nx.sum(U[rows[:, None], np.arange(n)[None, :], tags] * maskf, axis=1)
    if n > 1:
        trans = T[tags[:, :-1], tags[:, 1:]]
        gold = gold + nx.sum(trans * maskf[:, 1:], axis=1)
    if start is not None:
        gold = gold + nx.as_tensor(start)[tags[:, 0]]
    if stop is not None:
        gold = gold + nx.as_tensor(stop)[tags[rows, lengths - 1]]
    return log_z - gold


def batch_viterbi(transitions, emissions, lengths: Sequence[int], start=None, stop=None) -> list[list[int]]:
    U = np.asarray(getattr(emissions, "data", emissions))
    return [viterbi(transitions, U[i, :n], start, stop) for i, n in enumerate(lengths)]
