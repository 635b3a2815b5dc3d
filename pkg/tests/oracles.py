"""Independent reference computations the implementation is checked against.

Everything here is written with plain Python loops and floats, sharing no
code with the package beyond tag constants.
"""

import itertools
import math


def brute_path_score(T, U, z, start=None, stop=None):
    s = 0.0
    for t, tag in enumerate(z):
        s += float(U[t][tag])
    for t in range(len(z) - 1):
        s += float(T[z[t]][z[t + 1]])
    if start is not None:
        s += float(start[z[0]])
    if stop is not None:
        s += float(stop[z[-1]])
    return s


def all_paths(n, k):
    return itertools.product(range(k), repeat=n)


def brute_log_partition(T, U, start=None, stop=None):
    n, k = len(U), len(U[0])
    scores = [brute_path_score(T, U, z, start, stop) for z in all_paths(n, k)]
    m = max(scores)
    return m + math.log(math.fsum(math.exp(s - m) for s in scores))


def brute_viterbi(T, U, start=None, stop=None):
    """Best path; among exact ties, the one a lowest-index backtrack returns.

    Backtracking fixes the last tag first, then each predecessor, always taking
    the smallest index, so ties resolve by the reversed path in lexicographic order.
    """
    n, k = len(U), len(U[0])
    best = None
    for z in all_paths(n, k):
        key = (-brute_path_score(T, U, z, start, stop), tuple(reversed(z)))
        if best is None or key < best[0]:
            best = (key, list(z))
    return best[1]


def reference_spans(tag_names):
    """(type, start, end) spans from BIO tag names, an orphan I- opening a new span."""
    spans, cur = [], None
    for i, tag in enumerate(list(tag_names) + ["O"]):
        prefix, _, etype = tag.partition("-")
        continues = prefix == "I" and cur is not None and cur[0] == etype
        if cur is not None and not continues:
            spans.append((cur[0], cur[1], i))
            cur = None
        if prefix == "B" or (prefix == "I" and not continues):
            cur = (etype, i)
    return spans


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def reference_lstm_step(W, U, b, x, h, c):
    """One LSTM step with per-gate dicts of nested lists; gates i, f, o sigmoid, candidate tanh."""
    H = len(h)

    def pre(g, j):
        return (sum(W[g][j][d] * x[d] for d in range(len(x)))
                + sum(U[g][j][d] * h[d] for d in range(H)) + b[g][j])

    c_new, h_new = [], []
    for j in range(H):
        i = sigmoid(pre("i", j))
        f = sigmoid(pre("f", j))
        o = sigmoid(pre("o", j))
        cand = math.tanh(pre("c", j))
        cj = f * c[j] + i * cand
        c_new.append(cj)
        h_new.append(o * math.tanh(cj))
    return h_new, c_new


def brute_force_crf(T, U):
    """(log partition, best path under the backtrack tie rule) from one enumeration."""
    n, k = len(U), len(U[0])
    T = [list(map(float, row)) for row in T]
    U = [list(map(float, row)) for row in U]
    scores, best = [], None
    for z in all_paths(n, k):
        s = U[0][z[0]]
        for t in range(1, n):
            s += T[z[t - 1]][z[t]] + U[t][z[t]]
        scores.append(s)
        key = (-s, z[::-1])
        if best is None or key < best[0]:
            best = (key, list(z))
    m = max(scores)
    return m + math.log(math.fsum(math.exp(s - m) for s in scores)), best[1]
