import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deepvar import crf
from deepvar import numerics as nx
from deepvar.gradcheck import check_gradients
from deepvar.numerics import Parameter
from oracles import all_paths, brute_log_partition, brute_path_score, brute_viterbi

K = 6


def instance(seed, n, k=K, integer=False):
    g = np.random.default_rng(seed)
    if integer:
        return g.integers(-1, 2, size=(k, k)).astype(float), g.integers(-1, 2, size=(n, k)).astype(float)
    return g.normal(size=(k, k)), g.normal(size=(n, k))


instances = st.tuples(st.integers(0, 2**31), st.integers(1, 4))


def test_path_score_single_position():
    T, U = instance(0, 1)
    assert crf.path_score(T, U, [3]).item() == U[0, 3]


def test_path_score_zero_transitions():
    _, U = instance(1, 4)
    z = [0, 5, 2, 2]
    assert crf.path_score(np.zeros((K, K)), U, z).item() == pytest.approx(sum(U[t, z[t]] for t in range(4)))


def test_path_score_length_mismatch():
    T, U = instance(2, 3)
    with pytest.raises(ValueError, match="length"):
        crf.path_score(T, U, [0, 1])
    with pytest.raises(ValueError, match="range"):
        crf.nll_loss(T, U, [0, 1, 6])


@given(instances)
def test_path_score_matches_resummation(inst):
    T, U = instance(inst[0], inst[1])
    z = list(np.random.default_rng(inst[0] + 1).integers(0, K, size=inst[1]))
    assert crf.path_score(T, U, z).item() == pytest.approx(brute_path_score(T, U, z), abs=1e-12)


@given(instances)
def test_log_partition_matches_enumeration(inst):
    T, U = instance(*inst)
    assert abs(crf.log_partition(T, U).item() - brute_log_partition(T, U)) <= 1e-8


def test_log_partition_n5_k6():
    T, U = instance(5, 5)
    assert abs(crf.log_partition(T, U).item() - brute_log_partition(T, U)) <= 1e-8


def test_log_partition_single_row():
    T, U = instance(3, 1)
    assert crf.log_partition(T, U).item() == pytest.approx(math.log(np.exp(U[0]).sum()))


@given(instances, st.lists(st.floats(-50, 50), min_size=4, max_size=4))
def test_row_shift_adds_to_partition(inst, shifts):
    T, U = instance(*inst)
    c = np.array(shifts[:len(U)])
    shifted = crf.log_partition(T, U + c[:, None]).item()
    assert shifted == pytest.approx(crf.log_partition(T, U).item() + c.sum(), abs=1e-9)


@given(instances)
def test_probabilities_normalize(inst):
    T, U = instance(*inst)
    log_z = crf.log_partition(T, U).item()
    total = math.fsum(math.exp(brute_path_score(T, U, z) - log_z) for z in all_paths(len(U), K))
    assert abs(total - 1.0) <= 1e-8


@given(instances)
def test_nll_is_negative_log_probability(inst):
    T, U = instance(*inst)
    z = [int(v) for v in np.random.default_rng(inst[0]).integers(0, K, size=len(U))]
    loss = crf.nll_loss(T, U, z).item()
    assert loss >= 0
    assert loss == pytest.approx(brute_log_partition(T, U) - brute_path_score(T, U, z), abs=1e-9)


def test_nll_uniform_two_positions():
    assert crf.nll_loss(np.zeros((K, K)), np.zeros((2, K)), [0, 1]).item() == pytest.approx(2 * math.log(6))


def test_nll_confident_gold():
    U = np.zeros((3, K))
    z = [1, 2, 5]
    U[np.arange(3), z] = 100.0
    assert crf.nll_loss(np.zeros((K, K)), U, z).item() < 1e-6


def test_nll_gradients():
    T = Parameter("T", np.random.default_rng(4).normal(size=(K, K)))
    U = Parameter("U", np.random.default_rng(5).normal(size=(4, K)))
    errors = check_gradients(lambda: crf.nll_loss(T, U, [0, 3, 4, 5]), [T, U])
    assert max(errors.values()) <= 1e-4


def test_start_stop_gradients_and_oracle():
    g = np.random.default_rng(6)
    T, U, s, e = (Parameter(n, g.normal(size=sh)) for n, sh in (("T", (K, K)), ("U", (3, K)), ("s", (K,)), ("e", (K,))))
    lz = crf.log_partition(T, U, s, e).item()
    assert abs(lz - brute_log_partition(T.data, U.data, s.data, e.data)) <= 1e-8
    assert crf.viterbi(T, U, s, e) == brute_viterbi(T.data, U.data, s.data, e.data)
    errors = check_gradients(lambda: crf.nll_loss(T, U, [1, 1, 0], s, e), [T, U, s, e])
    assert max(errors.values()) <= 1e-4


@given(instances)
def test_viterbi_matches_enumeration(inst):
    T, U = instance(*inst)
    assert crf.viterbi(T, U) == brute_viterbi(T, U)


@given(instances)
def test_viterbi_tie_rule_on_integer_scores(inst):
    T, U = instance(inst[0], inst[1], integer=True)
    assert crf.viterbi(T, U) == brute_viterbi(T, U)


def test_viterbi_all_zero_returns_lowest_indices():
    assert crf.viterbi(np.zeros((K, K)), np.zeros((4, K))) == [0, 0, 0, 0]


def test_viterbi_zero_transitions_is_rowwise_argmax():
    _, U = instance(8, 5)
    assert crf.viterbi(np.zeros((K, K)), U) == list(np.argmax(U, axis=1))


@given(st.integers(0, 2**31))
def test_viterbi_dominates_sampled_paths(seed):
    T, U = instance(seed, 6)
    best = brute_path_score(T, U, crf.viterbi(T, U))
    for z in np.random.default_rng(seed).integers(0, K, size=(1000, 6)):
        assert best >= brute_path_score(T, U, z) - 1e-12


def test_batch_nll_equals_per_sentence_losses():
    g = np.random.default_rng(9)
    T = g.normal(size=(K, K))
    lengths = [4, 1, 3]
    E = g.normal(size=(3, 4, K))
    tags = g.integers(0, K, size=(3, 4))
    mask = np.arange(4)[None, :] < np.array(lengths)[:, None]
    per = crf.batch_nll(T, E, tags, mask).data
    for b, n in enumerate(lengths):
        assert per[b] == pytest.approx(crf.nll_loss(T, E[b, :n], tags[b, :n]).item(), abs=1e-12)
    assert crf.batch_viterbi(T, E, lengths) == [crf.viterbi(T, E[b, :n]) for b, n in enumerate(lengths)]


def test_batch_nll_gradients_ignore_padding():
    g = np.random.default_rng(10)
    T = Parameter("T", g.normal(size=(K, K)))
    E = Parameter("E", g.normal(size=(2, 3, K)))
    tags = np.array([[1, 2, 0], [3, 0, 0]])
    mask = np.array([[1, 1, 1], [1, 0, 0]], bool)
    errors = check_gradients(lambda: nx.sum(crf.batch_nll(T, E, tags, mask)), [T, E])
    assert max(errors.values()) <= 1e-4
    assert not E.grad[1, 1:].any()
