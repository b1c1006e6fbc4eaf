import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latticecast.errors import EnumerationTooLarge
from latticecast.fields import FpMatrix, PrimeField, kron_with_identity, lex_vectors, matmul_mod, random_matrix, rank
from latticecast.sideinfo import (
    DegenerateSubcode,
    FullRankSideInfo,
    InconsistentSideInfo,
    SideInfoMatrix,
    canonicalize,
    empty_side_info,
    enumerate_subspaces,
    expurgate,
    gaussian_binomial,
    recover_message,
    recover_messages,
    same_row_space,
    subcode_structure,
    subspace_count,
)

F3, F5 = PrimeField(3), PrimeField(5)


def _span(m: np.ndarray, p: int) -> frozenset:
    return frozenset(tuple(matmul_mod(np.array(c)[None, :], m, p)[0]) for c in itertools.product(range(p), repeat=m.shape[0]))


def _brute_subspaces(p: int, K: int) -> set:
    spaces = set()
    for M in range(K):
        for entries in itertools.product(range(p), repeat=M * K):
            m = np.array(entries, dtype=np.int64).reshape(M, K)
            if rank(FpMatrix(PrimeField(p), m)) == M:
                spaces.add(_span(m, p))
    return spaces


# --- canonicalize --------------------------------------------------------------


def test_canonicalize_example_drops_redundant_row():
    s = canonicalize(FpMatrix(F5, [[1, 4, 3], [4, 3, 0], [2, 1, 3]]))
    assert s.M == 2 and s.K == 3
    assert same_row_space(s.S, FpMatrix(F5, [[4, 3, 0], [2, 1, 3]]))


def test_canonicalize_single_row_and_empty():
    assert canonicalize(FpMatrix(F5, [[0, 1, 0]])).to_list() == [[0, 1, 0]]
    e = canonicalize(F5.zeros(0, 3))
    assert e.M == 0 and e.K == 3
    assert canonicalize(F5.zeros(2, 3)).M == 0


def test_canonicalize_rejects_full_rank_and_wrong_width():
    with pytest.raises(FullRankSideInfo):
        canonicalize(FpMatrix(F5, [[1, 2], [0, 1]]))
    with pytest.raises(ValueError):
        canonicalize(FpMatrix(F5, [[1, 2]]), K=3)


@st.composite
def side_info(draw, primes=(2, 3, 5), max_K=4):
    p = draw(st.sampled_from(primes))
    K = draw(st.integers(2, max_K))
    rows = draw(st.integers(0, K + 1))
    vals = draw(st.lists(st.integers(0, p - 1), min_size=rows * K, max_size=rows * K))
    return FpMatrix(PrimeField(p), np.array(vals, dtype=np.int64).reshape(rows, K))


@settings(max_examples=300, deadline=None)
@given(side_info())
def test_canonicalize_idempotent_and_row_space_preserving(raw):
    if rank(raw) == raw.cols:
        with pytest.raises(FullRankSideInfo):
            canonicalize(raw)
        return
    s = canonicalize(raw)
    assert s.M == rank(raw) == rank(s.S)
    assert canonicalize(s.S).S == s.S
    assert same_row_space(s.S, raw) or s.M == 0


# --- expurgation ---------------------------------------------------------------


def test_expurgate_without_side_information():
    G = random_matrix(F5, 6, 4, np.random.default_rng(0))
    exp = expurgate(empty_side_info(F5, 2), F5.zeros(0, 1), G, 2, strict=False)
    assert exp.A_S == F5.identity(4)
    assert exp.v.is_zero() and exp.v.shape == (4, 1)
    assert exp.subgen == G


def test_expurgate_coordinate_side_information():
    S = canonicalize(FpMatrix(F5, [[0, 1, 0]]))
    G = FpMatrix(F5, np.eye(5, 3, dtype=int))
    exp = expurgate(S, F5.column([2]), G, 1)
    assert exp.v.flat().tolist() == [0, 2, 0]
    assert (S.S @ exp.A_S).is_zero()
    assert exp.A_S.cols == 2 and rank(exp.A_S) == 2


def test_expurgate_inconsistent():
    S = SideInfoMatrix(FpMatrix(F3, [[1, 0, 0], [1, 0, 0]]))  # deliberately not canonical
    G = FpMatrix(F3, np.eye(4, 3, dtype=int))
    with pytest.raises(InconsistentSideInfo):
        expurgate(S, F3.column([1, 2]), G, 1)
    with pytest.raises(ValueError, match="independent"):
        subcode_structure(S, G, 1)


def test_expurgate_degenerate_subcode():
    S = canonicalize(FpMatrix(F5, [[1, 0]]))
    G = FpMatrix(F5, [[1, 0], [0, 0], [0, 0]])  # second message never reaches the channel
    with pytest.raises(DegenerateSubcode):
        expurgate(S, F5.column([1]), G, 1)
    exp = expurgate(S, F5.column([1]), G, 1, strict=False)
    assert not exp.full_rank
    assert not subcode_structure(S, G, 1).full_rank


def test_true_message_in_solution_coset():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        p = int(rng.choice([2, 3, 5]))
        F = PrimeField(p)
        K, ell = int(rng.integers(2, 4)), int(rng.integers(1, 3))
        raw = random_matrix(F, int(rng.integers(0, K)), K, rng)
        S = canonicalize(raw)
        w = random_matrix(F, K * ell, 1, rng)
        u = kron_with_identity(S.S, ell) @ w
        G = random_matrix(F, K * ell + 2, K * ell, rng)
        exp = expurgate(S, u, G, ell, strict=False)
        members = recover_messages(exp.v, exp.A_S, lex_vectors(p, exp.A_S.cols))
        assert any(np.array_equal(m, w.flat()) for m in members)


@pytest.mark.parametrize("p, K, ell, M", [(2, 3, 1, 1), (3, 2, 1, 1), (3, 3, 1, 2), (5, 2, 1, 0), (5, 3, 1, 2), (2, 2, 3, 1)])
def test_solution_coset_exhaustive(p, K, ell, M):
    F = PrimeField(p)
    rng = np.random.default_rng(p * K * ell)
    while True:
        raw = random_matrix(F, M, K, rng)
        if rank(raw) == M:
            break
    S = canonicalize(raw)
    SI = kron_with_identity(S.S, ell)
    u = SI @ random_matrix(F, K * ell, 1, rng)
    exp = expurgate(S, u, F.identity(K * ell).vstack(F.zeros(1, K * ell)), ell)
    members = recover_messages(exp.v, exp.A_S, lex_vectors(p, (K - M) * ell))
    assert len({tuple(m) for m in members}) == p ** ((K - M) * ell)
    # every member satisfies the equations, and nothing else does
    sat = {tuple(w) for w in lex_vectors(p, K * ell) if np.array_equal(matmul_mod(SI.entries, w[:, None], p), u.entries)}
    assert sat == {tuple(m) for m in members}


def test_structure_matches_direct_expurgation():
    rng = np.random.default_rng(2)
    for _ in range(200):
        F = PrimeField(int(rng.choice([2, 3, 5, 7])))
        K, ell = int(rng.integers(2, 4)), int(rng.integers(1, 3))
        S = canonicalize(random_matrix(F, int(rng.integers(0, K)), K, rng))
        G = random_matrix(F, K * ell + 1, K * ell, rng)
        st_ = subcode_structure(S, G, ell)
        w = random_matrix(F, K * ell, 1, rng)
        u = st_.side_values(w)
        a = st_.expurgate(u)
        b = expurgate(S, u, G, ell, strict=False)
        assert a.v == b.v and a.A_S == b.A_S and a.subgen == b.subgen and a.full_rank == b.full_rank


# --- message recovery ------------------------------------------------------------


def test_recover_message_trivial_cases():
    v = F5.column([1, 2, 3])
    A = FpMatrix(F5, [[1, 0], [0, 0], [0, 1]])
    assert recover_message(v, A, [0, 0]) == v
    assert recover_message(F5.zeros(2, 1), F5.identity(2), [3, 4]).flat().tolist() == [3, 4]


def test_recover_round_trip_exhaustive():
    S = canonicalize(FpMatrix(F3, [[1, 2]]))
    SI = kron_with_identity(S.S, 1)
    G = FpMatrix(F3, [[1, 0], [0, 1], [1, 1]])
    for w in lex_vectors(3, 2):
        u = SI @ F3.column(w)
        exp = expurgate(S, u, G, 1)
        diff = (F3.column(w) - exp.v).flat()
        hits = [wt for wt in lex_vectors(3, 1) if np.array_equal(matmul_mod(exp.A_S.entries, wt[:, None], 3)[:, 0], diff)]
        assert len(hits) == 1
        assert recover_message(exp.v, exp.A_S, hits[0]).flat().tolist() == w.tolist()


# --- subspaces -------------------------------------------------------------------


@pytest.mark.parametrize("p, K, expected", [(2, 2, 4), (3, 2, 5), (5, 1, 1), (2, 3, 15), (3, 3, 27)])
def test_subspace_counts(p, K, expected):
    subs = enumerate_subspaces(p, K)
    assert len(subs) == expected == subspace_count(p, K)
    assert {_span(s.S.entries, p) for s in subs} == _brute_subspaces(p, K)


def test_subspace_dimensions_and_distinctness():
    subs = enumerate_subspaces(2, 2)
    assert [s.M for s in subs] == [0, 1, 1, 1]
    for a, b in itertools.combinations(subs, 2):
        if a.M and b.M:
            assert not same_row_space(a.S, b.S)


def test_gaussian_binomial_values():
    assert gaussian_binomial(2, 1, 2) == 3
    assert gaussian_binomial(4, 2, 2) == 35
    assert gaussian_binomial(3, 0, 7) == 1
    assert gaussian_binomial(3, 1, 3) == 13


def test_subspace_cap():
    with pytest.raises(EnumerationTooLarge):
        enumerate_subspaces(3, 3, cap=10)
