"""Receiver side information and the subcode it carves out of the codebook.

A receiver knowing ``(S (x) I_ell) w = u`` can restrict decoding to the
messages ``v + A_S w~``; the corresponding lattice points form the subcode
generated by ``G A_S``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationTooLarge
from .fields import (
    FpMatrix,
    PrimeField,
    kron_with_identity,
    matmul_mod,
    null_space_basis,
    particular_solution,
    rank,
    rref,
)


class FullRankSideInfo(ValueError):
    """The receiver already knows every message."""


class InconsistentSideInfo(ValueError):
    pass


class DegenerateSubcode(ValueError):
    """``G A_S`` is rank deficient, so the subcode cannot be decoded uniquely."""


@dataclass(frozen=True)
class SideInfoMatrix:
    """Canonical side-information matrix: the nonzero rows of an RREF, M x K with M < K."""

    S: FpMatrix

    @property
    def M(self) -> int:
        return self.S.rows

    @property
    def K(self) -> int:
        return self.S.cols

    @property
    def field(self) -> PrimeField:
        return self.S.field

    def to_list(self) -> list[list[int]]:
        return self.S.to_list()


def canonicalize(raw: FpMatrix, K: int | None = None) -> SideInfoMatrix:
    """Reduce raw equations to independent RREF rows spanning the same row space."""
    if K is not None and raw.cols != K:
        raise ValueError(f"side information must have {K} columns, got {raw.cols}")
    r, pivots = rref(raw)
    if len(pivots) == raw.cols:
        raise FullRankSideInfo(f"rank {len(pivots)} side information determines all {raw.cols} messages")
    rows = r.entries[: len(pivots)]
    return SideInfoMatrix(FpMatrix(raw.field, rows.reshape(len(pivots), raw.cols)))


def empty_side_info(field: PrimeField, K: int) -> SideInfoMatrix:
    return SideInfoMatrix(FpMatrix(field, np.zeros((0, K), dtype=np.int64)))


@dataclass(frozen=True)
class ExpurgationData:
    A_S: FpMatrix
    v: FpMatrix
    subgen: FpMatrix
    full_rank: bool = True


@dataclass(frozen=True)
class SubcodeStructure:
    """The u-independent part of expurgation for one receiver and one G.

    ``solver`` maps u to the deterministic particular solution v = solver u.
    """

    S: SideInfoMatrix
    ell: int
    SI: FpMatrix
    A_S: FpMatrix
    solver: FpMatrix
    subgen: FpMatrix
    full_rank: bool

    def side_values(self, w) -> FpMatrix:
        """u = (S (x) I_ell) w for a true message w."""
        return self.SI @ _as_column(self.SI.field, w)

    def coset_leader(self, u: FpMatrix) -> FpMatrix:
        if u.shape != (self.SI.rows, 1):
            raise ValueError(f"u must be {self.SI.rows}x1, got {u.shape}")
        return self.solver @ u

    def expurgate(self, u: FpMatrix) -> ExpurgationData:
        v = self.coset_leader(u)
        if not (self.SI @ v) == u:
            raise InconsistentSideInfo("u is not in the column space of S (x) I_ell")
        return ExpurgationData(self.A_S, v, self.subgen, self.full_rank)


def _as_column(field: PrimeField, w) -> FpMatrix:
    if isinstance(w, FpMatrix):
        return w if w.cols == 1 else FpMatrix(field, w.flat().reshape(-1, 1))
    return FpMatrix(field, np.asarray(w, dtype=np.int64).reshape(-1, 1))


def subcode_structure(S: SideInfoMatrix, G: FpMatrix, ell: int) -> SubcodeStructure:
    """Precompute A_S, G A_S and a linear map u -> v for a canonical S."""
    SI = kron_with_identity(S.S, ell)
    if rank(S.S) != S.M:
        raise ValueError("side information rows must be linearly independent; canonicalize first")
    A_S = null_space_basis(SI)
    # particular_solution is linear in u (fixed row operations, zero free variables),
    # so its action is captured by solving for each unit vector once.
    cols = []
    for j in range(SI.rows):
        e = np.zeros((SI.rows, 1), dtype=np.int64)
        e[j, 0] = 1
        cols.append(particular_solution(SI, FpMatrix(SI.field, e)).entries)
    solver_entries = np.hstack(cols) if cols else np.zeros((SI.cols, 0), dtype=np.int64)
    solver = FpMatrix(SI.field, solver_entries)
    subgen = G @ A_S
    full = rank(subgen) == A_S.cols
    return SubcodeStructure(S, ell, SI, A_S, solver, subgen, full)


def expurgate(S: SideInfoMatrix, u: FpMatrix, G: FpMatrix, ell: int, strict: bool = True) -> ExpurgationData:
    """A_S, the coset leader v and the subcode generator G A_S.

    Raises:
        InconsistentSideInfo: if no message satisfies the side information.
        DegenerateSubcode: if ``strict`` and G A_S is rank deficient.
    """
    SI = kron_with_identity(S.S, ell)
    if G.rows < 1 or G.cols != SI.cols:
        raise ValueError(f"G must have {SI.cols} columns, got {G.shape}")
    A_S = null_space_basis(SI)
    try:
        v = particular_solution(SI, u)
    except Exception as exc:
        raise InconsistentSideInfo(str(exc)) from exc
    subgen = G @ A_S
    full = rank(subgen) == A_S.cols
    if strict and not full:
        raise DegenerateSubcode(f"rank(G A_S) < {A_S.cols}")
    return ExpurgationData(A_S, v, subgen, full)


def recover_message(v: FpMatrix, A_S: FpMatrix, w_tilde) -> FpMatrix:
    """w = v + A_S w~ over F_p."""
    wt = _as_column(v.field, w_tilde)
    return v + A_S @ wt


def recover_messages(v: FpMatrix, A_S: FpMatrix, w_tildes: np.ndarray) -> np.ndarray:
    """Vectorized :func:`recover_message` over rows of ``w_tildes``."""
    p = v.p
    return (v.flat()[None, :] + matmul_mod(np.asarray(w_tildes, dtype=np.int64), A_S.entries.T, p)) % p


def gaussian_binomial(K: int, M: int, p: int) -> int:
    """Number of M-dimensional subspaces of F_p^K."""
    num = den = 1
    for i in range(M):
        num *= p ** (K - i) - 1
        den *= p ** (i + 1) - 1
    return num // den


def subspace_count(p: int, K: int) -> int:
    """Subspaces of F_p^K of dimension 0 .. K-1."""
    return sum(gaussian_binomial(K, M, p) for M in range(K))


def enumerate_subspaces(p: int, K: int, cap: int = 10_000) -> list[SideInfoMatrix]:
    """One canonical (RREF) matrix per proper subspace of F_p^K, by dimension then lexicographically."""
    field = PrimeField(p)
    total = subspace_count(p, K)
    if total > cap:
        raise EnumerationTooLarge(f"{total} subspaces of F_{p}^{K} exceeds the cap of {cap}")
    out: list[SideInfoMatrix] = []
    seen: set[bytes] = set()
    for M in range(K):
        for pivots in itertools.combinations(range(K), M):
            # Free slots: row i, non-pivot columns to the right of pivot i.
            slots = [(i, c) for i, pc in enumerate(pivots) for c in range(pc + 1, K) if c not in pivots]
            for values in itertools.product(range(p), repeat=len(slots)):
                m = np.zeros((M, K), dtype=np.int64)
                for i, pc in enumerate(pivots):
                    m[i, pc] = 1
                for (i, c), val in zip(slots, values):
                    m[i, c] = val
                s = canonicalize(FpMatrix(field, m.reshape(M, K)))
                key = s.S.entries.tobytes() + bytes([M])
                if key in seen:
                    raise AssertionError("duplicate row space generated")
                seen.add(key)
                out.append(s)
    if len(out) != total:
        raise AssertionError(f"generated {len(out)} subspaces, expected {total}")
    return out


def same_row_space(a: FpMatrix, b: FpMatrix) -> bool:
    ra, rb = rank(a), rank(b)
    if ra != rb:
        return False
    if a.rows == 0 or b.rows == 0:
        return ra == rb == 0
    return rank(a.vstack(b)) == ra
