"""Exact linear algebra over prime fields F_p.

Matrices are small dense numpy int64 arrays holding canonical residues in
[0, p).  Everything reduces eagerly, so every stored entry is checkable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_PRIME = 2**31


class InconsistentSystem(ValueError):
    """A linear system over F_p has no solution."""


def is_prime(n: int) -> bool:
    """Deterministic primality test for n < 2**31 (trial division)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0 or n % 3 == 0:
        return False
    i = 5
    while i * i <= n:
        if n % i == 0 or n % (i + 2) == 0:
            return False
        i += 6
    return True


def next_prime(x: float) -> int:
    """Smallest prime p with p >= x."""
    p = max(2, int(np.ceil(x)))
    while not is_prime(p):
        p += 1
    return p


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)):
            raise TypeError(f"field modulus must be an integer, got {self.p!r}")
        if not 2 <= self.p < MAX_PRIME:
            raise ValueError(f"modulus {self.p} outside [2, 2**31)")
        if not is_prime(int(self.p)):
            raise ValueError(f"{self.p} is not prime")
        object.__setattr__(self, "p", int(self.p))

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in F_p")
        return pow(a, -1, self.p)

    def matrix(self, entries) -> FpMatrix:
        return FpMatrix(self, entries)

    def zeros(self, rows: int, cols: int) -> FpMatrix:
        return FpMatrix(self, np.zeros((rows, cols), dtype=np.int64))

    def identity(self, size: int) -> FpMatrix:
        return FpMatrix(self, np.eye(size, dtype=np.int64))

    def column(self, values) -> FpMatrix:
        return FpMatrix(self, np.asarray(values, dtype=np.int64).reshape(-1, 1))


@dataclass(frozen=True, eq=False)
class FpMatrix:
    """Immutable dense matrix over a prime field.

    ``entries`` may be any 2-D integer array-like; it is reduced into
    [0, p) and frozen.  A 1-D input is treated as a single row.
    """

    field: PrimeField
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=object if _needs_object(self.entries) else np.int64)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        if a.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {a.shape}")
        a = np.mod(a, self.field.p).astype(np.int64)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def T(self) -> FpMatrix:
        return FpMatrix(self.field, self.entries.T)

    def __eq__(self, other):
        if not isinstance(other, FpMatrix):
            return NotImplemented
        return (
            self.field == other.field
            and self.shape == other.shape
            and bool(np.array_equal(self.entries, other.entries))
        )

    def __hash__(self):
        return hash((self.p, self.shape, self.entries.tobytes()))

    def __repr__(self):
        return f"FpMatrix(p={self.p}, {self.entries.tolist()})"

    def __add__(self, other: FpMatrix) -> FpMatrix:
        _check_same_field(self, other)
        return FpMatrix(self.field, self.entries + other.entries)

    def __sub__(self, other: FpMatrix) -> FpMatrix:
        _check_same_field(self, other)
        return FpMatrix(self.field, self.entries - other.entries)

    def __neg__(self) -> FpMatrix:
        return FpMatrix(self.field, -self.entries)

    def __matmul__(self, other: FpMatrix) -> FpMatrix:
        _check_same_field(self, other)
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        return FpMatrix(self.field, matmul_mod(self.entries, other.entries, self.p))

    def scale(self, c: int) -> FpMatrix:
        return FpMatrix(self.field, (self.entries * (c % self.p)) % self.p)

    def is_zero(self) -> bool:
        return not self.entries.any()

    def hstack(self, other: FpMatrix) -> FpMatrix:
        _check_same_field(self, other)
        return FpMatrix(self.field, np.hstack([self.entries, other.entries]))

    def vstack(self, other: FpMatrix) -> FpMatrix:
        _check_same_field(self, other)
        return FpMatrix(self.field, np.vstack([self.entries, other.entries]))

    def to_list(self) -> list[list[int]]:
        return self.entries.tolist()

    def flat(self) -> np.ndarray:
        return self.entries.reshape(-1)


def _needs_object(entries) -> bool:
    # Python ints beyond int64 would overflow on conversion.
    try:
        np.asarray(entries, dtype=np.int64)
    except OverflowError:
        return True
    return False


def _check_same_field(a: FpMatrix, b: FpMatrix) -> None:
    if a.field != b.field:
        raise ValueError(f"field mismatch: F_{a.p} vs F_{b.p}")


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """(a @ b) mod p for residue arrays without int64 overflow."""
    inner = a.shape[-1]
    if inner == 0:
        return np.zeros(a.shape[:-1] + b.shape[-1:], dtype=np.int64)
    if (p - 1) ** 2 * inner < 2**63:
        return (a @ b) % p
    # Large moduli: exact Python integers.
    prod = a.astype(object) @ b.astype(object)
    return np.mod(prod, p).astype(np.int64)


def rref(m: FpMatrix) -> tuple[FpMatrix, list[int]]:
    """Reduced row-echelon form over F_p and the list of pivot columns."""
    p = m.p
    r = m.entries.astype(object if p * p >= 2**62 else np.int64).copy()
    rows, cols = r.shape
    pivots: list[int] = []
    prow = 0
    for col in range(cols):
        if prow == rows:
            break
        nz = np.nonzero(r[prow:, col])[0]
        if nz.size == 0:
            continue
        found = prow + int(nz[0])
        if found != prow:
            r[[prow, found]] = r[[found, prow]]
        r[prow] = (r[prow] * pow(int(r[prow, col]), -1, p)) % p
        for i in range(rows):
            if i != prow and r[i, col] != 0:
                r[i] = (r[i] - r[i, col] * r[prow]) % p
        pivots.append(col)
        prow += 1
    return FpMatrix(m.field, r), pivots


def rank(m: FpMatrix) -> int:
    return len(rref(m)[1])


def null_space_basis(m: FpMatrix) -> FpMatrix:
    """Columns form a basis of {x : m x = 0}; one column per free variable."""
    r, pivots = rref(m)
    cols = m.cols
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((cols, len(free)), dtype=np.int64)
    for j, f in enumerate(free):
        basis[f, j] = 1
        for i, pc in enumerate(pivots):
            basis[pc, j] = -r.entries[i, f]
    return FpMatrix(m.field, basis)


def particular_solution(m: FpMatrix, u: FpMatrix) -> FpMatrix:
    """One solution v of m v = u, with all free variables set to zero.

    Raises:
        InconsistentSystem: if the system has no solution.
    """
    if u.rows != m.rows or u.cols != 1:
        raise ValueError(f"right-hand side must be {m.rows}x1, got {u.shape}")
    r, pivots = rref(m.hstack(u))
    if pivots and pivots[-1] == m.cols:
        raise InconsistentSystem("side information equations are contradictory")
    v = np.zeros((m.cols, 1), dtype=np.int64)
    for i, pc in enumerate(pivots):
        v[pc, 0] = r.entries[i, -1]
    return FpMatrix(m.field, v)


def kron_with_identity(s: FpMatrix, ell: int) -> FpMatrix:
    """S (x) I_ell, the block matrix whose (m, k) block is s[m, k] * I_ell."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    return FpMatrix(s.field, np.kron(s.entries, np.eye(ell, dtype=np.int64)))


def random_matrix(field: PrimeField, rows: int, cols: int, rng: np.random.Generator) -> FpMatrix:
    """I.i.d. uniform entries on [0, p)."""
    return FpMatrix(field, rng.integers(0, field.p, size=(rows, cols), dtype=np.int64))


def lex_vectors(p: int, length: int) -> np.ndarray:
    """All vectors of F_p^length as rows, in lexicographic order.

    Row index i is the base-p expansion of i, most significant digit first.
    """
    count = p**length
    idx = np.arange(count, dtype=np.int64)
    out = np.empty((count, length), dtype=np.int64)
    for j in range(length - 1, -1, -1):
        out[:, j] = idx % p
        idx //= p
    return out


def lex_index(vec, p: int) -> int:
    """Inverse of :func:`lex_vectors`."""
    i = 0
    for x in np.asarray(vec).reshape(-1):
        i = i * p + int(x)
    return i
