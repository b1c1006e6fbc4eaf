"""Nested Construction-A lattice codes.

The fine lattice is ``B_c p^-1 g(C) + Lambda_c`` where ``C`` is the F_p-linear
code generated by ``G`` and ``g`` embeds {0, ..., p-1} into the integers.
Messages are length-K*ell vectors over F_p, messages concatenated.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EnumerationTooLarge
from .fields import FpMatrix, PrimeField, lex_vectors, next_prime, random_matrix, rank
from .lattices import LatticeSpec, geometry, mod_lattice

log = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 10**6


class RateTooSmall(ValueError):
    pass


def prime_bound(K: int, R: float, epsilon: float) -> float:
    """Lower bound on p: max(2^(2KR), 1 / ((2^(eps/4) - 1) 2^R))."""
    if R <= 0 or epsilon <= 0:
        raise ValueError("R and epsilon must be positive")
    return max(2.0 ** (2 * K * R), 1.0 / ((2.0 ** (epsilon / 4) - 1.0) * 2.0**R))


def choose_prime(K: int, R: float, epsilon: float) -> PrimeField:
    return PrimeField(next_prime(prime_bound(K, R, epsilon)))


def choose_ell(n: int, R: float, p: int, K: int | None = None) -> int:
    """Largest ell with (ell / n) log2 p <= R, clipped so that K * ell < n."""
    ell = math.floor(n * R / math.log2(p) + 1e-12)
    if K is not None:
        ell = min(ell, (n - 1) // K)
    if ell < 1:
        raise RateTooSmall(f"no ell >= 1 fits rate R={R} with n={n}, p={p}")
    return ell


@dataclass(frozen=True)
class CodeParams:
    K: int
    ell: int
    n: int
    R: float
    epsilon: float
    field: PrimeField

    def __post_init__(self):
        if self.K < 1 or self.ell < 1:
            raise ValueError("K and ell must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.K * self.ell >= self.n:
            raise ValueError(f"K*ell = {self.K * self.ell} must be < n = {self.n}")
        if self.rate > self.R + 1e-12:
            raise ValueError(
                f"code rate (ell/n) log2 p = {self.rate:.6g} exceeds design rate R = {self.R}"
            )

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def L(self) -> int:
        return self.K * self.ell

    @property
    def rate(self) -> float:
        """Per-message rate in bits per dimension."""
        return self.ell * math.log2(self.field.p) / self.n


def lift(coarse: LatticeSpec, p: int, codewords) -> np.ndarray:
    """``B_c p^-1 g(c)`` for codeword rows ``c`` over F_p."""
    c = np.asarray(codewords, dtype=float)
    return (c / p) @ coarse.generator.T


def code_points(coarse: LatticeSpec, generator: FpMatrix, messages) -> np.ndarray:
    """``[B_c p^-1 g(generator w)] mod Lambda_c`` for each message row ``w``."""
    p = generator.p
    w = np.asarray(messages, dtype=np.int64).reshape(-1, generator.cols)
    cw = (w @ generator.entries.T) % p
    return mod_lattice(coarse, lift(coarse, p, cw))


@dataclass(frozen=True, eq=False)
class NestedCode:
    params: CodeParams
    coarse: LatticeSpec
    G: FpMatrix
    dither: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.coarse.n != self.params.n:
            raise ValueError("coarse lattice dimension differs from n")
        if self.G.shape != (self.params.n, self.params.L):
            raise ValueError(f"G must be {self.params.n}x{self.params.L}, got {self.G.shape}")
        d = np.array(self.dither, dtype=float).reshape(-1)
        if d.shape != (self.params.n,):
            raise ValueError("dither has wrong dimension")
        d.setflags(write=False)
        object.__setattr__(self, "dither", d)

    @property
    def p(self) -> int:
        return self.params.p

    def offset(self, codeword: np.ndarray) -> np.ndarray:
        """``B_c p^-1 g(codeword)`` without the mod reduction."""
        return lift(self.coarse, self.p, codeword)

    def map_message_to_t(self, w) -> np.ndarray:
        return map_message_to_t(self, w)

    def encode(self, w) -> np.ndarray:
        return encode(self, w)


def map_message_to_t(code: NestedCode, w) -> np.ndarray:
    """Undithered codeword ``t = [B_c p^-1 g(G w)] mod Lambda_c``."""
    w = _message_array(code, w)
    return code_points(code.coarse, code.G, w)[0]


def encode(code: NestedCode, w) -> np.ndarray:
    """Transmit vector ``x = [t - d] mod Lambda_c``."""
    return mod_lattice(code.coarse, map_message_to_t(code, w) - code.dither)


def _message_array(code: NestedCode, w) -> np.ndarray:
    if isinstance(w, FpMatrix):
        w = w.flat()
    w = np.asarray(w, dtype=np.int64).reshape(-1)
    if w.shape != (code.params.L,):
        raise ValueError(f"message must have {code.params.L} symbols, got {w.size}")
    if np.any((w < 0) | (w >= code.p)):
        raise ValueError("message symbols must lie in [0, p)")
    return w


def enumerate_cosets(code: NestedCode, subgen: FpMatrix, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Coset leaders ``[B_c p^-1 g(subgen w~)] mod Lambda_c`` for all w~, lexicographic.

    Returns an array of shape (p^k, n) where k = subgen.cols.
    """
    k = subgen.cols
    count = code.p**k
    if count > cap:
        raise EnumerationTooLarge(f"{count} coset leaders exceeds the cap of {cap}")
    if k == 0:
        return np.zeros((1, code.params.n))
    return code_points(code.coarse, subgen, lex_vectors(code.p, k))


def sample_dither(coarse: LatticeSpec, rng: np.random.Generator) -> np.ndarray:
    """Uniform point of the Voronoi cell: uniform in the fundamental parallelepiped, then mod."""
    u = rng.random(coarse.n)
    return mod_lattice(coarse, coarse.generator @ u)


def check_full_rank(code: NestedCode) -> bool:
    return rank(code.G) == code.params.L


def draw_code(
    params: CodeParams,
    coarse: LatticeSpec,
    rng: np.random.Generator,
    max_redraws: int = 100,
) -> tuple[NestedCode, int]:
    """Random G (redrawn while rank deficient) and a fresh dither.

    Returns the code and the number of redraws.  If every attempt is rank
    deficient the last draw is returned; callers see it via check_full_rank.
    """
    redraws = 0
    G = random_matrix(params.field, params.n, params.L, rng)
    while rank(G) < params.L and redraws < max_redraws:
        redraws += 1
        log.info("G rank deficient, redrawing (attempt %d)", redraws)
        G = random_matrix(params.field, params.n, params.L, rng)
    d = sample_dither(coarse, rng)
    return NestedCode(params, coarse, G, d), redraws


def full_rank_failure_bound(p: int, n: int, L: int) -> float:
    """Upper bound p^-(n - L) on P(rank(G) < L)."""
    return float(p) ** (-(n - L))


def in_fine_lattice(code: NestedCode, x, generator: FpMatrix | None = None) -> bool:
    """Whether ``x`` lies in ``B_c p^-1 g(C) + Lambda_c`` for the code spanned by ``generator``."""
    gen = code.G if generator is None else generator
    p = code.p
    k = p * (code.coarse.inverse @ np.asarray(x, dtype=float))
    ki = np.rint(k)
    if np.max(np.abs(k - ki)) > 1e-6:
        return False
    c = FpMatrix(gen.field, ki.astype(np.int64).reshape(-1, 1))
    return rank(gen.hstack(c)) == rank(gen)


def coarse_summary(coarse: LatticeSpec) -> dict:
    g = geometry(coarse)
    return {
        "family": coarse.family,
        "scale": coarse.scale,
        "volume": g.volume,
        "r_cov": g.r_cov,
        "r_eff": g.r_eff,
        "rogers_ratio": g.rogers_ratio,
    }
