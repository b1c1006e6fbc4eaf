"""AWGN transmission and the receiver chain.

The receiver scales by the MMSE coefficient, removes the side-information
offset and the dither, quantizes to the subcode lattice ``Lambda_S`` and
reads the message off the winning coset.  ``Lambda_S`` is a union of
``p^((K-M) ell)`` cosets of the coarse lattice, so its closest point is
found exactly by quantizing against every coset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .construction import DEFAULT_ENUMERATION_CAP, NestedCode, enumerate_cosets
from .fields import FpMatrix, lex_vectors
from .lattices import LatticeSpec, mod_lattice, quantize, scale_to_covering
from .sideinfo import ExpurgationData, recover_message


def add_awgn(x, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    x = np.asarray(x, dtype=float)
    return x + math.sqrt(sigma2) * rng.standard_normal(x.shape)


@dataclass(frozen=True)
class DecoderParams:
    alpha: float
    sigma_z2: float
    delta: float
    r_z: float


def mmse_params(sigma2: float, epsilon: float, n: int) -> DecoderParams:
    if sigma2 <= 0 or epsilon <= 0:
        raise ValueError("sigma2 and epsilon must be positive")
    alpha = 1.0 / (1.0 + sigma2)
    sigma_z2 = sigma2 / (1.0 + sigma2)
    delta = 2.0 ** (epsilon / 2) - 1.0
    return DecoderParams(alpha, sigma_z2, delta, math.sqrt(n * (1 + delta) * sigma_z2))


def effective_noise(x, noise, alpha: float) -> np.ndarray:
    """z = alpha n - (1 - alpha) x."""
    return alpha * np.asarray(noise) - (1 - alpha) * np.asarray(x)


@dataclass
class DecodeOutcome:
    w_hat: FpMatrix
    w_tilde_index: int
    error_event: bool | None
    rank_event: bool
    distance_metrics: dict = field(default_factory=dict)


def nearest_coset(coarse: LatticeSpec, cosets: np.ndarray, y) -> tuple[int, np.ndarray, np.ndarray]:
    """Closest point of ``union_j (cosets[j] + Lambda_c)`` to y.

    Returns the winning index (lowest on ties), the closest point and all
    squared residual norms.
    """
    shifted = np.asarray(y, dtype=float)[None, :] - cosets
    q = quantize(coarse, shifted)
    d2 = np.sum((shifted - q) ** 2, axis=1)
    j = int(np.argmin(d2))
    return j, cosets[j] + q[j], d2


class SubcodeDecoder:
    """Decoder for one receiver; caches the coset leaders of ``Lambda_S``."""

    def __init__(self, code: NestedCode, subgen: FpMatrix, cap: int = DEFAULT_ENUMERATION_CAP):
        self.code = code
        self.subgen = subgen
        self.cosets = enumerate_cosets(code, subgen, cap)
        self.w_tildes = lex_vectors(code.p, subgen.cols)

    def quantize(self, y) -> tuple[int, np.ndarray, np.ndarray]:
        return nearest_coset(self.code.coarse, self.cosets, y)

    def decode(self, exp: ExpurgationData, y, params: DecoderParams, w=None) -> DecodeOutcome:
        code = self.code
        if not exp.full_rank:
            return DecodeOutcome(exp.v, 0, True if w is not None else None, True, {})
        offset = code.offset(_codeword(code, exp.v))
        y_prime = params.alpha * np.asarray(y, dtype=float) - offset + code.dither
        j, q, d2 = self.quantize(y_prime)
        w_hat = recover_message(exp.v, exp.A_S, self.w_tildes[j])
        t_hat = mod_lattice(code.coarse, q + offset)
        error = None
        if w is not None:
            error = not np.array_equal(w_hat.flat(), _flat(w))
        order = np.sort(d2)
        metrics = {
            "residual": float(math.sqrt(order[0])),
            "runner_up": float(math.sqrt(order[1])) if order.size > 1 else math.inf,
            "t_hat": t_hat,
        }
        return DecodeOutcome(w_hat, j, error, False, metrics)

    def error_event_from_noise(self, z) -> bool:
        _, q, _ = self.quantize(z)
        return not bool(self.code.coarse.contains(q))


def _codeword(code: NestedCode, v: FpMatrix) -> np.ndarray:
    return (code.G @ v).flat()


def _flat(w) -> np.ndarray:
    if isinstance(w, FpMatrix):
        return w.flat()
    return np.asarray(w, dtype=np.int64).reshape(-1)


def decode(
    code: NestedCode,
    exp: ExpurgationData,
    y,
    params: DecoderParams,
    w=None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> DecodeOutcome:
    """One-shot decode; build a :class:`SubcodeDecoder` to reuse coset leaders across trials."""
    if not exp.full_rank:
        return DecodeOutcome(exp.v, 0, True if w is not None else None, True, {})
    return SubcodeDecoder(code, exp.subgen, cap).decode(exp, y, params, w)


def error_event_from_noise(code: NestedCode, exp: ExpurgationData, z, cap: int = DEFAULT_ENUMERATION_CAP) -> bool:
    """True iff the closest point of ``Lambda_S`` to z falls outside ``Lambda_c``."""
    return SubcodeDecoder(code, exp.subgen, cap).error_event_from_noise(z)


@dataclass(frozen=True)
class TailCheck:
    empirical_prob: float
    bound: float
    slack: float
    trials: int
    exceedances: int

    @property
    def passed(self) -> bool:
        return self.empirical_prob <= self.bound + self.slack


def noise_tail_bound(sigma2: float, epsilon: float, n: int) -> float:
    """exp(-n (delta - ln(1 + delta)) / 2) + exp(-n sigma^2 delta^2 / 4)."""
    delta = 2.0 ** (epsilon / 2) - 1.0
    return math.exp(-n * (delta - math.log1p(delta)) / 2) + math.exp(-n * sigma2 * delta**2 / 4)


def noise_tail_check(
    sigma2: float,
    epsilon: float,
    n: int,
    trials: int,
    rng: np.random.Generator,
    coarse: LatticeSpec | None = None,
    batch: int = 100_000,
) -> TailCheck:
    """Monte Carlo estimate of P(||z||^2 > n sigma_z^2 (1 + delta)) with x uniform on the Voronoi cell."""
    if trials < 10_000:
        raise ValueError("noise_tail_check needs at least 10^4 trials")
    if coarse is None:
        coarse = scale_to_covering("Zn", n)
    prm = mmse_params(sigma2, epsilon, n)
    threshold = n * prm.sigma_z2 * (1 + prm.delta)
    hits = 0
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        u = rng.random((m, n))
        x = mod_lattice(coarse, u @ coarse.generator.T)
        noise = math.sqrt(sigma2) * rng.standard_normal((m, n))
        z = effective_noise(x, noise, prm.alpha)
        hits += int(np.count_nonzero(np.sum(z**2, axis=1) > threshold))
        done += m
    bound = noise_tail_bound(sigma2, epsilon, n)
    q = min(bound, 1.0)
    slack = 5 * math.sqrt(q * (1 - q) / trials)
    return TailCheck(hits / trials, bound, slack, trials, hits)
