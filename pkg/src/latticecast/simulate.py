"""Monte Carlo campaigns over a scenario.

Every trial draws its message from a stream keyed by (seed, trial) and
each receiver's noise from a stream keyed by (seed, receiver, trial), so
results do not depend on how trials are split across workers.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel
from scipy.stats import binomtest

from . import rates as cap
from .channel import DecoderParams, SubcodeDecoder, mmse_params
from .construction import (
    CodeParams,
    NestedCode,
    RateTooSmall,
    check_full_rank,
    choose_ell,
    choose_prime,
    draw_code,
    encode,
    prime_bound,
)
from .errors import ConfigError
from .fields import FpMatrix, PrimeField
from .lattices import LatticeSpec, geometry, scale_to_covering
from .scenario import Scenario
from .sideinfo import (
    FullRankSideInfo,
    SideInfoMatrix,
    SubcodeStructure,
    canonicalize,
    enumerate_subspaces,
    subcode_structure,
)

log = logging.getLogger(__name__)

_CODE, _MESSAGE, _NOISE, _COMMON_NOISE = 0, 1, 2, 3


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def wilson_interval(errors: int, trials: int) -> tuple[float, float]:
    ci = binomtest(errors, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


class ReceiverStats(BaseModel):
    receiver_index: int
    S: list[list[int]]
    rank_S: int
    sigma2: float
    snr_db: float
    trials: int
    errors: int
    error_rate: float
    ci_low: float
    ci_high: float
    threshold_satisfied: bool
    capacity_term_bits: float


class CodeMetadata(BaseModel):
    p: int
    K: int
    ell: int
    n: int
    R: float
    epsilon: float
    achieved_rate: float
    prime_bound: float
    prime_meets_bound: bool
    lattice_family: str
    lattice_scale: float
    r_cov: float
    r_eff: float
    rogers_ratio: float
    G_full_rank: bool
    redraws: int


class NetworkStats(BaseModel):
    trials: int
    errors: int
    error_rate: float
    ci_low: float
    ci_high: float


class SummaryStats(BaseModel):
    seed: int
    network_mode: bool
    capacity_bits: float
    code: CodeMetadata
    receivers: list[ReceiverStats]
    network: NetworkStats


@dataclass(frozen=True)
class ReceiverSetup:
    index: int
    S: SideInfoMatrix
    sigma2: float


@dataclass(frozen=True)
class ResolvedScenario:
    scenario: Scenario
    params: CodeParams
    coarse: LatticeSpec
    receivers: tuple[ReceiverSetup, ...]


def resolve(sc: Scenario) -> ResolvedScenario:
    """Fix p, ell and the coarse lattice, and canonicalize the receiver list."""
    if sc.p == "auto":
        field = choose_prime(sc.K, sc.R, sc.epsilon)
    else:
        field = PrimeField(sc.p)
        bound = prime_bound(sc.K, sc.R, sc.epsilon)
        if field.p < bound:
            log.warning(
                "p=%d is below the prime bound %.4g; the exponential error-decay guarantee does not apply",
                field.p,
                bound,
            )
    if sc.ell == "auto":
        try:
            ell = choose_ell(sc.n, sc.R, field.p, sc.K)
        except RateTooSmall as exc:
            raise ConfigError(str(exc), "R") from None
    else:
        ell = sc.ell
    try:
        params = CodeParams(sc.K, ell, sc.n, sc.R, sc.epsilon, field)
    except ValueError as exc:
        raise ConfigError(str(exc), "ell") from None

    try:
        if sc.lattice.scale == "covering":
            coarse = scale_to_covering(sc.lattice.family, sc.n)
        else:
            coarse = LatticeSpec(sc.lattice.family, sc.n, float(sc.lattice.scale))
    except ValueError as exc:
        raise ConfigError(str(exc), "lattice") from None

    receivers = []
    if sc.network_mode:
        sigma2 = sc.network_noise_variance
        for i, S in enumerate(enumerate_subspaces(field.p, sc.K, cap=sc.enumeration_cap)):
            receivers.append(ReceiverSetup(i, S, sigma2))
    else:
        for i, rc in enumerate(sc.receivers):
            raw = FpMatrix(field, np.array(rc.S, dtype=np.int64).reshape(len(rc.S), sc.K))
            try:
                S = canonicalize(raw, sc.K)
            except FullRankSideInfo as exc:
                raise ConfigError(str(exc), f"receivers[{i}].S") from None
            receivers.append(ReceiverSetup(i, S, rc.noise_variance))
    return ResolvedScenario(sc, params, coarse, tuple(receivers))


@dataclass
class _ReceiverRuntime:
    setup: ReceiverSetup
    structure: SubcodeStructure
    decoder: SubcodeDecoder | None
    dparams: DecoderParams


def _runtimes(rs: ResolvedScenario, code: NestedCode) -> list[_ReceiverRuntime]:
    out = []
    for r in rs.receivers:
        st = subcode_structure(r.S, code.G, rs.params.ell)
        dec = SubcodeDecoder(code, st.subgen, rs.scenario.enumeration_cap) if st.full_rank else None
        out.append(_ReceiverRuntime(r, st, dec, mmse_params(r.sigma2, rs.params.epsilon, rs.params.n)))
    return out


@dataclass(frozen=True)
class _Block:
    rs: ResolvedScenario
    code: NestedCode
    namespace: int
    start: int
    stop: int


def _run_block(block: _Block) -> tuple[list[int], int]:
    rs, code = block.rs, block.code
    seed = rs.scenario.seed
    runtimes = _runtimes(rs, code)
    p, L, n = code.p, code.params.L, code.params.n
    field = code.params.field
    errors = [0] * len(runtimes)
    net = 0
    for t in range(block.start, block.stop):
        w = stream(seed, block.namespace, _MESSAGE, t).integers(0, p, size=L, dtype=np.int64)
        x = encode(code, w)
        w_col = FpMatrix(field, w.reshape(-1, 1))
        common = None
        if rs.scenario.common_noise:
            common = stream(seed, block.namespace, _COMMON_NOISE, t).standard_normal(n)
        any_err = False
        for i, rt in enumerate(runtimes):
            if rt.decoder is None:
                errors[i] += 1
                any_err = True
                continue
            if common is None:
                g = stream(seed, block.namespace, _NOISE, rt.setup.index, t).standard_normal(n)
            else:
                g = common
            y = x + math.sqrt(rt.setup.sigma2) * g
            exp = rt.structure.expurgate(rt.structure.side_values(w_col))
            out = rt.decoder.decode(exp, y, rt.dparams, w=w)
            if out.error_event:
                errors[i] += 1
                any_err = True
        net += any_err
    return errors, net


def _blocks(trials: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(trials / max(1, workers * 4)))
    return [(s, min(trials, s + size)) for s in range(0, trials, size)]


def resolve_threads(threads: int | str | None) -> int:
    if threads in (None, 1, "1"):
        return 1
    if threads == "auto":
        return os.cpu_count() or 1
    t = int(threads)
    if t < 1:
        raise ConfigError("threads must be >= 1 or 'auto'", "threads")
    return t


def count_errors(rs: ResolvedScenario, code: NestedCode, namespace: int = 0, threads: int = 1) -> tuple[list[int], int]:
    """Per-receiver and network error counts over ``trials`` transmissions."""
    trials = rs.scenario.trials
    jobs = [_Block(rs, code, namespace, a, b) for a, b in _blocks(trials, threads)]
    if threads == 1:
        results = [_run_block(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_run_block, jobs))
    errors = [0] * len(rs.receivers)
    net = 0
    for errs, ne in results:
        errors = [a + b for a, b in zip(errors, errs)]
        net += ne
    return errors, net


def build_code(rs: ResolvedScenario, namespace: int = 0) -> tuple[NestedCode, int]:
    code, redraws = draw_code(rs.params, rs.coarse, stream(rs.scenario.seed, namespace, _CODE), rs.scenario.max_redraws)
    if redraws:
        log.warning("G was rank deficient %d time(s) before a usable draw", redraws)
    if not check_full_rank(code):
        log.warning("G still rank deficient after %d redraws; every trial counts as an error", redraws)
    return code, redraws


def summarize(rs: ResolvedScenario, code: NestedCode, redraws: int, errors: list[int], net: int) -> SummaryStats:
    sc, prm = rs.scenario, rs.params
    trials = sc.trials
    geo = geometry(rs.coarse)
    recs = []
    for r, e in zip(rs.receivers, errors):
        lo, hi = wilson_interval(e, trials)
        th = cap.threshold_check(r.S.M, r.sigma2, prm.R, prm.epsilon, prm.K)
        recs.append(
            ReceiverStats(
                receiver_index=r.index,
                S=r.S.to_list(),
                rank_S=r.S.M,
                sigma2=r.sigma2,
                snr_db=cap.snr_db(r.sigma2),
                trials=trials,
                errors=e,
                error_rate=e / trials,
                ci_low=lo,
                ci_high=hi,
                threshold_satisfied=th.satisfied,
                capacity_term_bits=cap.capacity_term(r.S.M, r.sigma2, prm.K),
            )
        )
    lo, hi = wilson_interval(net, trials)
    bound = prime_bound(prm.K, prm.R, prm.epsilon)
    meta = CodeMetadata(
        p=prm.p,
        K=prm.K,
        ell=prm.ell,
        n=prm.n,
        R=prm.R,
        epsilon=prm.epsilon,
        achieved_rate=prm.rate,
        prime_bound=bound,
        prime_meets_bound=prm.p >= bound,
        lattice_family=rs.coarse.family,
        lattice_scale=rs.coarse.scale,
        r_cov=geo.r_cov,
        r_eff=geo.r_eff,
        rogers_ratio=geo.rogers_ratio,
        G_full_rank=check_full_rank(code),
        redraws=redraws,
    )
    return SummaryStats(
        seed=sc.seed,
        network_mode=sc.network_mode,
        capacity_bits=cap.capacity(((r.S.M, r.sigma2) for r in rs.receivers), prm.K),
        code=meta,
        receivers=recs,
        network=NetworkStats(trials=trials, errors=net, error_rate=net / trials, ci_low=lo, ci_high=hi),
    )


def run_scenario(sc: Scenario, threads: int = 1) -> SummaryStats:
    rs = resolve(sc)
    code, redraws = build_code(rs)
    errors, net = count_errors(rs, code, threads=threads)
    return summarize(rs, code, redraws, errors, net)


class EnsembleResult(BaseModel):
    codebooks: int
    threshold: float
    fraction_good: float
    mean_network_error_rate: float
    network_error_rates: list[float]


def ensemble_fraction_good(sc: Scenario, codebooks: int, threshold: float, threads: int = 1) -> EnsembleResult:
    """Fraction of independently drawn (G, d) codes whose network error rate is <= threshold."""
    if codebooks < 10:
        raise ConfigError("ensemble needs at least 10 codebooks", "codebooks")
    rs = resolve(sc)
    rates = []
    for i in range(codebooks):
        code, _ = build_code(rs, namespace=i + 1)
        _, net = count_errors(rs, code, namespace=i + 1, threads=threads)
        rates.append(net / sc.trials)
    good = sum(r <= threshold for r in rates)
    return EnsembleResult(
        codebooks=codebooks,
        threshold=threshold,
        fraction_good=good / codebooks,
        mean_network_error_rate=float(np.mean(rates)),
        network_error_rates=rates,
    )
