"""Oracle checks of the structural facts the coding scheme relies on.

Each check builds small instances, computes the claim directly and by an
independent route (exhaustive enumeration, counting, Monte Carlo against a
closed-form bound) and reports the measured statistics.
"""

from __future__ import annotations

import math
import time
from collections.abc import Callable

import numpy as np
from pydantic import BaseModel
from scipy import stats

from .channel import SubcodeDecoder, effective_noise, mmse_params, noise_tail_check
from .construction import (
    CodeParams,
    NestedCode,
    code_points,
    draw_code,
    encode,
    full_rank_failure_bound,
    sample_dither,
)
from .fields import FpMatrix, PrimeField, lex_vectors, random_matrix, rank
from .lattices import (
    LatticeSpec,
    brute_force_nearest,
    count_points_in_ball,
    geometry,
    quantize,
    scale_to_covering,
    unit_ball_volume,
)
from .sideinfo import canonicalize, empty_side_info, subcode_structure

LEVELS = ("quick", "full")


class CheckResult(BaseModel):
    name: str
    passed: bool
    stats: dict
    seconds: float = 0.0


class VerifyReport(BaseModel):
    level: str
    checks: list[CheckResult]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def codebook_bijection(codes: int = 50, p: int = 5, K: int = 2, ell: int = 1, n: int = 8, seed: int = 0) -> CheckResult:
    """Every full-rank G maps the p^(K ell) messages to distinct points of Lambda / Lambda_c."""
    field = PrimeField(p)
    params = CodeParams(K, ell, n, ell * math.log2(p) / n, 1.0, field)
    coarse = scale_to_covering("Zn", n)
    rng = _rng(seed, 1)
    msgs = lex_vectors(p, K * ell)
    distinct = []
    for _ in range(codes):
        code, _ = draw_code(params, coarse, rng)
        pts = code_points(coarse, code.G, msgs)
        keys = {tuple(np.round(pt * p / coarse.scale).astype(np.int64)) for pt in pts}
        distinct.append(len(keys))
    expected = p ** (K * ell)
    return CheckResult(
        name="codebook_bijection",
        passed=all(d == expected for d in distinct),
        stats={"codes": codes, "expected": expected, "min_distinct": min(distinct), "max_distinct": max(distinct)},
    )


def codeword_uniformity(draws: int = 100_000, p: int = 3, n: int = 2, seed: int = 0, alpha: float = 1e-3) -> CheckResult:
    """For fixed nonzero w and uniform G, t is uniform over the p^n points of p^-1 Lambda_c / Lambda_c."""
    field = PrimeField(p)
    coarse = scale_to_covering("Zn", n)
    rng = _rng(seed, 2)
    w = np.array([1], dtype=np.int64)
    counts = np.zeros(p**n, dtype=np.int64)
    for _ in range(draws):
        G = random_matrix(field, n, 1, rng)
        t = code_points(coarse, G, w)[0]
        cell = np.mod(np.rint(p * (coarse.inverse @ t)).astype(np.int64), p)
        counts[int(cell @ (p ** np.arange(n - 1, -1, -1)))] += 1
    chi2, _ = stats.chisquare(counts)
    critical = float(stats.chi2.ppf(1 - alpha, df=p**n - 1))
    return CheckResult(
        name="codeword_uniformity",
        passed=bool(chi2 < critical),
        stats={"draws": draws, "cells": p**n, "chi2": float(chi2), "critical": critical, "counts": counts.tolist()},
    )


def ball_point_count(balls: int = 100, max_radius: float = 5.0, seed: int = 0) -> CheckResult:
    """|L cap B(s, r)| <= V_n / Vol(L) (r_cov + r)^n on Z^2 and D_2."""
    rng = _rng(seed, 3)
    violations = 0
    worst = 0.0
    checked = 0
    for lattice in (LatticeSpec("Zn", 2), LatticeSpec("Dn", 2)):
        g = geometry(lattice)
        vn = unit_ball_volume(lattice.n)
        for _ in range(balls):
            center = rng.uniform(-10, 10, size=2)
            r = rng.uniform(0, max_radius)
            count = count_points_in_ball(lattice, center, r)
            bound = vn / g.volume * (g.r_cov + r) ** lattice.n
            worst = max(worst, count / bound)
            violations += count > bound
            checked += 1
    return CheckResult(
        name="ball_point_count",
        passed=violations == 0,
        stats={"balls": checked, "violations": int(violations), "max_count_over_bound": worst},
    )


def noise_tail(trials: int = 100_000, epsilon: float = 1.0, seed: int = 0) -> CheckResult:
    """Empirical P(||z||^2 > n sigma_z^2 (1 + delta)) stays under the closed-form bound."""
    rows = []
    ok = True
    for i, n in enumerate((4, 8, 16)):
        for j, sigma2 in enumerate((0.25, 1.0)):
            tc = noise_tail_check(sigma2, epsilon, n, trials, _rng(seed, 4, i, j))
            ok &= tc.passed
            rows.append({"n": n, "sigma2": sigma2, "empirical": tc.empirical_prob, "bound": tc.bound, "slack": tc.slack})
    return CheckResult(name="noise_tail", passed=bool(ok), stats={"trials": trials, "epsilon": epsilon, "cases": rows})


def dither_independence(trials: int = 100_000, seed: int = 0) -> CheckResult:
    """With a fresh uniform dither, x = [t - d] mod Lambda_c is uniform on the cell and uncorrelated with t."""
    p, n = 3, 2
    field = PrimeField(p)
    coarse = scale_to_covering("Zn", n)
    rng = _rng(seed, 5)
    G = FpMatrix(field, [[1], [2]])
    msgs = rng.integers(0, p, size=trials)
    t = code_points(coarse, G, msgs.reshape(-1, 1))
    d = np.array([sample_dither(coarse, rng) for _ in range(trials)])
    x = coarse.mod(t - d)
    # Uniformity: the cell of scaled Z^2 is the square [-1, 1]^2.
    ks = [float(stats.kstest((x[:, k] + 1) / 2, "uniform").pvalue) for k in range(n)]
    corr = np.array([[np.corrcoef(x[:, a], t[:, b])[0, 1] for b in range(n)] for a in range(n)])
    z = float(np.max(np.abs(corr)) * math.sqrt(trials))
    return CheckResult(
        name="dither_independence",
        passed=bool(min(ks) > 1e-3 and z < 5.0),
        stats={"trials": trials, "ks_pvalues": ks, "max_abs_corr": float(np.max(np.abs(corr))), "corr_z": z},
    )


def error_identity_trials(
    code: NestedCode,
    S_rows: list[list[int]],
    sigma2: float,
    trials: int,
    rng: np.random.Generator,
) -> dict:
    """Count decode errors and trials where (decode error) != (Q_{Lambda_S}(z) outside Lambda_c)."""
    field = code.params.field
    K = code.params.K
    S = canonicalize(FpMatrix(field, np.array(S_rows, dtype=np.int64).reshape(-1, K))) if S_rows else empty_side_info(field, K)
    st = subcode_structure(S, code.G, code.params.ell)
    dec = SubcodeDecoder(code, st.subgen)
    prm = mmse_params(sigma2, code.params.epsilon, code.params.n)
    errors = mismatches = 0
    for _ in range(trials):
        w = rng.integers(0, code.p, size=code.params.L, dtype=np.int64)
        x = encode(code, w)
        noise = math.sqrt(sigma2) * rng.standard_normal(code.params.n)
        exp = st.expurgate(st.side_values(w))
        out = dec.decode(exp, x + noise, prm, w=w)
        predicted = dec.error_event_from_noise(effective_noise(x, noise, prm.alpha))
        errors += out.error_event
        mismatches += out.error_event != predicted
    return {"trials": trials, "errors": errors, "error_rate": errors / trials, "mismatches": mismatches}


def error_event_identity(trials: int = 10_000, seed: int = 0) -> CheckResult:
    """Decoding fails exactly when the effective noise quantizes to Lambda_S outside Lambda_c."""
    p, K, ell, n = 5, 2, 1, 4
    params = CodeParams(K, ell, n, math.log2(p) / n, 0.5, PrimeField(p))
    code, _ = draw_code(params, scale_to_covering("Zn", n), _rng(seed, 6, 0))
    sigma2 = 0.1
    res = {
        f"M={len(S)}": error_identity_trials(code, S, sigma2, trials, _rng(seed, 6, 1, len(S)))
        for S in ([[1, 0]], [])
    }
    return CheckResult(
        name="error_event_identity",
        passed=all(r["mismatches"] == 0 for r in res.values()),
        stats={"sigma2": sigma2, **res},
    )


def quantizer_oracle(points: int = 1000, seed: int = 0) -> CheckResult:
    """Fast quantizers agree with exhaustive nearest-point search for n <= 3."""
    rng = _rng(seed, 7)
    cases = [("Zn", 1), ("Zn", 2), ("Zn", 3), ("Dn", 2), ("Dn", 3)]
    mismatches = {}
    for fam, n in cases:
        lat = scale_to_covering(fam, n)
        xs = rng.uniform(-4 * lat.scale, 4 * lat.scale, size=(points, n))
        fast = quantize(lat, xs)
        bad = sum(not np.allclose(fast[i], brute_force_nearest(lat, xs[i]), atol=1e-9) for i in range(points))
        mismatches[f"{fam}{n}"] = int(bad)
    return CheckResult(
        name="quantizer_oracle",
        passed=not any(mismatches.values()),
        stats={"points_per_case": points, "mismatches": mismatches},
    )


def full_rank_rate(draws: int = 100_000, p: int = 5, n: int = 8, L: int = 2, seed: int = 0) -> CheckResult:
    """Fraction of rank-deficient uniform G stays below p^-(n - L) plus 5 sigma."""
    field = PrimeField(p)
    rng = _rng(seed, 8)
    fails = sum(rank(random_matrix(field, n, L, rng)) < L for _ in range(draws))
    bound = full_rank_failure_bound(p, n, L)
    slack = 5 * math.sqrt(bound * (1 - bound) / draws)
    rate = fails / draws
    return CheckResult(
        name="full_rank_rate",
        passed=rate <= bound + slack,
        stats={"draws": draws, "failures": int(fails), "rate": rate, "bound": bound, "slack": slack},
    )


_SIZES: dict[str, dict[str, dict]] = {
    "quick": {
        "codebook_bijection": {"codes": 10},
        "codeword_uniformity": {"draws": 10_000},
        "ball_point_count": {"balls": 100},
        "noise_tail": {"trials": 10_000},
        "dither_independence": {"trials": 10_000},
        "error_event_identity": {"trials": 1_000},
        "quantizer_oracle": {"points": 200},
        "full_rank_rate": {"draws": 5_000},
    },
    "full": {
        "codebook_bijection": {"codes": 50},
        "codeword_uniformity": {"draws": 100_000},
        "ball_point_count": {"balls": 100},
        "noise_tail": {"trials": 100_000},
        "dither_independence": {"trials": 100_000},
        "error_event_identity": {"trials": 10_000},
        "quantizer_oracle": {"points": 1000},
        "full_rank_rate": {"draws": 100_000},
    },
}

CHECKS: dict[str, Callable[..., CheckResult]] = {
    "codebook_bijection": codebook_bijection,
    "codeword_uniformity": codeword_uniformity,
    "ball_point_count": ball_point_count,
    "noise_tail": noise_tail,
    "dither_independence": dither_independence,
    "error_event_identity": error_event_identity,
    "quantizer_oracle": quantizer_oracle,
    "full_rank_rate": full_rank_rate,
}


def verify_suite(level: str = "quick", seed: int = 0) -> VerifyReport:
    """Run every check at the given size tier; failures are recorded, never raised."""
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    results = []
    for name, fn in CHECKS.items():
        t0 = time.perf_counter()
        try:
            res = fn(seed=seed, **_SIZES[level][name])
        except Exception as exc:  # a crashing check is a failed check
            res = CheckResult(name=name, passed=False, stats={"error": repr(exc)})
        res.seconds = round(time.perf_counter() - t0, 3)
        results.append(res)
    return VerifyReport(level=level, checks=results)
