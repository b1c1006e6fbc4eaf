"""Coarse lattices with exact closest-point quantizers.

Three families are supported, all scaled copies of a base lattice:

* ``Zn`` -- the integer lattice.
* ``Dn`` -- integer vectors with even coordinate sum (n >= 2).
* ``E8`` -- D8 together with the coset D8 + (1/2, ..., 1/2).

Quantizers operate on the last axis, so a stack
of points can be quantized in one call.  Exact half-integer ties round to
the even integer; the Dn parity repair picks the lowest coordinate index
among equally bad coordinates, and E8 prefers the D8 candidate on a tie.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

FAMILIES = ("Zn", "Dn", "E8")
TOL = 1e-9


class DimensionMismatch(ValueError):
    pass


class DimensionTooLarge(ValueError):
    pass


def base_generator(family: str, n: int) -> np.ndarray:
    """Unscaled generator; lattice points are ``B @ k`` for integer k."""
    if family == "Zn":
        if n < 1:
            raise ValueError("Zn needs n >= 1")
        return np.eye(n)
    if family == "Dn":
        if n < 2:
            raise ValueError("Dn needs n >= 2")
        b = np.zeros((n, n))
        b[0, 0] = 2.0
        for i in range(1, n):
            b[i, i] = 1.0
            b[i - 1, i] = -1.0
        return b
    if family == "E8":
        if n != 8:
            raise ValueError("E8 is only defined for n = 8")
        b = base_generator("Dn", 8)
        # Replace the last difference vector by the glue vector (1/2)^8.
        b[:, 7] = 0.5
        return b
    raise ValueError(f"unknown lattice family {family!r}; expected one of {FAMILIES}")


def base_covering_radius(family: str, n: int) -> float:
    if family == "Zn":
        return math.sqrt(n) / 2
    if family == "Dn":
        # Deep holes (1, 0, ..., 0) and (1/2, ..., 1/2).
        return max(1.0, math.sqrt(n) / 2)
    if family == "E8":
        return 1.0
    raise ValueError(f"unknown lattice family {family!r}")


@dataclass(frozen=True, eq=False)
class LatticeSpec:
    family: str
    n: int
    scale: float = 1.0
    generator: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.scale > 0 or not math.isfinite(self.scale):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")
        g = self.scale * base_generator(self.family, self.n)
        g.setflags(write=False)
        object.__setattr__(self, "generator", g)
        inv = np.linalg.inv(g)
        inv.setflags(write=False)
        object.__setattr__(self, "_inverse", inv)

    @property
    def inverse(self) -> np.ndarray:
        return self._inverse

    def quantize(self, x) -> np.ndarray:
        return quantize(self, x)

    def mod(self, x) -> np.ndarray:
        return mod_lattice(self, x)

    def contains(self, x, tol: float = TOL) -> bool | np.ndarray:
        """Membership test with an absolute tolerance scaled to the lattice."""
        r = np.linalg.norm(mod_lattice(self, x), axis=-1)
        return r <= tol * max(1.0, self.scale)


def _round_even(x: np.ndarray) -> np.ndarray:
    return np.rint(x)


def _quantize_zn(x: np.ndarray) -> np.ndarray:
    return _round_even(x)


def _quantize_dn(x: np.ndarray) -> np.ndarray:
    f = _round_even(x)
    odd = (np.sum(f, axis=-1) % 2) != 0
    if not np.any(odd):
        return f
    delta = np.abs(x - f)
    k = np.argmax(delta, axis=-1)  # first index on ties
    xk = np.take_along_axis(x, k[..., None], axis=-1)[..., 0]
    fk = np.take_along_axis(f, k[..., None], axis=-1)[..., 0]
    step = np.where(xk >= fk, 1.0, -1.0)
    fixed = f.copy()
    np.put_along_axis(fixed, k[..., None], (fk + step)[..., None], axis=-1)
    return np.where(odd[..., None], fixed, f)


def _quantize_e8(x: np.ndarray) -> np.ndarray:
    a = _quantize_dn(x)
    b = _quantize_dn(x - 0.5) + 0.5
    da = np.sum((x - a) ** 2, axis=-1)
    db = np.sum((x - b) ** 2, axis=-1)
    return np.where((db < da)[..., None], b, a)


_QUANTIZERS = {"Zn": _quantize_zn, "Dn": _quantize_dn, "E8": _quantize_e8}


def quantize(lattice: LatticeSpec, x) -> np.ndarray:
    """Closest lattice point to each row of ``x`` (last axis has length n)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (lattice.n,):
        raise DimensionMismatch(f"expected last axis of length {lattice.n}, got shape {x.shape}")
    s = lattice.scale
    return s * _QUANTIZERS[lattice.family](x / s)


def mod_lattice(lattice: LatticeSpec, x) -> np.ndarray:
    """``x - Q(x)``: the representative of x in the Voronoi cell at 0."""
    x = np.asarray(x, dtype=float)
    return x - quantize(lattice, x)


def unit_ball_volume(n: int) -> float:
    return math.exp((n / 2) * math.log(math.pi) - gammaln(n / 2 + 1))


@dataclass(frozen=True)
class Geometry:
    volume: float
    r_eff: float
    r_cov: float

    @property
    def rogers_ratio(self) -> float:
        return self.r_cov / self.r_eff


def geometry(lattice: LatticeSpec) -> Geometry:
    vol = abs(float(np.linalg.det(lattice.generator)))
    r_eff = (vol / unit_ball_volume(lattice.n)) ** (1 / lattice.n)
    r_cov = lattice.scale * base_covering_radius(lattice.family, lattice.n)
    return Geometry(volume=vol, r_eff=r_eff, r_cov=r_cov)


def scale_to_covering(family: str, n: int, target: float | None = None) -> LatticeSpec:
    """Scale a family so that its covering radius equals ``target`` (default sqrt(n))."""
    if target is None:
        target = math.sqrt(n)
    return LatticeSpec(family, n, target / base_covering_radius(family, n))


def coefficient_box(lattice: LatticeSpec, center, radius: float) -> list[range]:
    """Integer coefficient ranges covering every lattice point within ``radius`` of center."""
    c = lattice.inverse @ np.asarray(center, dtype=float)
    half = radius * np.linalg.norm(lattice.inverse, axis=1)
    return [
        range(math.floor(ci - hi - TOL), math.ceil(ci + hi + TOL) + 1)
        for ci, hi in zip(c, half)
    ]


def lattice_points_near(lattice: LatticeSpec, center, radius: float) -> np.ndarray:
    """All lattice points (rows) inside the coefficient box for a ball; a superset."""
    if lattice.n > 4:
        raise DimensionTooLarge(f"exhaustive enumeration limited to n <= 4, got {lattice.n}")
    box = coefficient_box(lattice, center, radius)
    k = np.array(list(itertools.product(*box)), dtype=float)
    return k @ lattice.generator.T


def count_points_in_ball(lattice: LatticeSpec, center, r: float) -> int:
    """Exact size of L intersected with the closed ball B(center, r), for n <= 4."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    center = np.asarray(center, dtype=float).reshape(-1)
    if center.shape != (lattice.n,):
        raise DimensionMismatch(f"center must have length {lattice.n}")
    pts = lattice_points_near(lattice, center, r)
    d = np.linalg.norm(pts - center, axis=1)
    return int(np.count_nonzero(d <= r + TOL))


def brute_force_nearest(lattice: LatticeSpec, x) -> np.ndarray:
    """Nearest lattice point by exhaustive search (n <= 4); reference oracle."""
    x = np.asarray(x, dtype=float).reshape(-1)
    r = geometry(lattice).r_cov
    pts = lattice_points_near(lattice, x, r + TOL)
    d = np.sum((pts - x) ** 2, axis=1)
    return pts[int(np.argmin(d))]
