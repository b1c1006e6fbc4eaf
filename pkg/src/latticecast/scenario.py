"""Scenario files: JSON describing a code ensemble and a set of receivers."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .fields import is_prime

U64_MAX = 2**64 - 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LatticeConfig(_Strict):
    family: Literal["Zn", "Dn", "E8"] = "Zn"
    # "covering" scales to covering radius sqrt(n); a number is an explicit scale.
    scale: Union[Literal["covering"], float] = "covering"

    @field_validator("scale")
    @classmethod
    def _positive(cls, v):
        if v != "covering" and not v > 0:
            raise ValueError("scale must be positive")
        return v


class ReceiverConfig(_Strict):
    S: list[list[int]] = Field(default_factory=list)
    sigma2: float | None = Field(default=None, gt=0)
    snr_db: float | None = None

    @model_validator(mode="after")
    def _one_noise_spec(self):
        if (self.sigma2 is None) == (self.snr_db is None):
            raise ValueError("give exactly one of sigma2 or snr_db")
        return self

    @property
    def noise_variance(self) -> float:
        if self.sigma2 is not None:
            return self.sigma2
        return 10.0 ** (-self.snr_db / 10.0)


class Scenario(_Strict):
    p: Union[int, Literal["auto"]] = "auto"
    K: int = Field(ge=1)
    n: int = Field(ge=1)
    ell: Union[int, Literal["auto"]] = "auto"
    R: float = Field(gt=0)
    epsilon: float = Field(gt=0)
    lattice: LatticeConfig = Field(default_factory=LatticeConfig)
    seed: int = Field(default=0, ge=0, le=U64_MAX)
    trials: int = Field(ge=1)
    receivers: list[ReceiverConfig] = Field(default_factory=list)
    network_mode: bool = False
    network_sigma2: float | None = Field(default=None, gt=0)
    network_snr_db: float | None = None
    # Every receiver sees the same standard-normal draw per trial, scaled by its sigma.
    common_noise: bool = False
    enumeration_cap: int = Field(default=10**6, ge=1)
    max_redraws: int = Field(default=100, ge=0)

    @field_validator("p")
    @classmethod
    def _prime(cls, v):
        if v != "auto" and not is_prime(v):
            raise ValueError(f"{v} is not prime")
        return v

    @field_validator("ell")
    @classmethod
    def _ell_positive(cls, v):
        if v != "auto" and v < 1:
            raise ValueError("ell must be >= 1")
        return v

    @model_validator(mode="after")
    def _shapes(self):
        for i, rc in enumerate(self.receivers):
            for j, row in enumerate(rc.S):
                if len(row) != self.K:
                    raise _LocatedError(f"row has {len(row)} entries, expected K={self.K}", f"receivers[{i}].S[{j}]")
        if self.network_mode:
            if (self.network_sigma2 is None) == (self.network_snr_db is None):
                raise _LocatedError("network mode needs exactly one of network_sigma2 or network_snr_db", "network_sigma2")
        elif not self.receivers:
            raise _LocatedError("at least one receiver is required outside network mode", "receivers")
        return self

    @property
    def network_noise_variance(self) -> float | None:
        if self.network_sigma2 is not None:
            return self.network_sigma2
        if self.network_snr_db is not None:
            return 10.0 ** (-self.network_snr_db / 10.0)
        return None


class _LocatedError(ValueError):
    def __init__(self, message: str, path: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


def _format_loc(loc: tuple) -> str:
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += ("." if out else "") + str(part)
    return out


def parse_scenario(data: dict) -> Scenario:
    """Validate a decoded JSON object; errors become :class:`ConfigError` with a field path."""
    try:
        return Scenario.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        ctx_err = (err.get("ctx") or {}).get("error")
        if isinstance(ctx_err, _LocatedError):
            raise ConfigError(ctx_err.message, ctx_err.path) from None
        raise ConfigError(err["msg"], _format_loc(err["loc"]) or None) from None


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc.strerror}", str(path)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}", str(path)) from None
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a JSON object", str(path))
    return parse_scenario(data)
