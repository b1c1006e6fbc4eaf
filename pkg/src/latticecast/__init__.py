"""Nested lattice codes for Gaussian multicast with coded side information."""

from .rates import capacity, capacity_term, threshold_check, threshold_sigma2
from .channel import SubcodeDecoder, decode, error_event_from_noise, mmse_params, noise_tail_check
from .construction import CodeParams, NestedCode, choose_ell, choose_prime, draw_code, encode, map_message_to_t
from .errors import ConfigError, EnumerationTooLarge
from .fields import FpMatrix, PrimeField
from .lattices import LatticeSpec, geometry, quantize, scale_to_covering
from .scenario import Scenario, load_scenario, parse_scenario
from .sideinfo import canonicalize, enumerate_subspaces, expurgate, subcode_structure
from .simulate import SummaryStats, ensemble_fraction_good, run_scenario
from .verify import verify_suite

__version__ = "0.1.0"

__all__ = [
    "CodeParams",
    "ConfigError",
    "EnumerationTooLarge",
    "FpMatrix",
    "LatticeSpec",
    "NestedCode",
    "PrimeField",
    "Scenario",
    "SubcodeDecoder",
    "SummaryStats",
    "canonicalize",
    "capacity",
    "capacity_term",
    "choose_ell",
    "choose_prime",
    "decode",
    "draw_code",
    "encode",
    "ensemble_fraction_good",
    "enumerate_subspaces",
    "error_event_from_noise",
    "expurgate",
    "geometry",
    "load_scenario",
    "map_message_to_t",
    "mmse_params",
    "noise_tail_check",
    "parse_scenario",
    "quantize",
    "run_scenario",
    "scale_to_covering",
    "subcode_structure",
    "threshold_check",
    "threshold_sigma2",
    "verify_suite",
]
