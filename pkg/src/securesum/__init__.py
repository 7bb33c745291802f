"""Three-party secure XOR computation: protocols, codes, and exact leakage audits."""

from .analysis import (
    JointPmf,
    LeakageReport,
    Lemma1Report,
    MonteCarloError,
    RateReport,
    check_lemma1,
    check_rate_region,
    conditional_entropy,
    conditional_mutual_information,
    enumerate_joint,
    entropy,
    leakage_report,
    monte_carlo_error,
    rate_report,
)
from .codes import (
    LinearCode,
    build_code,
    code_from_matrix,
    decode_syndrome,
    exact_error_probability,
    syndrome,
)
from .errors import CapacityError, ConfigurationError, ContractViolation
from .gf2 import Gf2Matrix, Gf2Vector, matvec, random_matrix, random_vector, rank, xor
from .protocol import (
    Message,
    PartyId,
    RunOutcome,
    Transcript,
    run_plain_km,
    run_secure_km,
    run_with_sampling,
    run_zero_error_otp,
)
from .source import DsbsParams, binary_entropy, pair_probability, sample_pair

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Gf2Vector", "Gf2Matrix", "matvec", "xor", "rank", "random_matrix", "random_vector",
    "DsbsParams", "sample_pair", "pair_probability", "binary_entropy",
    "LinearCode", "build_code", "code_from_matrix", "syndrome", "decode_syndrome",
    "exact_error_probability",
    "PartyId", "Message", "Transcript", "RunOutcome",
    "run_secure_km", "run_plain_km", "run_zero_error_otp", "run_with_sampling",
    "JointPmf", "LeakageReport", "RateReport", "Lemma1Report", "MonteCarloError",
    "enumerate_joint", "entropy", "conditional_entropy", "conditional_mutual_information",
    "leakage_report", "rate_report", "check_rate_region", "check_lemma1", "monte_carlo_error",
    "ContractViolation", "CapacityError", "ConfigurationError",
]
