"""Index-calculus discrete logarithms in imaginary and real quadratic fields."""

from .exceptions import (
    Inert,
    LikelyNonPrincipal,
    NoSolution,
    NonResidue,
    NotSmooth,
    PrecisionLoss,
    QFDlogError,
    RankDeficient,
    RelationDeficit,
    Timeout,
    Unverified,
)
from .ideals import Ideal, principal_near, prime_ideal_above
from .ntkernel import Discriminant, FixedReal, gen_prime_discriminant
from .solver import (
    ClassGroup,
    IndexCalculus,
    RegulatorEstimate,
    SolverConfig,
    class_group,
    dlp_imaginary,
    dlp_infrastructure,
    euler_window,
    regulator,
    verify_dlp,
    verify_infra,
)

__version__ = "0.1.0"

__all__ = [
    "ClassGroup",
    "Discriminant",
    "FixedReal",
    "Ideal",
    "IndexCalculus",
    "Inert",
    "LikelyNonPrincipal",
    "NoSolution",
    "NonResidue",
    "NotSmooth",
    "PrecisionLoss",
    "QFDlogError",
    "RankDeficient",
    "RegulatorEstimate",
    "RelationDeficit",
    "SolverConfig",
    "Timeout",
    "Unverified",
    "class_group",
    "dlp_imaginary",
    "dlp_infrastructure",
    "euler_window",
    "gen_prime_discriminant",
    "prime_ideal_above",
    "principal_near",
    "regulator",
    "verify_dlp",
    "verify_infra",
]
