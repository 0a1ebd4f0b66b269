"""Creative-telescoping proofs of terminating hypergeometric identities and
rigorous evaluation of Ramanujan-type series for 1/pi."""

from .errors import (DivergenceError, DomainError, NotHypergeometricError, PoleError,
                     RamtelError, TermSyntaxError, UndeclaredVariableError, ZeroBaseError)
from .exact import AlgebraicConstant, BigFloat, pi_reference, sqrt_bigfloat
from .gosper import gosper_normal_form, gosper_solve
from .hyperterm import HyperTerm, apply_theta, parse_term, shift_quotient
from .numeric import eval_series, eval_weighted_series, verify_closed_form
from .prover import ProofTask, example_tasks, prove_pair, series_catalog, verify_z_identity
from .telescope import Telescoper, boundary_check, find_telescoper, verify_certificate

__all__ = [
    "AlgebraicConstant", "BigFloat", "DivergenceError", "DomainError", "HyperTerm",
    "NotHypergeometricError", "PoleError", "ProofTask", "RamtelError", "Telescoper",
    "TermSyntaxError", "UndeclaredVariableError", "ZeroBaseError", "apply_theta",
    "boundary_check", "eval_series", "eval_weighted_series", "example_tasks", "find_telescoper",
    "gosper_normal_form", "gosper_solve", "parse_term", "pi_reference", "prove_pair",
    "series_catalog", "shift_quotient", "sqrt_bigfloat", "verify_certificate",
    "verify_closed_form", "verify_z_identity",
]

__version__ = "0.1.0"
