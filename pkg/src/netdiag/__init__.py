"""netdiag: directed sets, nets with explicit cofinality witnesses, and the diagonal
construction that turns a sequence of successive subnet extractions into one net that
is an eventual subnet of every stage."""

__version__ = "0.1.0"

from .directed import (DirectedSet, FiniteDirectedSet, FiniteSubsets, MalformedElementError, Naturals,
                       ProductDirectedSet, check_laws)
from .nets import (BrokenWitnessError, CofinalMap, ContractError, Net, TailRestriction,
                   WitnessSearchError, check_cofinal, compose_cofinal, frequent_subnet, subnet)
from .diagonal import (DiagonalDirectedSet, ExtractionChain, ExtractionError, VerificationPlan,
                       diag_join, diag_level_map, diag_root_map, diagonal_net, diagonal_subsequence,
                       run_diagonal)
from .convergence import ConvergenceCertificate, LatticeVector, check_certificate, un_distance

__all__ = [
    "BrokenWitnessError", "CofinalMap", "ContractError", "ConvergenceCertificate", "DiagonalDirectedSet",
    "DirectedSet", "ExtractionChain", "ExtractionError", "FiniteDirectedSet", "FiniteSubsets",
    "LatticeVector", "MalformedElementError", "Naturals", "Net", "ProductDirectedSet", "TailRestriction",
    "VerificationPlan", "WitnessSearchError", "check_certificate", "check_cofinal", "check_laws",
    "compose_cofinal", "diag_join", "diag_level_map", "diag_root_map", "diagonal_net",
    "diagonal_subsequence", "frequent_subnet", "run_diagonal", "subnet", "un_distance",
]
