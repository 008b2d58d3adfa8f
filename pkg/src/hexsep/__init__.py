"""Symbol error probability of hexagonal QAM: closed forms, an exact
region-integration oracle and a seeded Monte Carlo simulator."""

__version__ = "0.1.0"

from .errors import (DomainError, GridMismatch, HexSepError, IntegrationBudgetExceeded,
                     InvalidConfig, NumericalBudgetError, QuadratureNotConverged, ShapeUnavailable,
                     UnsupportedOrder, ValidationError)
from .lattice import (SUPPORTED_ORDERS, Constellation, ConstellationKind, DecisionRegion,
                      build_constellation, decision_regions, neighbor_stats)
from .gaussian import (QuadratureSpec, correction_C_closed, correction_C_numeric, q_func)
from .analytic import (SepParams, SnrPoint, db_to_linear, linear_to_db, params_from_constellation,
                       resolve_params, sep_3psk_exact, sep_hqam_closed, sep_hqam_corrected,
                       sep_hqam_rayleigh, sep_nn_awgn)
from .oracle import ExactSep, exact_sep_awgn, exact_sep_rayleigh
from .montecarlo import SimConfig, SimEstimate, simulate
from .report import sweep, table2_report
