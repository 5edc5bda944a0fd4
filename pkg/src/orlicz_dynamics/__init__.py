"""Orlicz spaces on discretized locally compact groups and the dynamics of translations.

Set ORLICZ_DYNAMICS_DISABLE_NUMBA=1 to run the kernels as plain Python/numpy.
"""

__version__ = "0.1.0"

from ._jit import NUMBA_ENABLED
from .errors import CapacityError, DivergenceError, DomainError, PreconditionError
from .young import (DEFAULT_SEARCH, SearchConfig, YoungFunction, check_axioms, complementary,
                    conjugate, conjugate_table, delta2_probe, evaluate, inverse, young_gap)
from .groups import (Cyclic, DiscreteHeisenberg, GroupSpace, IntegerLine, LatticeLine, Weight,
                     aperiodicity_window, box, constant_weight, custom_weight, exp_abs_weight,
                     is_torsion, poly_weight, table_weight, validate_weight)
from .orlicz import (NormResult, SimpleFunction, dual_ball_oracle, luxemburg_norm, modular,
                     norm_equivalence_check, orlicz_norm, weighted_norm)
from .dynamics import (PeriodicCandidate, TranslationOp, operator_norm_bound, orbit, orbit_hit,
                       periodic_point, translate)
from .certify import (Certificate, CriterionStep, Strategy, abelian_obstruction_check,
                      blowup_collapse_probe, chaos_certificate, criterion_quantity, greedy,
                      mixing_certificate, transitivity_certificate)
