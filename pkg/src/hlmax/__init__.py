"""Exact Hardy-Littlewood maximal operators on non-doubling truncated metric measure spaces."""

__version__ = "0.1.0"

from . import numeric
from .balls import Ball, average, ball, catalog, measure
from .exceptions import (
    BoundViolation, ConstructionError, DomainError, HlmaxError, UnknownBoundError,
)
from .families import (
    Family, analytic_bound, aux_sequences, bound_trials, delta_witness, j_index,
    make_space, tau_of, witness_scan,
)
from .maximal import brute_force_maximal, centered_maximal, maximal, noncentered_maximal
from .norms import ascend_norm, level_set, lp_norm, type_ratio, weak_lp
from .planner import PSet, Quadruple, plan, realize, validate
from .space import (
    Space, TestFunction, build_first_gen, build_second_gen, compose, distance,
)
