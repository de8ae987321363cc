"""Hybrid metric-projection fixed-point iterations in finite-dimensional l^p."""

from .errors import (ConfigError, DegenerateHalfSpace, DimensionError, DomainViolation,
                     EmptyLevelSet, GeometryMismatch, HybridProjError, InfeasibleRegion,
                     NonConvergence, SchemaError, SchemeError, SemanticError)
from .space import Geometry, distance, dual_norm, duality_map, norm, pairing
from .hull import HullIndex
from .projection import (FeasibleRegion, HalfSpace, ProjectionResult, euclidean_oracle,
                         project, vi_certificate)
from .operators import (Domain, OperatorSpec, apply_iterate, composite, contraction_scale,
                        empirical_lipschitz, gk_truncated, identity, make_operator,
                        projection_onto_box, rotation)
from .levelset import LevelSetThreshold, SamplerConfig, build_region, sample_level_set
from .schemes import (RunTrace, Schedule, SchemeState, init_state, make_dn_halfspace,
                      run_scheme, step_matsushita_takahashi, step_nakajo_takahashi,
                      step_nested)
from .harness import (ExperimentConfig, check_report, parse_config, read_trace,
                      run_experiment, sweep, write_trace)

__version__ = "0.1.0"
