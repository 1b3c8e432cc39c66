"""Numerical laboratory for log-corrected Holder moduli, mollification
estimates, commutator energy-flux scaling, and boundary-cutoff machinery,
with a small pseudo-spectral 2-D Euler solver for identity checks."""

from . import boundary, commutator, euler2d, harness
from .errors import (ConfigError, DomainError, PreconditionError, RankError,
                     ResolutionError)
from .fields import (Grid, LacunarySpec, SampledField, bounded_pressure,
                     box_grid, divergence_max, gen_lacunary, gen_smooth_random,
                     load_field, periodic_grid, project_divfree, save_field)
from .modulus import (Modulus, SeminormReport, besov3_seminorm, holog_seminorm,
                      modulus_eval)
from .mollify import MollifierKernel, delta_shift, grad_mollified, make_kernel, mollify

__all__ = [
    "ConfigError", "DomainError", "PreconditionError", "RankError",
    "ResolutionError", "Grid", "LacunarySpec", "SampledField",
    "bounded_pressure", "box_grid", "divergence_max", "gen_lacunary",
    "gen_smooth_random", "load_field", "periodic_grid", "project_divfree",
    "save_field", "Modulus", "SeminormReport", "besov3_seminorm",
    "holog_seminorm", "modulus_eval", "MollifierKernel", "delta_shift",
    "grad_mollified", "make_kernel", "mollify",
]
