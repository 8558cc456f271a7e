"""Multiple packings in Euclidean space.

Radius computations and packing verification (:mod:`.geometry`), random
ensembles (:mod:`.ensembles`), random coding with expurgation
(:mod:`.expurgation`), closed-form bounds (:mod:`.bounds`), bad-list tail
probabilities (:mod:`.montecarlo`) and cap coverings with the Plotkin
double-counting identity (:mod:`.covering`).
"""

from .bounds import BoundName, DomainError, eval_bound, maximize_E, plotkin_point
from .covering import CapCovering, build_covering, cap_code_identity, coverage_fraction, plotkin_cap_check
from .ensembles import EnsembleSpec, sample, sample_cap
from .expurgation import ExpurgationReport, construct, expurgate, find_bad_lists
from .geometry import (
    Code,
    GeometryError,
    ListWitness,
    PackingParams,
    avg_sq_radius,
    cheb_sq_radius,
    code_min_radius,
    list_decode,
    verify_packing,
)
from .montecarlo import TailEstimate, chi2_cdf, gaussian_tail_exact, mc_tail

__version__ = "0.1.0"
