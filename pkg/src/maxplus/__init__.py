"""Max-plus matrix products, spectral theory and the memory loss property."""

from .core import (BOTTOM, DEFAULT_TOL, LinearForm, MatrixClassification, MaxPlusError,
                   arctan_distance, classify_matrix, eval_linear_form, identity,
                   mat_power, oplus, otimes, product, rank1)
from .graph import (elementary_circuits, path_stats, precedence_graph,
                    scc_and_cyclicity)
from .mlp import (genericity_report, mlp_certificate_search, mlp_construct,
                  rank1_neighborhood, reduce_pair, reducedness, verify_neighborhood,
                  construct_scs1cyc1)
from .spectral import (a_plus, critical_eigenvectors, critical_summary,
                       crossing_transient, normalize, rank1_power, rho_max,
                       stabilized_power)
from .stochastic import (SamplerModel, StochasticModel, coupling_analysis, lyapunov,
                         lyapunov_sweep, simulate)

__version__ = "0.1.0"
