"""Numerical laboratory for the pinned hyperbolic sigma model in its
rooted-spanning-forest representation."""

__version__ = "0.1.0"

from .graphs import (AugmentedGraph, Graph, GraphError, LadderSpec, Pinning,
                     PinningError, augment, build_graph, build_ladder,
                     delta_pinning, horizontal_distance, ladder_spec,
                     read_graph_file, uniform_pinning)
from .linalg import (FactorizationError, NumericalError, green_entry,
                     laplacian, logdet_pinned, pinned_matrix,
                     pinning_diagonal, signed_minor_det)
from .forests import (SpanningTree, TreeEnsemble, TreeLaw, connected_in_forest,
                      enumerate_spanning_trees, forest_and_roots,
                      log_tree_weight, sample_tree_wilson, tree_law,
                      tree_from_forest_and_roots)
from .measure import (b_factor, log_density_t, log_density_ts,
                      sample_s_given_t, single_site_log_density_t,
                      single_site_t_cdf)
from .mcmc import (McmcConfig, SampleBatch, SamplerError,
                   effective_sample_size, read_jsonl, run_chain, write_jsonl)
from .observables import (Estimate, batch_mean_se, cond_q_parts,
                          estimate_eps_green, estimate_ward,
                          green_conditional, obs_q, root_decomposition)
from .experiments import (DecayFit, IndependenceReport, MonotonicityReport,
                          SweepResult, SweepRow, cell_seed,
                          compare_pinning_sweep, independence_test,
                          ladder_decay, one_root_monotonicity,
                          single_pin_q_estimate)
