"""Spectral and geodesic-triangle geometry of sparse Erdos-Renyi random graphs."""

__version__ = "0.1.0"

from .exceptions import *  # noqa: F401,F403
from .graph import (Graph, bfs, build_graph, components, geodesic, giant_component, induced_subgraph,
                    read_edge_list, write_edge_list)
from .generators import (GenSpec, OffspringLaw, gen_fixture, gen_galton_watson, gen_gnp, gen_truncated_tree,
                         realization_seed)
from .spectral import (SpectralMeasure, atom_mass, averaged_measure, build_laplacian, cheeger_exact,
                       cheeger_sandwich_check, cheeger_sweep, eigenvalues, extreme_eigenvalues, lambda0,
                       spectral_measure)
from .mckay import bulk_distance, mckay_cdf, mckay_pdf, mckay_support
from .hyperbolicity import (CurvatureProfile, curvature_profile, delta_minmax, delta_stat, delta_thin_min,
                            merge_profiles, plateau, rescale_collapse, sample_triangles, triangle_paths)
from .asymptotics import (LoopParams, branching_gap, fat_triangle_lower_bound, giant_fraction, loop_probability,
                          regular_tree_gap, rho_and_bounds, rho_below_one_check, rho_limit)
from .estimators import CurvatureProfiler, SpectralDensity, SpectralGap
from .validation import check_graph
