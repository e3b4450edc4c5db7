"""Greedy continuous paths and animals on marked Poisson point processes."""

from .errors import (
    DomainError,
    GlabError,
    InfeasibleError,
    ParameterError,
    ShapeError,
    SizeError,
    ValidationError,
)
from .geometry import (
    Animal,
    Path,
    Query,
    animal_length,
    dfs_cover_path,
    euclidean_mst,
    is_feasible,
    path_length,
    path_mass,
    penalized_score,
    prune_bad_vertices,
    rewire_high_degree,
)
from .point_process import (
    IntensityDescriptor,
    MarkedPoint,
    PointConfiguration,
    check_moment_condition,
    flatten_marks,
    mass_of,
    nearest_atom_distance,
    sample_ppp,
    sprinkle_integral,
    superpose,
    transform_scale,
    transform_stretch,
)
from .solvers import (
    SolveResult,
    solve_animal_bracket,
    solve_heuristic,
    solve_path_exact,
    solve_restricted_animal_exact,
    sprinkle_replace,
    verify_chain,
)
from .estimation import (
    CurveEstimate,
    check_curve_shape,
    estimate_curve,
    g_function,
    q_scan,
    scaling_test,
    stretching_bound_check,
    universal_bound_check,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
