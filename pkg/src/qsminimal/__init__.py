"""Homogeneous perfect sets, quasisymmetric images and their dimensions."""

from .construction import (
    FundamentalInterval,
    LevelSet,
    ParamSpec,
    build_level,
    build_levels,
    count,
    delta,
    dim_one_family,
    full_interval,
    gap_lengths,
    middle_thirds,
    normalize_params,
    uniform_cantor,
)
from .dimension import (
    box_dim_estimate,
    covering_count,
    hausdorff_formula_estimate,
    hausdorff_formula_partial,
    image_levelset,
    mlema_checks,
)
from .errors import (
    ConfigError,
    ConsistencyError,
    DegenerateError,
    PrecisionError,
    QsMinimalError,
)
from .measure import (
    build_image_tower,
    build_measure,
    frostman_check,
    minimality_experiment,
    proof_constants,
    r_products,
    skp_set,
    step2_window_check,
)
from .qsmaps import (
    Composition,
    Identity,
    PiecewiseLinear,
    Power,
    distortion_check,
    estimate_M,
    map_from_json,
    pq_exponents,
)

__version__ = "0.1.0"
