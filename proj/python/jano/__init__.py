"""Region-aware diffusion acceleration testbed.

Thin wrapper over the compiled core: block-wise complexity analysis,
convergence-level scheduling, and a token-sparse DiT pipeline with
level-partitioned KV caching.
"""

from ._core import (  # noqa: F401
    BudgetInfeasibleError,
    CorrelationUndefinedError,
    FormatError,
    InvalidInputError,
    InvalidStateError,
    NumericError,
    SingularityError,
    ToyDiT,
    __version__,
    classify_levels,
    complexity_map,
    fft_ground_truth,
    latent_distance,
    load_latent,
    optimize_thresholds,
    oracle_velocity,
    plan_cost_fraction,
    rank_correlation,
    recognition_accuracy,
    render_scene,
    run_oracle_pipeline,
    save_latent,
    standard_suite_scene_count,
    synth_trajectory,
)
