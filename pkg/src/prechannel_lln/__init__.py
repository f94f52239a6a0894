"""Random pre-channels on finite-dimensional Schatten classes.

Exact expectations over finite-support laws, semigroups of pre-channels,
and Monte-Carlo checks of the law of large numbers for products
``exp(A_1 t/n) ... exp(A_n t/n)``.
"""

from .config import ExperimentConfig, default_test_vector
from .ensembles import generate, ginibre, lindblad_like, shipped, two_point, uniform_atoms
from .experiments import (
    DiagonalReport,
    EnumerationGuardError,
    LemmaReport,
    ProbeResult,
    SweepRecord,
    SweepResult,
    conjecture_probe,
    estimate_rate,
    run_lln_sweep,
    run_lln_trial,
    verify_diagonal_identity,
    verify_lemma_suite,
    w_n_ensemble,
)
from .operators import (
    INF,
    as_op,
    dual_exponent,
    identity,
    pairing,
    rank_one,
    schatten_norm,
    singular_values,
)
from .prob import (
    Ensemble,
    SeedSpec,
    centered,
    chebyshev_bound,
    deviation_prob_exact,
    expect,
    expect_map,
    product_ensemble,
    sample_iid,
    sample_indices,
    variance_superop,
)
from .semigroup import (
    TimeGrid,
    chernoff_error,
    composition_W,
    composition_moments,
    delta,
    expm,
    f_term,
    mean_semigroup,
)
from .superop import (
    NormEstimate,
    PreChannel,
    adjoint,
    apply,
    commutator_generator,
    compose,
    from_left_right,
    induced_norm,
    sot_distance,
)

__version__ = "0.1.0"
