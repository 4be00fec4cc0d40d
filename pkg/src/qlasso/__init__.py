"""Recovery of structured signals from dithered quantized measurements."""

from .ensemble import (
    GAUSSIAN,
    RADEMACHER,
    EnsembleKind,
    LowRank,
    MeasurementMatrix,
    SignalSpec,
    Sparse,
    gen_lowrank_signal,
    gen_signal,
    gen_sparse_signal,
    sample_measurements,
)
from .experiment import (
    ErrorCurve,
    ExperimentConfig,
    MomentReport,
    RateFit,
    delta_sweep,
    fit_rate,
    onebit_dither_range,
    onebit_moment_check,
    run_curve,
    run_trial,
)
from .geometry import (
    ConeDiagnostics,
    ConstraintSet,
    L1Ball,
    NuclearBall,
    Unconstrained,
    estimate_smallball_inf,
    gw_bound_lowrank,
    gw_bound_sparse,
    project_l1_ball,
    project_nuclear_ball,
    sample_descent_directions,
)
from .quantizer import (
    DitherKind,
    KFoldUniformDither,
    NoDither,
    OneBitQuantizer,
    QuantizedObservations,
    QuantizerConfig,
    UniformHalfOpenDither,
    UniformQuantizer,
    UniformSymmetricDither,
    dither_mean_residual,
    measure,
    one_bit_mean_formula,
    one_bit_quantize,
    quantization_noise,
    sample_dither,
    uniform_quantize,
)
from .solver import (
    GLassoProblem,
    SolverOptions,
    SolverResult,
    dm_estimate,
    estimate_lipschitz,
    glasso_solve,
    gradient,
    objective,
    pbp_estimate,
)
from .streams import substream

__version__ = "0.1.0"
