"""Alternating Markov chains as alternating reverse-KL projections."""
from .divergences import (
    b_h,
    bregman_dual,
    bregman_entropy,
    decompose_bregman_entropy,
    entropy,
    entropy_gradient,
    kl,
    kl_chain_rule,
    rkl,
)
from .dynamics import (
    AlternatingChain,
    ChainState,
    TransitionMatrix,
    burn_in,
    check_ergodic,
    dual_kernel,
    es_from_kernels,
    half_step,
    primal_kernel,
    run,
    stationary,
)
from .instances import PottsInstance, potts_instance, random_instance
from .measures import (
    X_GIVEN_Y,
    Y_GIVEN_X,
    ConditionalKernel,
    JointMeasure,
    MarginalDistribution,
    SupportSet,
    check_disintegration,
    conditional,
    dirac,
    joint_from,
    marginal,
    uniform,
)
from .projections import (
    affine_residual,
    affine_subspace,
    log_denormalize,
    oracle_project_s1,
    oracle_project_s2,
    project_s1,
    project_s2,
)
from .verify import (
    emit_trace,
    verify_duality_chain,
    verify_projection_theorem,
    verify_pythagorean,
)

__version__ = "0.1.0"

__all__ = [
    "b_h",
    "bregman_dual",
    "bregman_entropy",
    "decompose_bregman_entropy",
    "entropy",
    "entropy_gradient",
    "kl",
    "kl_chain_rule",
    "rkl",
    "AlternatingChain",
    "PottsInstance",
    "potts_instance",
    "random_instance",
    "ChainState",
    "TransitionMatrix",
    "burn_in",
    "check_ergodic",
    "dual_kernel",
    "es_from_kernels",
    "half_step",
    "primal_kernel",
    "run",
    "stationary",
    "X_GIVEN_Y",
    "Y_GIVEN_X",
    "ConditionalKernel",
    "JointMeasure",
    "MarginalDistribution",
    "SupportSet",
    "check_disintegration",
    "conditional",
    "dirac",
    "joint_from",
    "marginal",
    "uniform",
    "affine_residual",
    "affine_subspace",
    "log_denormalize",
    "oracle_project_s1",
    "oracle_project_s2",
    "project_s1",
    "project_s2",
    "emit_trace",
    "verify_duality_chain",
    "verify_projection_theorem",
    "verify_pythagorean",
]
