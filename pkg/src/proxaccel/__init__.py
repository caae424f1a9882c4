"""Accelerated inexact proximal-point optimization with multilevel
debiasing, variance-reduced finite-sum solvers, extragradient min-max
solvers, baselines, and a seeded benchmark harness."""

from .accel import (AccelConfig, ProxBundle, alpha_next, alpha_sequence,
                    exact_prox_bundle, finite_sum_bundle, restart_epoch_length,
                    run_accelerated, run_additive, run_plain, run_restarted,
                    run_restarted_additive)
from .catalyst import CatalystConfig, catalyst_c1, kappa_grid
from .core import (Box, Domain, EuclideanBall, FiniteSumObjective,
                   MaxStructuredObjective, ProxProblem, QueryLedger, Trace,
                   Unconstrained, bregman_euclidean, bregman_f,
                   exact_prox_quadratic, project)
from .firstorder import (SmoothStronglyConvexProblem, agd, gradient_descent,
                         prox_gradient_preset)
from .minimax import (MirrorProxResult, approx_prox_minimax, best_response,
                      duality_gap, mirror_prox, warm_start_mirror_prox)
from .mlmc import (MlmcConfig, MlmcEstimate, mlmc_delta, sample_geometric,
                   unbiased_prox_mlmc)
from .problems import (LibsvmParseError, LogisticFiniteSum,
                       QuadraticFiniteSum, SaddleQuadratic, SparseExample,
                       bilinear_box_instance, bilinear_gap, logistic_component,
                       normalize_unit_norm, parse_libsvm, serialize_libsvm,
                       synth_finite_sum_quadratic, synth_logistic,
                       synth_saddle_quadratic)
from .svrg import (SvrgEpochConfig, approx_prox_svrg, one_epoch_svrg,
                   plain_svrg, svrg_gradient_estimator, warm_start_svrg)

__version__ = "0.1.0"
