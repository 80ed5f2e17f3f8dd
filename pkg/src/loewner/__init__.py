"""Loewner framework toolkit.

Rational interpolation and model reduction from frequency data, two-variable
barycentric models, Hankel realizations from time series, bilinear Loewner
reduction and data-driven controller identification.
"""

from . import benchmarks, errors, io
from .errors import InputError, LoewnerError, NumericalError, PreconditionError
from .hankel_time import (
    MarkovSequence,
    build_hankel,
    discretize_backward_euler,
    hankel_singular_values,
    pole_pencil,
    realize_from_impulse,
    realize_from_io,
    recover_markov,
    reduce_hankel,
    to_continuous_bilinear,
)
from .lddc import (
    ControllerSamples,
    ReferenceModel,
    closed_loop_eval,
    ideal_controller_samples,
    identify_controller,
)
from .loewner_bilinear import (
    BilinearLoewnerSet,
    InterpolationTuples,
    ModelKernel,
    QuadraticBilinearSpec,
    build_bilinear_set,
    carleman,
    eval_generalized_tf,
    factored_set,
    realize_bilinear,
    reduce_bilinear,
)
from .loewner_lti import (
    LoewnerFit,
    LoewnerPencil,
    TangentialDataSet,
    build_pencil,
    check_interpolation,
    detect_order,
    extract_polynomial_part,
    loewner_fit,
    partition_data,
    project_reduce,
    realify,
    sylvester_residual,
)
from .loewner_parametric import (
    ParamGrid,
    ParametricBarycentricModel,
    assemble_2d,
    barycentric_coeffs,
    detect_orders,
    eval_parametric,
    fit_parametric,
)
from .model_core import (
    BilinearModel,
    DescriptorModel,
    FrequencySample,
    TimeSeries,
    conjugate_close,
    eval_transfer,
    freqresp,
    poles,
    samples_from_function,
    simulate_bilinear,
    simulate_discrete,
    transfer_siso,
)

__version__ = "0.1.0"
