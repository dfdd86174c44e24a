"""Series expansions of general Heun solutions in incomplete Beta and
Appell F1 functions, with the Frobenius machinery needed to build and
certify them."""

from .errors import *  # noqa: F401,F403
from .heun import HeunParameters, make_params, heun_ode, heun_residual, heun_frobenius_oracle
from .series import (
    ComplexPoly,
    FrobeniusSeries,
    RationalODE,
    RecurrenceRelation,
    build_recurrence,
    indicial_exponents,
    ratio_limit,
    run_recurrence,
    shift_to_origin,
)
from .special import SeriesValue, appell_f1, gauss_2f1, incomplete_beta
from .expansions import (
    BetaExpansion,
    TermFamily,
    TransformData,
    TransformKind,
    determine_c0,
    eval_expansion,
    make_expansion,
    type1_transform,
    type2_transform,
)

__version__ = "0.1.0"
