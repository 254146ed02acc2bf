"""Kirkwood-Dirac quasiprobabilities, operator frames and quantum conditional expectations."""

from .condexp import (
    LEFT,
    RIGHT,
    DiagonalInBasis,
    InnerProductKind,
    cond_exp_closed,
    in_D_B,
    minimize_oracle,
    q_cond_exp,
    regularize,
)
from .frames import (
    ObservablePair,
    OperatorFrame,
    check_pair,
    dual_frame,
    frame_bounds,
    is_born_compatible,
    kd_frame,
    mix_frames,
    perturb_born_compatible,
)
from .operators import (
    DensityMatrix,
    Observable,
    hs_inner,
    make_density,
    random_density,
    spectral_decompose,
)
from .quasiprob import distribution, kd_distribution, marginals, overlap, symbol

__version__ = "0.1.0"
