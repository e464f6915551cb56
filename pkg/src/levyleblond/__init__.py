"""Semidiscrete fractional Dirac operators of Levy-Leblond type on periodic lattices."""
__version__ = "0.1.0"

from ._core import BACKEND
from .clifford import Multivector, Signature, dagger, geometric_product, norm, witt_pair
from .errors import (
    CapExceededError,
    ConsistencyError,
    ConstraintError,
    DecompositionError,
    DimensionMismatchError,
    LevyLeblondError,
    TailTruncationWarning,
    ZeroModeError,
)
from .fracalc import (
    RLOrder,
    TailModel,
    TimeGrid,
    bessel_i,
    gelfand_shilov,
    laplace_identity_check,
    rl_derivative_exp,
    rl_derivative_sampled,
)
from .fracops import (
    FracParams,
    delta_kernel,
    frac_laplacian,
    frac_laplacian_bochner,
    frac_laplacian_inverse,
    riesz_transform,
)
from .lattice import LatticeField, LatticeSpec, dense_matrix, dirac_h, laplace_h, shift
from .leblond import (
    DiracVariant,
    WittDecomposition,
    apply_variant,
    leray_projection,
    levy_leblond_solution,
    teodorescu,
    verify_coupled_system_space,
    verify_coupled_system_time,
    witt_join,
    witt_split,
)
from .semigroup import (
    HeatKernel,
    SemigroupEvaluator,
    evolve,
    heat_kernel,
    verify_space_fractional_cauchy,
    verify_time_fractional_cauchy,
)
from .spectral import (
    Multiplier,
    SpectralField,
    apply_multiplier,
    convolve_h,
    d_squared,
    forward_dft,
    inverse_dft,
    parseval_check,
    z_symbol,
)
