"""Anisotropic weighted spectral norms and parabolic well-posedness checks.

Subpackages map one-to-one onto the functional blocks:

* class_m        -- slowly varying function parameters
* spectra        -- lattices, unitary DFT, weighted norms
* plus_spaces    -- support-constrained factor norms and trace checks
* interpolation  -- interpolation with a function parameter (diagonal pairs)
* parabolicity   -- Petrovskii and covering condition checkers
* model_problem  -- periodic parabolic solves and two-sided estimates
* embedding      -- the sharp continuity criterion and its reductions
* cli            -- JSON-in / JSON-out command-line front end
"""

from .class_m import PhiFunction, constant_one, log_power, eval_phi
from .spectra import (
    AnisotropicIndex,
    GridFunction,
    Lattice,
    SpectralField,
    dft,
    idft,
    hnorm,
)
from .plus_spaces import RegionMask, plus_norm, time_window_region
from .interpolation import build_psi, verify_lemma71
from .parabolicity import (
    BoundaryFrame,
    BoundarySymbol,
    PrincipalSymbol,
    covering_check,
    petrovskii_check,
    sigma0,
)
from .model_problem import PeriodicParabolicOperator, solve_periodic, two_sided_ratio
from .embedding import criterion_verdict, sharpness_demo

__version__ = "0.1.0"
