"""Phase estimation with entangled coherent and qubit-which-path states.

Submodules: ``specfun`` (special functions), ``states`` (probe states and
Wigner grids), ``fisher_q`` (quantum Fisher information), ``measure``
(outcome laws and samplers), ``fisher_c`` (classical Fisher information,
bounds and MLE), ``io`` and ``cli``.
"""

__version__ = "0.1.0"

from .states import (
    DephasingParams,
    Family,
    InterferometerParams,
    NO_DEPHASING,
    StateFamily,
    mean_photons,
    alpha_from_mean_photons,
)
from .fisher_q import qfi, qfi_numeric_oracle
from .measure import Scheme, sample
from .fisher_c import cfi, cfi_counting, cfi_homodyne, crb, mle, mle_campaign, precision_sweep, sql

__all__ = [
    "__version__",
    "DephasingParams",
    "Family",
    "InterferometerParams",
    "NO_DEPHASING",
    "StateFamily",
    "Scheme",
    "alpha_from_mean_photons",
    "cfi",
    "cfi_counting",
    "cfi_homodyne",
    "crb",
    "mean_photons",
    "mle",
    "mle_campaign",
    "precision_sweep",
    "qfi",
    "qfi_numeric_oracle",
    "sample",
    "sql",
]
