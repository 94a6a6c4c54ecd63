"""Exact photocounting statistics for multiphoton linear-optics interferometers.

Ideal output distributions come from matrix permanents; realistic detectors
(losses, on/off arrays, dead time) enter through their conditional count
probabilities P(k|m) and the correction coefficients prod_i P(k_i|k_i).
"""

from .detectors import (
    CondProbTable,
    DeadTimeExp,
    DeadTimeMono,
    IdealPNR,
    LossyPNR,
    OnOffArray,
    cond_prob,
    cond_prob_table,
    max_counts,
    pkk_deadtime_exp_analytic,
    pkm_array,
    pkm_deadtime_exp,
    pkm_deadtime_mono,
    pkm_lossy,
)
from .errors import (
    AccuracyError,
    BosonKitError,
    DomainError,
    ParameterError,
    ShapeError,
    SizeError,
    UnitarityError,
)
from .ideal import (
    OutcomeDistribution,
    enumerate_outcomes,
    fock_oracle_distribution,
    ideal_distribution,
    ideal_probability,
)
from .interferometer import (
    UnitaryMatrix,
    beam_splitter,
    dft_unitary,
    haar_random_unitary,
    load_matrix,
    save_matrix,
    validate_unitary,
)
from .montecarlo import pkm_mc_oracle
from .permanent import expanded_submatrix, permanent, permanent_naive
from .quadrature import QuadratureSpec
from .realistic import (
    CorrectionTable,
    correction_coefficient,
    correction_table,
    postselected_probability,
    postselection_efficiency,
    realistic_distribution,
    reduced_identifier,
)
from .sampling import SampleReport, chi_square_test, postselect, sample

__version__ = "0.1.0"
