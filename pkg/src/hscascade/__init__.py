"""Hierarchical-symmetry analysis of multiplicative cascades.

Exponent algebra, log-Poisson generators, Monte Carlo cascade
simulation, symmetry fitting and classification, moment/transport
stability bounds, and the multifractal spectrum.
"""

from .exponents import (
    CascadeParams,
    DeltaSeries,
    ScalingLaw,
    a1_step,
    conservation_gamma,
    delta,
    law_from_deltas,
    spectrum_width,
    zeta,
)
from .generators import (
    LevyGenerator,
    LogPoissonParams,
    StableTail,
    carleman_partial_sum,
    delta_series_analytic,
    determinacy_verdict,
    ln_moment,
    logpoisson_from_scaling,
    normalize_mean_one,
    sample_logW,
)

__version__ = "0.1.0"
