"""Minimum output entropy of the amplitude-damping + dephasing bosonic channel."""

__version__ = "0.1.0"

from .channel import (KrausSet, ParameterRangeError, StepBudgetExceeded, apply_amplitude_damping, apply_dephasing,
                      apply_kraus, build_kraus, decay_fraction, dephasing_rate, propagate_closed_form,
                      propagate_ode)
from .entropy import (CrossingCurve, EntropyRecord, SearchReport, binomial_m1_entropy, crossing_curve,
                      dimension_bound, entropy_sweep, kappa_output_entropy, kappa_output_spectrum,
                      random_search, shannon_entropy, t_star_closed_form, von_neumann_entropy)
from .fock import (ChannelParams, DensityMatrix, PureState, ValidationError, mean_energy, pure_to_density,
                   validate)
from .states import (BinomialParams, KappaParams, SamplerConfig, SamplingError, best_binomial, binomial_state,
                     kappa0, kappa_state, sample_constrained_pure)
