"""Numerical laboratory for averaging and total stability of difference equations."""

from .averaging import AverageEstimate, averaged_field, cesaro_average, estimate_average, uniformity_gap
from .dynamics import (
    PeriodicOrbit,
    ScaleMode,
    Trajectory,
    find_periodic_orbit,
    is_stable,
    iterate,
    orbit_multipliers,
    period_map,
)
from .fields import AveragedField, Domain, TimeField, eval_field, field_from_spec, residual_field
from .genetics import (
    SelectionParams,
    averaged_selection_rhs,
    selection_equilibrium,
    selection_experiment,
    selection_rhs,
)
from .norms import (
    gronwall_envelope,
    lemma_check,
    quantize_to_net,
    window_abs_norm,
    window_sum_norm,
)
from .stability import (
    TheoremReport,
    averaging_closeness_sweep,
    choose_window,
    estimate_uas,
    total_stability_check,
    vanishing_rhs_sweep,
)

__version__ = "0.1.0"
