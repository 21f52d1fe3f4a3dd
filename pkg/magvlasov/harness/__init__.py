# __init__.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

from magvlasov.harness.report import EstimateReport, GronwallFit, write_report, write_summary
from magvlasov.harness.estimates import (select_t0, verify_field_estimates, verify_large_time_log,
                                         verify_small_time_bound, verify_t0_rule)
from magvlasov.harness.gronwall import fit_gronwall_envelope
from magvlasov.harness.inequalities import (probe_calderon_zygmund, probe_weak_young, verify_weak_product_bound,
                                            verify_moment_interpolation)
from magvlasov.harness.representation import verify_representation
from magvlasov.harness.stability import verify_stability_envelope
from magvlasov.harness.decay import verify_decay_envelope
from magvlasov.harness.density import verify_bounded_density_condition
