import math

import numpy as np
import pytest

from magvlasov.ensemble import DistributionSpec
from magvlasov.errors import NonAnalyticFamilyError
from magvlasov.harness.density import (envelope_integral, envelope_sup, spatial_extent,
                                       verify_bounded_density_condition)
from magvlasov.kinematics import MagneticConfig

UNIT = MagneticConfig(1.0)


def test_envelope_at_start_is_the_initial_density():
    spec = DistributionSpec(velocity_cutoff=math.inf)
    centre = np.zeros((1, 3))
    value = envelope_integral(spec, UNIT, 1.0, 0.0, centre, v_max=4.0, v_cells=32)[0]
    assert value == pytest.approx(spec.mass * float(spec.position_profile(0.0)), rel=1e-2)


def test_envelope_grows_with_field_bound():
    spec = DistributionSpec(family='compact-bump', radius=0.5, velocity_radius=1.0)
    points = np.array([[0.6, 0.0, 0.0]])
    small = envelope_integral(spec, UNIT, 0.1, 0.5, points)[0]
    large = envelope_integral(spec, UNIT, 1.0, 0.5, points)[0]
    assert large >= small > 0


def test_spatial_extent():
    assert spatial_extent(DistributionSpec(width=0.5, cutoff=4.0)) == 2.0
    assert spatial_extent(DistributionSpec(family='compact-bump', radius=0.7)) == 0.7


def test_condition_without_run():
    report = verify_bounded_density_condition(DistributionSpec(), UNIT, 0.5, t_points=3, x_cells=4, v_cells=12)
    assert report.passed, report.record()
    assert report.samples == 3 * 5 ** 3
    assert report.fitted_constants['envelope_sup'] > 0


def test_report_names_the_velocity_truncation():
    report = verify_bounded_density_condition(DistributionSpec(), UNIT, 0.5, t_points=2, x_cells=2, v_max=2.5,
                                              v_cells=8)
    assert 'int g dv truncated to the velocity cube [-2.5, 2.5]^3, not the full velocity space' in report.notes
    assert 'truncated' in report.record()


def test_condition_against_run_densities():
    spec = DistributionSpec(velocity_cutoff=math.inf)
    peak = spec.mass * float(spec.position_profile(0.0))
    report = verify_bounded_density_condition(spec, UNIT, 0.5, density_sup=[(0.0, peak)], x_cells=4,
                                              v_cells=12)
    assert report.passed, report.record()
    assert report.max_ratio == pytest.approx(1.0, rel=0.1)
    report = verify_bounded_density_condition(spec, UNIT, 0.5, density_sup=[(0.0, 10 * peak)], x_cells=4,
                                              v_cells=12)
    assert not report.passed


def test_two_stream_has_no_envelope():
    spec = DistributionSpec(family='two-stream')
    with pytest.raises(NonAnalyticFamilyError):
        verify_bounded_density_condition(spec, UNIT, 1.0)
    with pytest.raises(NonAnalyticFamilyError):
        envelope_sup(spec, UNIT, 1.0, 0.0, np.zeros((1, 3)))
