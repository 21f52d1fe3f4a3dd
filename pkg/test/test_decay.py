import math
from dataclasses import replace

import numpy as np
import pytest

from magvlasov.ensemble import DistributionSpec, RunConfig, run
from magvlasov.errors import MissingHistoryError
from magvlasov.fields import GridSpec
from magvlasov.harness.decay import fit_profile_constant, power_profile, verify_decay_envelope


def _run(**changes):
    spec = DistributionSpec(width=0.3, velocity_cutoff=1.0)
    config = RunConfig(distribution=spec, n=200, grid=GridSpec.cube(4.0, 16), t_end=math.pi / 2,
                       record_phase_space=True)
    return run(replace(config, **changes))


def test_profile():
    h = power_profile(2.0, 4.0)
    assert h(0.0) == 2.0
    assert h(1.0) == pytest.approx(2.0 / 16.0)
    tags = np.array([1.0, 0.5])
    speeds = np.array([0.0, 1.0])
    c = fit_profile_constant(tags, speeds, 4.0)
    assert c == pytest.approx(8.0)
    assert np.all(tags <= power_profile(c, 4.0)(speeds))


def test_free_run():
    report = verify_decay_envelope(_run(field_mode='none'))
    assert report.passed, report.record()
    assert report.fitted_constants['A_T'] == 0.0


def test_self_consistent_run():
    result = _run()
    report = verify_decay_envelope(result, alpha=6.0)
    assert report.passed, report.record()
    assert report.fitted_constants['A_T'] >= result.field_sup
    assert report.fitted_constants['violations'] == 0.0


def test_too_tight_profile_fails():
    report = verify_decay_envelope(_run(field_mode='none'), h=lambda r: np.zeros_like(r))
    assert not report.passed
    assert math.isnan(report.fitted_constants.get('c', math.nan))


def test_needs_phase_space():
    with pytest.raises(MissingHistoryError):
        verify_decay_envelope(_run(field_mode='none', record_phase_space=False))
