import math
import os
from dataclasses import replace

import numpy as np
import pytest

from magvlasov.cache import RunHistory
from magvlasov.config import parse_config
from magvlasov.ensemble import DistributionSpec, RunConfig, run
from magvlasov.errors import MissingHistoryError, SingularTimeError
from magvlasov.fields import GridSpec
from magvlasov.harness.representation import (evaluation_grid, history_config, representation_mismatch,
                                              verify_representation)


def _config(**changes):
    spec = DistributionSpec(width=0.3, velocity_cutoff=1.0, mass=changes.pop('mass', 1.0))
    config = RunConfig(distribution=spec, n=500, grid=GridSpec.cube(4.0, 16), t_end=math.pi / 2,
                       record_history=True)
    return replace(config, **changes)


def _history(**changes):
    return run(_config(**changes)).history


def test_evaluation_grid():
    grid = GridSpec.cube(4.0, 32)
    coarse = evaluation_grid(grid, 8)
    assert coarse.cells == (8, 8, 8)
    assert coarse.origin == grid.origin and coarse.extent == grid.extent


def test_history_config_nests_quadrature_nodes():
    config = _config()
    fine = history_config(config, math.pi / 2, 64)
    assert fine.dt == pytest.approx(math.pi / 128)
    assert fine.t_end == math.pi / 2 and fine.record_history and fine.history_every == 1
    # never coarser than the configured step
    coarse = history_config(config, math.pi / 2, 16)
    assert coarse.dt <= config.dt
    assert (math.pi / 2) / coarse.dt == pytest.approx(32)


def test_free_motion_is_represented_exactly():
    history = _history(field_mode='none')
    grid = evaluation_grid(GridSpec.cube(4.0, 16), 16)
    assert representation_mismatch(history, math.pi / 2, grid) < 1e-10
    report = verify_representation(history, math.pi / 2, grid, quadrature=16)
    assert report.passed, report.record()
    assert 'mismatch_q4' in report.fitted_constants
    # nothing left for the quadrature to resolve
    assert report.fitted_constants['step_q16'] < 1e-10
    assert 'ratio_q16' not in report.fitted_constants


def test_frozen_field_quadrature_error_shrinks():
    config = history_config(_config(field_mode='frozen', mass=0.05), math.pi / 2, 24)
    history = run(config).history
    assert len(history) == 49
    grid = evaluation_grid(GridSpec.cube(4.0, 16), 16)
    report = verify_representation(history, math.pi / 2, grid, quadrature=24)
    assert report.passed, report.record()
    assert report.fitted_constants['ratio_q24'] >= 1.5
    assert report.fitted_constants['step_q24'] < report.fitted_constants['step_q12']


def _alternating_history(quadrature=24):
    # static charges under a field that flips sign every stored step
    rng = np.random.default_rng(3)
    positions = rng.uniform(-1.0, 1.0, size=(20, 3))
    history = RunHistory(weights=np.full(20, 0.05), omega=1.0)
    t = math.pi / 2
    for i, s in enumerate(np.linspace(0.0, t, quadrature + 1)):
        e = np.tile([0.1, 0.0, 0.3], (20, 1)) * (1.0 if i % 2 == 0 else -1.0)
        history.append(s, positions, np.zeros_like(positions), e)
    return history, t


def test_quadrature_that_stops_converging_fails():
    history, t = _alternating_history()
    grid = evaluation_grid(GridSpec.cube(4.0, 16), 16)
    report = verify_representation(history, t, grid, quadrature=24, tol=1e3)
    assert not report.passed
    assert report.fitted_constants['ratio_q24'] < 1.5
    assert any('shrank by less than' in note for note in report.notes)


def test_missing_or_singular():
    grid = GridSpec.cube(4.0, 8)
    with pytest.raises(MissingHistoryError):
        verify_representation(RunHistory(weights=[1.0], omega=1.0), 1.0, grid)
    with pytest.raises(MissingHistoryError):
        verify_representation(None, 1.0, grid)
    history = _history(field_mode='none', t_end=0.5)
    with pytest.raises(SingularTimeError):
        verify_representation(history, 2 * math.pi, grid)
    with pytest.raises(MissingHistoryError):
        verify_representation(history, 0.3, grid)


@pytest.mark.slow
def test_reference_frozen_field_at_64_steps():
    reference = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs', 'reference.ini')
    # fewer markers keep the stored history small
    config = parse_config(reference, ['field.mode=frozen', 'run.n=20000'])
    h = config.harness
    assert h.quadrature_steps == 64 and h.eval_cells == 16
    t = h.representation_fraction * config.mag.t_omega
    history = run(history_config(config.run, t, h.quadrature_steps)).history
    assert len(history) == 65
    grid = evaluation_grid(config.run.grid, h.eval_cells)
    report = verify_representation(history, t, grid, h.quadrature_steps, h.representation_tol)
    assert report.passed, report.record()
    assert report.fitted_constants['mismatch'] <= 0.1
    assert report.fitted_constants['ratio_q64'] >= 1.5
