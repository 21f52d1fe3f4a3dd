import numpy as np
import pytest
from numpy.testing import assert_array_equal

from magvlasov.cache import RunHistory
from magvlasov.errors import MissingHistoryError


def _history():
    history = RunHistory(weights=np.full(3, 1.0 / 3), omega=1.0, key='abc')
    for t in (0.0, 0.5, 1.0):
        x = np.full((3, 3), t)
        history.append(t, x, -x, np.zeros((3, 3)))
    return history


def test_frames_until():
    history = _history()
    assert len(history) == 3
    assert [f.t for f in history.frames_until(0.5)] == [0.0, 0.5]
    assert history.frame_at(1.0).t == 1.0
    with pytest.raises(MissingHistoryError):
        history.frames_until(0.75)
    with pytest.raises(MissingHistoryError):
        RunHistory(weights=np.ones(1), omega=0.0).frames_until(0.0)


def test_frames_must_increase():
    history = _history()
    with pytest.raises(ValueError):
        history.append(0.5, np.zeros((3, 3)), np.zeros((3, 3)), np.zeros((3, 3)))


def test_save_and_load(tmp_path):
    path = str(tmp_path / 'history.pkl')
    history = _history()
    history.save(path, 'v0.1.0')
    loaded = RunHistory.load(path, 'v0.1.0', key='abc')
    assert_array_equal(loaded.times(), history.times())
    assert_array_equal(loaded.frames[1].positions, history.frames[1].positions)
    assert RunHistory.load(path, 'v0.2.0') is None
    assert RunHistory.load(path, 'v0.1.0', key='other') is None
    assert RunHistory.load(str(tmp_path / 'missing.pkl'), 'v0.1.0') is None
