# cache.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

# Run history: particle states and the field each particle felt, stored at
# the quadrature times the representation check integrates over. A history
# can be pickled next to a run and loaded back later, provided the package
# version and the configuration key it was produced under still match.

import logging
import pickle
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from magvlasov.errors import MissingHistoryError

log = logging.getLogger('magvlasov.cache')


@dataclass
class HistoryFrame:
    t: float
    positions: np.ndarray
    velocities: np.ndarray
    # E(t, x_i(t)) at every particle, shape (N, 3)
    e_at_particles: np.ndarray


@dataclass
class RunHistory:
    weights: np.ndarray
    omega: float
    frames: List[HistoryFrame] = field(default_factory=list)
    key: Optional[str] = None

    def append(self, t, positions, velocities, e_at_particles):
        if self.frames and t <= self.frames[-1].t:
            raise ValueError('history frames must be appended in increasing time order')
        self.frames.append(HistoryFrame(float(t), np.array(positions, dtype=np.float64),
                                        np.array(velocities, dtype=np.float64),
                                        np.array(e_at_particles, dtype=np.float64)))

    def __len__(self):
        return len(self.frames)

    def times(self):
        return np.array([f.t for f in self.frames])

    def frames_until(self, t, rtol=1e-9):
        """\
        Frames with time in [0, t]; the last one must sit at t (to `rtol`),
        otherwise MissingHistoryError is raised.
        """
        if not self.frames:
            raise MissingHistoryError('run history is empty (was record_history enabled?)')
        scale = max(abs(t), 1.0)
        selected = [f for f in self.frames if f.t <= t + rtol * scale]
        if not selected or abs(selected[-1].t - t) > rtol * scale:
            raise MissingHistoryError('no history frame stored at t = {!r} (stored: {} .. {})'.format(
                t, self.frames[0].t, self.frames[-1].t))
        if abs(selected[0].t) > rtol * scale:
            raise MissingHistoryError('run history does not start at t = 0')
        return selected

    def frame_at(self, t, rtol=1e-9):
        return self.frames_until(t, rtol)[-1]

    def save(self, path, version):
        """Pickles the history, tagged with the package `version` string."""
        with open(path, 'wb') as f:
            pickle.dump({'ver': version, 'key': self.key, 'history': self}, f, protocol=4)
        log.debug('saved run history (%d frames) to %s', len(self.frames), path)

    @classmethod
    def load(cls, path, version, key=None):
        """\
        Loads a pickled history. Returns None (and logs why) when the file
        can't be read or was written by another version or for another
        configuration key, so callers can fall back to re-running.
        """
        try:
            with open(path, 'rb') as f:
                cache = pickle.load(f)
        except (OSError, pickle.UnpicklingError, EOFError) as e:
            log.debug('could not load run history from %s: %s', path, e)
            return None
        if cache.get('ver') != version:
            log.debug('run history %s has version %r, expected %r', path, cache.get('ver'), version)
            return None
        if key is not None and cache.get('key') != key:
            log.debug('run history %s was recorded for another configuration', path)
            return None
        return cache['history']
