# snapshot.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

# Binary field snapshots. Layout (all little-endian):
#
#   offset  size  content
#        0     4  magic b'MVPS'
#        4     4  format version (u32), currently 1
#        8     4  components per cell (u32): 1 for rho, 3 for E
#       12    12  cells per axis (3 x u32)
#       24    24  grid origin (3 x f64)
#       48    24  grid extent (3 x f64)
#       72     8  simulation time t (f64)
#       80     -  cell data, f64, row-major over (i1, i2, i3[, component])

import logging
import struct

import numpy as np

from magvlasov.errors import SnapshotFormatError
from magvlasov.fields import GridSpec, ScalarField, VectorField

log = logging.getLogger('magvlasov.snapshot')

MAGIC = b'MVPS'
VERSION = 1
HEADER = struct.Struct('<4sII3I3d3dd')


def write_snapshot(path, field, t=0.0):
    """Writes a ScalarField or VectorField to `path`; returns the byte count."""
    components = 1 if isinstance(field, ScalarField) else 3
    grid = field.grid
    header = HEADER.pack(MAGIC, VERSION, components, *grid.cells, *grid.origin, *grid.extent, float(t))
    data = np.ascontiguousarray(field.values, dtype='<f8').tobytes()
    with open(path, 'wb') as f:
        f.write(header)
        f.write(data)
    log.debug('wrote snapshot %s (t=%r, %d components)', path, t, components)
    return len(header) + len(data)


def read_snapshot(path):
    """Returns (field, t) from a snapshot file."""
    with open(path, 'rb') as f:
        raw = f.read()
    if len(raw) < HEADER.size:
        raise SnapshotFormatError('{}: truncated header ({} bytes)'.format(path, len(raw)))
    fields = HEADER.unpack_from(raw)
    magic, version, components = fields[0], fields[1], fields[2]
    if magic != MAGIC:
        raise SnapshotFormatError('{}: bad magic {!r}'.format(path, magic))
    if version != VERSION:
        raise SnapshotFormatError('{}: unsupported version {}'.format(path, version))
    if components not in (1, 3):
        raise SnapshotFormatError('{}: bad component count {}'.format(path, components))
    cells, origin, extent, t = fields[3:6], fields[6:9], fields[9:12], fields[12]
    grid = GridSpec(origin=origin, extent=extent, cells=cells)
    count = grid.size * components
    expected = HEADER.size + 8 * count
    if len(raw) != expected:
        raise SnapshotFormatError('{}: expected {} bytes, found {}'.format(path, expected, len(raw)))
    values = np.frombuffer(raw, dtype='<f8', count=count, offset=HEADER.size).astype(np.float64)
    if components == 1:
        return ScalarField(grid, values.reshape(grid.shape)), t
    return VectorField(grid, values.reshape(grid.shape + (3,))), t
