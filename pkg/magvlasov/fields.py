# fields.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

# Cell-centred grids, cloud-in-cell deposition and its adjoint
# interpolation, the free-space Poisson solve E = -grad K3 * rho (K3 being
# the Newtonian kernel 1/(4 pi |x|)), and the L^p / weak L^q norms every
# estimate in the harness is expressed in.

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
import scipy.fft

from magvlasov.errors import ExponentError, GridBudgetError, OutOfDomainError

log = logging.getLogger('magvlasov.fields')

# default memory ceiling for the doubled-grid convolution, in bytes
DEFAULT_BUDGET_BYTES = 2 * 1024 ** 3

# rough number of bytes held per doubled-grid cell while solving (padded
# density, three kernel spectra, one density spectrum, one product)
_BYTES_PER_DOUBLED_CELL = 8 + 3 * 8 + 5 * 8


def _triple(value, kind, name):
    try:
        items = tuple(kind(c) for c in value)
    except TypeError:
        items = (kind(value),) * 3
    if len(items) != 3:
        raise ValueError('{} needs three components, got {!r}'.format(name, value))
    return items


@dataclass(frozen=True)
class GridSpec:
    """\
    Uniform Cartesian mesh of cells, described by the corner `origin`, the
    physical `extent` along each axis and the number of `cells` per axis.
    Field values live at cell centres.
    """
    origin: Tuple[float, float, float]
    extent: Tuple[float, float, float]
    cells: Tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, 'origin', _triple(self.origin, float, 'origin'))
        object.__setattr__(self, 'extent', _triple(self.extent, float, 'extent'))
        object.__setattr__(self, 'cells', _triple(self.cells, int, 'cells'))
        if any(n < 2 for n in self.cells):
            raise ValueError('a grid needs at least 2 cells per axis, got {}'.format(self.cells))
        if any(not (e > 0) or not math.isfinite(e) for e in self.extent):
            raise ValueError('grid extents must be positive, got {}'.format(self.extent))
        if any(not math.isfinite(o) for o in self.origin):
            raise ValueError('grid origin must be finite, got {}'.format(self.origin))

    @classmethod
    def cube(cls, half_width, cells, centre=(0.0, 0.0, 0.0)):
        """Cube of side 2*half_width centred on `centre`, `cells` cells per axis."""
        centre = _triple(centre, float, 'centre')
        return cls(origin=tuple(c - half_width for c in centre),
                   extent=(2.0 * half_width,) * 3,
                   cells=_triple(cells, int, 'cells'))

    @property
    def shape(self):
        return self.cells

    @property
    def h(self):
        return tuple(e / n for e, n in zip(self.extent, self.cells))

    @property
    def cell_volume(self):
        h = self.h
        return h[0] * h[1] * h[2]

    @property
    def size(self):
        return self.cells[0] * self.cells[1] * self.cells[2]

    def axis_centres(self, axis):
        return self.origin[axis] + (np.arange(self.cells[axis]) + 0.5) * self.h[axis]

    def centres(self):
        """(n1, n2, n3, 3) array of cell-centre coordinates."""
        axes = [self.axis_centres(a) for a in range(3)]
        return np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1)

    def contains(self, positions):
        """Mask of the positions inside the interpolation region."""
        xi = self._fractional(positions)
        upper = np.asarray(self.cells, dtype=np.float64) - 1.0
        return np.all((xi >= 0.0) & (xi <= upper), axis=-1)

    def _fractional(self, positions):
        positions = np.asarray(positions, dtype=np.float64)
        return (positions - np.asarray(self.origin)) / np.asarray(self.h) - 0.5


@dataclass
class ScalarField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ValueError('scalar field of shape {} on grid {}'.format(self.values.shape, self.grid.shape))

    def integral(self):
        return float(self.values.sum() * self.grid.cell_volume)

    def magnitude(self):
        return np.abs(self.values)

    def __add__(self, other):
        return ScalarField(self.grid, self.values + other.values)

    def __mul__(self, factor):
        return ScalarField(self.grid, self.values * factor)

    __rmul__ = __mul__


@dataclass
class VectorField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape + (3,):
            raise ValueError('vector field of shape {} on grid {}'.format(self.values.shape, self.grid.shape))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape + (3,)))

    def magnitude(self):
        return np.sqrt(np.einsum('...i,...i->...', self.values, self.values))

    def component(self, axis):
        return ScalarField(self.grid, self.values[..., axis])

    def __add__(self, other):
        return VectorField(self.grid, self.values + other.values)

    def __mul__(self, factor):
        return VectorField(self.grid, self.values * factor)

    __rmul__ = __mul__


# - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - -
# cloud-in-cell

def _cic_stencil(positions, grid):
    """\
    Returns (flat corner indices, corner weights), each of shape (N, 8),
    for trilinear weighting between the eight surrounding cell centres.
    """
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    xi = grid._fractional(positions)
    upper = np.asarray(grid.cells, dtype=np.float64) - 1.0
    inside = np.all((xi >= 0.0) & (xi <= upper), axis=1)
    if not inside.all():
        bad = int(np.argmin(inside))
        raise OutOfDomainError(bad, positions[bad])
    base = np.minimum(np.floor(xi).astype(np.intp), np.asarray(grid.cells) - 2)
    frac = xi - base
    indices = np.empty((positions.shape[0], 8), dtype=np.intp)
    weights = np.empty((positions.shape[0], 8), dtype=np.float64)
    corner = 0
    for dx in (0, 1):
        wx = frac[:, 0] if dx else 1.0 - frac[:, 0]
        for dy in (0, 1):
            wy = frac[:, 1] if dy else 1.0 - frac[:, 1]
            for dz in (0, 1):
                wz = frac[:, 2] if dz else 1.0 - frac[:, 2]
                indices[:, corner] = np.ravel_multi_index(
                    (base[:, 0] + dx, base[:, 1] + dy, base[:, 2] + dz), grid.cells)
                weights[:, corner] = wx * wy * wz
                corner += 1
    return indices, weights


def _deposit_chunk(positions, charges, grid):
    indices, weights = _cic_stencil(positions, grid)
    ncells = grid.size
    if charges.ndim == 1:
        return np.bincount(indices.ravel(), weights=(weights * charges[:, None]).ravel(),
                           minlength=ncells)
    out = np.empty((ncells, charges.shape[1]))
    for k in range(charges.shape[1]):
        out[:, k] = np.bincount(indices.ravel(), weights=(weights * charges[:, k:k + 1]).ravel(),
                                minlength=ncells)
    return out


def deposit(positions, charges, grid, workers=1, deterministic=True):
    """\
    Deposits per-particle `charges` (shape (N,) or (N, k)) onto the grid with
    trilinear weights and returns the density array (cell sums divided by
    the cell volume), of shape grid.shape or grid.shape + (k,).

    With workers > 1 the particles are split into contiguous chunks which
    are accumulated on a thread pool. In deterministic mode the partial
    grids are summed in chunk order, so the result does not depend on
    scheduling; otherwise they are summed as they complete.
    """
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    charges = np.asarray(charges, dtype=np.float64)
    if charges.shape[0] != positions.shape[0]:
        raise ValueError('{} charges for {} positions'.format(charges.shape[0], positions.shape[0]))
    n = positions.shape[0]
    workers = max(1, int(workers or 1))
    if workers == 1 or n < 2 * workers:
        total = _deposit_chunk(positions, charges, grid)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(np.intp)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_deposit_chunk, positions[lo:hi], charges[lo:hi], grid)
                       for lo, hi in zip(bounds[:-1], bounds[1:])]
            ordered = futures if deterministic else as_completed(futures)
            total = None
            for future in ordered:
                part = future.result()
                total = part if total is None else total + part
    trailing = charges.shape[1:]
    return total.reshape(grid.shape + trailing) / grid.cell_volume


def deposit_density(ensemble, grid, workers=1, deterministic=True):
    """Charge density rho of the ensemble on `grid` (cloud-in-cell)."""
    values = deposit(ensemble.positions, ensemble.weights, grid,
                     workers=workers, deterministic=deterministic)
    return ScalarField(grid, values)


def interpolate_field(field, positions):
    """\
    Samples a ScalarField or VectorField at arbitrary positions with the same
    trilinear weights the deposition uses, so a lone particle feels no force
    from its own charge.
    """
    grid = field.grid
    indices, weights = _cic_stencil(positions, grid)
    values = field.values.reshape((grid.size,) + field.values.shape[3:])
    if values.ndim == 1:
        return np.einsum('nc,nc->n', values[indices], weights)
    return np.einsum('nck,nc->nk', values[indices], weights)


# - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - -
# free-space Poisson solve

def solve_memory_estimate(grid):
    """Bytes the doubled-grid convolution will hold at peak (approximate)."""
    return 8 * grid.size * _BYTES_PER_DOUBLED_CELL


@lru_cache(maxsize=8)
def _kernel_spectra(cells, h, workers):
    # grad-kernel x / (4 pi |x|^3) sampled at cell-centre offsets of the
    # doubled grid in wrap-around order; the self cell holds the cell
    # average of the odd kernel, which is 0
    doubled = tuple(2 * n for n in cells)
    offsets = []
    for n, m, step in zip(cells, doubled, h):
        index = np.arange(m)
        offsets.append(np.where(index < n, index, index - m) * step)
    rx, ry, rz = np.meshgrid(*offsets, indexing='ij', sparse=True)
    r2 = rx * rx + ry * ry + rz * rz
    with np.errstate(divide='ignore', invalid='ignore'):
        inv_r3 = 1.0 / (4.0 * math.pi * r2 * np.sqrt(r2))
    inv_r3[0, 0, 0] = 0.0
    log.debug('built Poisson kernel spectra for cells=%s h=%s', cells, h)
    return tuple(scipy.fft.rfftn(np.broadcast_to(r * inv_r3, doubled), workers=workers)
                 for r in (rx, ry, rz))


def solve_field(rho, budget_bytes=DEFAULT_BUDGET_BYTES, workers=None):
    """\
    Electric field of the charge density `rho` in free space, by the
    domain-doubling (Hockney-Eastwood) discrete convolution of rho with the
    sampled Coulomb kernel x / (4 pi |x|^3). Linear in rho; the field of a
    compact charge decays like 1/|x|^2 away from it.

    Raises GridBudgetError when the doubled grid would exceed `budget_bytes`.
    """
    grid = rho.grid
    needed = solve_memory_estimate(grid)
    if budget_bytes is not None and needed > budget_bytes:
        raise GridBudgetError(
            'free-space solve on {} cells needs about {:.3g} GiB, budget is {:.3g} GiB'.format(
                grid.cells, needed / 1024 ** 3, budget_bytes / 1024 ** 3))
    workers = workers or 1
    spectra = _kernel_spectra(grid.cells, grid.h, workers)
    doubled = tuple(2 * n for n in grid.cells)
    rho_hat = scipy.fft.rfftn(rho.values, s=doubled, workers=workers)
    n1, n2, n3 = grid.cells
    values = np.empty(grid.shape + (3,))
    for axis, kernel_hat in enumerate(spectra):
        full = scipy.fft.irfftn(rho_hat * kernel_hat, s=doubled, workers=workers)
        values[..., axis] = full[:n1, :n2, :n3]
    values *= grid.cell_volume
    return VectorField(grid, values)


def divergence(field):
    """Centred-difference divergence of a VectorField (one-sided at the faces)."""
    h = field.grid.h
    total = np.zeros(field.grid.shape)
    for axis in range(3):
        total += np.gradient(field.values[..., axis], h[axis], axis=axis)
    return ScalarField(field.grid, total)


# - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - - -
# norms

def _magnitudes(field):
    return np.asarray(field.magnitude(), dtype=np.float64)


def lp_norm(field, p):
    """\
    Discrete L^p norm (sum |f|^p h^3)^(1/p) of a scalar field, or of the
    pointwise magnitude of a vector field. p = inf gives the largest
    magnitude.
    """
    p = float(p)
    if not p >= 1:
        raise ExponentError('lp_norm needs p >= 1, got {!r}'.format(p))
    mags = _magnitudes(field)
    if math.isinf(p):
        return float(mags.max()) if mags.size else 0.0
    if p == 1:
        return float(mags.sum() * field.grid.cell_volume)
    if p == 2:
        return float(math.sqrt(np.dot(mags.ravel(), mags.ravel()) * field.grid.cell_volume))
    peak = mags.max()
    if peak == 0:
        return 0.0
    # scaled to keep |f|^p representable
    scaled = mags / peak
    return float(peak * (np.sum(scaled ** p) * field.grid.cell_volume) ** (1.0 / p))


def weak_lq_norm(field, q):
    """\
    Weak L^q norm sup_A |A|^(-1/q') int_A |f| over unions of grid cells,
    q' being the conjugate exponent. For a fixed number of cells the
    integral is largest on a superlevel set, so the supremum is found
    exactly by sorting cell magnitudes in decreasing order (ties kept in
    cell index order) and scanning the prefix sums.
    """
    q = float(q)
    if not q > 1:
        raise ExponentError('weak_lq_norm needs q > 1, got {!r}'.format(q))
    mags = _magnitudes(field).ravel()
    if mags.size == 0:
        return 0.0
    order = np.argsort(-mags, kind='stable')
    cell = field.grid.cell_volume
    prefix = np.cumsum(mags[order]) * cell
    measure = np.arange(1, mags.size + 1) * cell
    exponent = 1.0 - 1.0 / q
    return float(np.max(prefix * measure ** (-exponent)))


def energy(ensemble, e=None):
    """\
    Total energy: kinetic part 1/2 sum w |v|^2 plus field part 1/2 int |E|^2.
    `e` may be None, meaning no field.
    """
    v = np.asarray(ensemble.velocities, dtype=np.float64)
    w = np.asarray(ensemble.weights, dtype=np.float64)
    kinetic = 0.5 * float(np.dot(w, np.einsum('ni,ni->n', v, v))) if w.size else 0.0
    if e is None:
        return kinetic
    return kinetic + 0.5 * lp_norm(e, 2) ** 2
