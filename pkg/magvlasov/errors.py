# errors.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

# Every exception raised on purpose by the library derives from
# MagVlasovError, so callers (and the command line front end) can catch the
# whole family in one go.


class MagVlasovError(Exception):
    """Base class for MagVlasov related exceptions."""


class ConfigError(MagVlasovError):
    """\
    Raised when a configuration file can't be parsed or an override is
    malformed. `line` and `column` are 1-based and None when unknown.
    """

    def __init__(self, message, line=None, column=None, path=None):
        self.line = line
        self.column = column
        self.path = path
        where = ''
        if path is not None:
            where = '{}:'.format(path)
        if line is not None:
            where += '{}:{}: '.format(line, column if column is not None else 1)
        elif where:
            where += ' '
        super(ConfigError, self).__init__(where + message)


class ValidationError(ConfigError):
    """A configuration parsed fine but breaks one of the run invariants."""

    def __init__(self, invariant, message):
        self.invariant = invariant
        super(ValidationError, self).__init__('{} ({})'.format(message, invariant))


class UnknownDistributionError(MagVlasovError, ValueError):
    """Initial distribution family name not recognised."""


class ExponentError(MagVlasovError, ValueError):
    """An exponent lies outside the range an operation is defined for."""


class OutOfDomainError(MagVlasovError):
    """A particle lies outside the interpolation region of the grid."""

    def __init__(self, index, position):
        self.index = int(index)
        self.position = tuple(float(c) for c in position)
        super(OutOfDomainError, self).__init__(
            'particle {} at ({:.6g}, {:.6g}, {:.6g}) is outside the grid'.format(
                self.index, *self.position))


class GridBudgetError(MagVlasovError):
    """The doubled grid needed by the free-space solver is too big (or too small)."""


class SingularTimeError(MagVlasovError, ValueError):
    """Evaluation requested at (or too close to) a multiple of the cyclotron period."""


class NonFiniteError(MagVlasovError, ArithmeticError):
    """A run produced NaN or infinite values."""

    def __init__(self, quantity, step, time):
        self.quantity = quantity
        self.step = step
        self.time = time
        super(NonFiniteError, self).__init__(
            'non-finite {} at step {} (t = {!r})'.format(quantity, step, time))


class MissingHistoryError(MagVlasovError):
    """A verifier needs stored run data that was not recorded."""


class EmptyWindowError(MagVlasovError):
    """A fitting window contains no samples."""


class OrderingError(MagVlasovError, ValueError):
    """Time arguments are given in the wrong order."""


class EnsembleMismatchError(MagVlasovError, ValueError):
    """Two ensembles (or trajectories) that must match in size do not."""


class SnapshotFormatError(MagVlasovError):
    """A snapshot file is truncated or has a bad header."""


class NonAnalyticFamilyError(MagVlasovError, ValueError):
    """The initial distribution family has no closed-form neighbourhood envelope."""
