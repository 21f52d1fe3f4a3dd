# utils.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

import hashlib
import logging
import math
import os
import sys

# map log level names to constants. used by the command line front end
LOGGER_LEVELS = {
        'debug': logging.DEBUG,
        'info': logging.INFO,
        'warning': logging.WARNING,
        'error': logging.ERROR,
        }


def configure_logging(level='info', quiet=False, stream=None):
    """\
    Sets up the 'magvlasov' logger hierarchy. Only the command line front end
    calls this; library code just logs to its module logger.
    """
    if quiet:
        level = 'error'
    try:
        numeric = LOGGER_LEVELS[level]
    except KeyError:
        raise ValueError('unknown log level {!r}, expected one of {}'.format(
            level, ', '.join(sorted(LOGGER_LEVELS))))
    logger = logging.getLogger('magvlasov')
    logger.setLevel(numeric)
    for handler in list(logger.handlers):
        if getattr(handler, '_magvlasov', False):
            logger.removeHandler(handler)
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
    handler._magvlasov = True
    logger.addHandler(handler)
    logger.propagate = False
    return logger


def exponent_label(k):
    """\
    Column-name form of an exponent: 2 -> '2', 3.5 -> '3p5', inf -> 'inf'.
    """
    k = float(k)
    if math.isinf(k):
        return 'inf'
    if k == int(k):
        return str(int(k))
    return repr(k).replace('.', 'p')


def parse_exponent_label(label):
    """Inverse of exponent_label."""
    if label == 'inf':
        return math.inf
    return float(label.replace('p', '.'))


def format_float(x):
    """Shortest text that reads back as the same float."""
    return repr(float(x))


def sha256_file(path, blocksize=1 << 20):
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        while True:
            block = f.read(blocksize)
            if not block:
                break
            digest.update(block)
    return digest.hexdigest()


def write_manifest(directory, name='manifest.txt'):
    """\
    Lists every file below `directory` (other than the manifest itself) as
    '<sha256>  <relative path>' lines, sorted by path. Returns the manifest
    path.
    """
    entries = []
    for root, _dirs, files in os.walk(directory):
        for filename in files:
            full = os.path.join(root, filename)
            rel = os.path.relpath(full, directory)
            if rel == name:
                continue
            entries.append((rel.replace(os.sep, '/'), sha256_file(full)))
    manifest = os.path.join(directory, name)
    with open(manifest, 'w') as f:
        for rel, digest in sorted(entries):
            f.write('{}  {}\n'.format(digest, rel))
    return manifest


def read_manifest(path):
    """Returns {relative path: sha256} from a manifest file."""
    entries = {}
    with open(path) as f:
        for line in f:
            line = line.rstrip('\n')
            if not line:
                continue
            digest, rel = line.split('  ', 1)
            entries[rel] = digest
    return entries
