# __init__.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details

__magvlasov_version__ = [0, 1, 0] # major, minor, patch
__version_str__ = "v%d.%d.%d" % \
    (__magvlasov_version__[0], __magvlasov_version__[1], __magvlasov_version__[2])

from magvlasov.errors import MagVlasovError
from magvlasov.kinematics import MagneticConfig, flow, kernel_d, kernel_h, xstar
from magvlasov.fields import GridSpec, ScalarField, VectorField, deposit_density, solve_field
from magvlasov.ensemble import DistributionSpec, ParticleEnsemble, RunConfig, run, sample_initial
from magvlasov.config import parse_config
import magvlasov.utils as utils
