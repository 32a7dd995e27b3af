"""Eve's side: attacks, conditional probe states, eta basis and parity bounds."""
from .attacks import *  # noqa: F401,F403
from .conditional import *  # noqa: F401,F403
from .parity import *  # noqa: F401,F403
from . import attacks, conditional, parity  # noqa: F401
