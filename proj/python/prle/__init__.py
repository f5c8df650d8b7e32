from ._prle import *  # noqa: F401,F403
from ._prle import __version__  # noqa: F401
