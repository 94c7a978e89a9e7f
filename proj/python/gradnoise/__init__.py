"""Rate and robustness of gradient methods under additive gradient noise."""

from gradnoise._core import *  # noqa: F401,F403
from gradnoise._core import GradnoiseError, __version__  # noqa: F401
