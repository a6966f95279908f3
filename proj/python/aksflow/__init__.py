from ._aksflow import *  # noqa: F401,F403
from ._aksflow import __doc__  # noqa: F401
