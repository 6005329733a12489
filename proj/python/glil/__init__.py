"""Sublinear expectations, the G-heat equation, its control dual and a LIL laboratory."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
