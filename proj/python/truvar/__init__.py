"""Truncated variance reduction over finite GP domains."""

from truvar._core import *  # noqa: F401,F403
from truvar._core import __doc__  # noqa: F401

__version__ = "0.1.0"
