"""Billiards in pseudo-Euclidean ellipsoids and Lorentz ovals."""

from ._core import *  # noqa: F401,F403
from ._core import PebillError

__all__ = [name for name in dir() if not name.startswith("_")]
