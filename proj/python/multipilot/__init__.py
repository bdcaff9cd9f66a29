"""Multi-pilot teleoperation simulator: Kalman command fusion, delayed
channels, DDPG restoration and arbitration, and fuzzy force estimation."""

from ._multipilot import *  # noqa: F401,F403
from ._multipilot import __version__  # noqa: F401
