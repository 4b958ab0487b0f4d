"""contnet: finite-pmf information measures, continuous-to-discrete transformation,
and achievable rate regions for multiterminal source/channel networks."""

__version__ = "0.1.0"

from contnet.pmf import Axis, JointPmf
from contnet.grids import ClipSpec, GridSpec, SmoothSpec

__all__ = ["Axis", "JointPmf", "ClipSpec", "GridSpec", "SmoothSpec", "__version__"]
