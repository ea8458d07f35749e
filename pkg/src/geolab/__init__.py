"""geolab: numerical laboratory for geodesics and convexity on timelike
graph hypersurfaces in Minkowski space, with dual-cone algebra and
orthogonal-splitting coefficient analysis."""

__version__ = "0.1.0"
