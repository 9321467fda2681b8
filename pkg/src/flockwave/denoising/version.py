"""Version information for the Flockwave denoising package."""

__version_info__ = (1, 0, 0)
__version__ = ".".join("{0}".format(i) for i in __version_info__)
