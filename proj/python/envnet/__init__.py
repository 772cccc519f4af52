"""Mono-molecular reaction networks driven by a stochastic environment."""

try:
    from ._envnet import *  # noqa: F401,F403
    from ._envnet import __doc__  # noqa: F401
except ImportError:  # build-tree layout: extension next to the package
    from _envnet import *  # noqa: F401,F403
