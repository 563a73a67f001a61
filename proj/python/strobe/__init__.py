"""Stroboscopic time-of-arrival simulator.

Thin package wrapper around the compiled extension; everything public
lives in ``_strobe_core``.
"""

try:
    from ._strobe_core import *  # noqa: F401,F403
    from ._strobe_core import __version__  # noqa: F401
except ImportError:  # in-tree runs put the extension next to the package dir
    from _strobe_core import *  # noqa: F401,F403
    from _strobe_core import __version__  # noqa: F401
