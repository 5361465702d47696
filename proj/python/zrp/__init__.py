"""Inhomogeneous zero range process toolkit.

Thin wrapper around the compiled extension; the C++ CLI `zrp` drives the same
operations from the shell.
"""

try:
    from ._zrp import *  # noqa: F401,F403  (installed layout)
    from ._zrp import __doc__ as _doc
except ImportError:
    from _zrp import *  # noqa: F401,F403  (build-tree layout)
    from _zrp import __doc__ as _doc

__doc__ = _doc
