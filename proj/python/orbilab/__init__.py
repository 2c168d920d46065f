"""Numerical laboratory for orbital microstates of matrix tuples.

The compiled extension carries the actual operations; this package re-exports
them. Wheel builds place the extension inside the package, plain CMake builds
leave it next to it on sys.path.
"""

try:
    from ._orbilab import *  # noqa: F401,F403
    from ._orbilab import __doc__ as _core_doc
except ImportError:  # pragma: no cover - cmake build tree layout
    from _orbilab import *  # noqa: F401,F403
    from _orbilab import __doc__ as _core_doc

__doc__ = _core_doc or __doc__
__version__ = "0.1.0"
