"""Asymptotic stability of the scalar linear DDE with distributed delay.

The heavy lifting lives in the compiled extension ``delaystab._core``; this
package re-exports its public names.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
