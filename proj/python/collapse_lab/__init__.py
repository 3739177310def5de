"""Collapse dynamics laboratory for the unconstrained features model.

Thin Python surface over the C++ core: exact risk and gradients, eigenspace
projections with closed forms, gradient descent / gradient flow simulation,
collapse metrics, and the sweep harness.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
__doc__ = _core_doc
