"""Backend selection for the hot stencil kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation takes over. Set ``IBSH_PURE_PYTHON=1`` to force the
fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("IBSH_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None
    else:
        _impl = _compiled
        BACKEND = "cython"
else:
    _compiled = None

nonlinear_rhs = _impl.nonlinear_rhs
full_rhs = _impl.full_rhs
godunov_update = _impl.godunov_update


def backends():
    """Available ``{name: module}`` pairs, fallback first."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out
