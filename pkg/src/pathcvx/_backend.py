"""Hot-kernel backend selection.

The compiled Cython extension is preferred; the numpy fallback keeps the
package fully functional without a compiler.  Set PATHCVX_PURE_PYTHON=1 to
force the fallback (used by the backend-equivalence tests and benchmarks).
"""

import os

if os.environ.get("PATHCVX_PURE_PYTHON", "") == "1":
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl
        BACKEND = "python"

rowsum_orient = _impl.rowsum_orient
broadcast_orient = _impl.broadcast_orient
cone_prox = _impl.cone_prox
cone_violation = _impl.cone_violation
soft_threshold = _impl.soft_threshold
oracle_loop = _impl.oracle_loop
