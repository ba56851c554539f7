"""Tree-construction kernels: compiled core with a pure-Python fallback.

The boosted-tree split search dominates training time, so it is implemented
twice: a Cython extension (``_tree_cy``) and a numpy fallback (``tree_py``)
with bit-identical arithmetic. The compiled backend is selected at import
when available; set ``GNNFLOW_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("GNNFLOW_PURE_PYTHON", "0") not in ("", "0"):
    from . import tree_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _tree_cy as _impl

        BACKEND = "cython"
    except ImportError:
        from . import tree_py as _impl

        BACKEND = "python"

build_tree = _impl.build_tree
