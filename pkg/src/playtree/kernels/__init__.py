"""Assignment kernel backend selection.

Prefers the compiled Cython extension; falls back to the pure-Python
implementation when the extension is missing or ``PLAYTREE_PURE_PYTHON=1``.
Both expose ``hungarian`` and ``batch_align`` with identical contracts.
"""

import os

if os.environ.get("PLAYTREE_PURE_PYTHON", "") == "1":
    from playtree.kernels import _fallback as _backend
else:
    try:
        from playtree.kernels import _assignment as _backend  # type: ignore
    except ImportError:
        from playtree.kernels import _fallback as _backend

hungarian = _backend.hungarian
batch_align = _backend.batch_align

BACKEND = "compiled" if _backend.__name__.endswith("_assignment") else "python"
