"""Backend selection for the hot kernels.

The compiled extension is used when it imports; set ``HDBF_PURE_PYTHON=1`` to
force the numpy fallback. ``BACKEND`` names the active one.
"""
import os

from . import _fallback

_compiled = None
if os.environ.get("HDBF_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

if _compiled is not None:
    BACKEND = "compiled"
    gram = _compiled.gram
    quadratic_forms = _compiled.quadratic_forms
else:
    BACKEND = "python"
    gram = _fallback.gram
    quadratic_forms = _fallback.quadratic_forms

__all__ = ["BACKEND", "gram", "quadratic_forms"]
