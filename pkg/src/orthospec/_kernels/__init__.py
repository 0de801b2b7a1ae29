"""Hot numerical kernels.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``ORTHOSPEC_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the NumPy implementation is used.  ``BACKEND`` names the
active one.
"""

import os

from . import _pykernels as python

_force_python = os.environ.get("ORTHOSPEC_PURE_PYTHON", "") not in ("", "0")

compiled = None
if not _force_python:
    try:
        from . import _ckernels as compiled
    except ImportError:
        compiled = None

_active = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "python"

kir_scaled_many = _active.kir_scaled_many
knu_scaled_many = _active.knu_scaled_many

__all__ = ["BACKEND", "compiled", "python", "kir_scaled_many", "knu_scaled_many"]
