"""Kernel backend selection.

The compiled Cython kernels are used when the extension built; otherwise
the pure-Python fallback takes over with identical semantics.  Set
BYZFOUNT_KERNEL=pure to force the fallback (benchmarks and parity tests
rely on this).
"""

import os

from . import pure

BACKEND = "pure"
impl = pure

if os.environ.get("BYZFOUNT_KERNEL", "").strip().lower() != "pure":
    try:
        from . import _gf2c as _compiled

        impl = _compiled
        BACKEND = "compiled"
    except ImportError:
        pass
