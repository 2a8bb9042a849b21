"""Kernel backend selection.

Imports the compiled kernels when available, otherwise the pure-Python twins.
Set WDYN_BACKEND=python or WDYN_BACKEND=c to force a choice (forcing "c" when
the extension is missing raises, so CI can assert the build happened).
"""

import os

_forced = os.environ.get("WDYN_BACKEND", "").strip().lower()

if _forced == "python":
    from . import _kernels_py as kernels
elif _forced == "c":
    from . import _kernels_c as kernels  # type: ignore[no-redef]
else:
    try:
        from . import _kernels_c as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

K = kernels
BACKEND = kernels.BACKEND_NAME


def available_backends():
    """Names of importable kernel backends (for benchmarks and tests)."""
    names = ["python"]
    try:
        from . import _kernels_c  # noqa: F401

        names.append("c")
    except ImportError:
        pass
    return names
