"""Recognizer selection: the compiled kernel when available, else pure Python.

Set ``MCC_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _earley_py

if os.environ.get("MCC_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _earley as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
recognize = _compiled.recognize if _compiled is not None else _earley_py.recognize
recognize_python = _earley_py.recognize
recognize_compiled = _compiled.recognize if _compiled is not None else None
