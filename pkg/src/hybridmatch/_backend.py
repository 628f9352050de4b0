"""Backend selection: compiled extension if available, numpy otherwise.

Set ``HYBRIDMATCH_BACKEND=numpy`` or ``=compiled`` to force a choice
(``compiled`` raises if the extension is missing).
"""

import os

from . import _reference

_choice = os.environ.get("HYBRIDMATCH_BACKEND", "auto").lower()

if _choice == "numpy":
    _impl = _reference
elif _choice in ("auto", "compiled"):
    try:
        from . import _core as _impl
    except ImportError:
        if _choice == "compiled":
            raise
        _impl = _reference
else:
    raise ValueError(f"unknown HYBRIDMATCH_BACKEND {_choice!r}")


def backend_name():
    """'compiled' when the Cython core is active, else 'numpy'."""
    return "compiled" if _impl.__name__.endswith("_core") else "numpy"


gram_apply = _impl.gram_apply
gram_self_vjp = _impl.gram_self_vjp
varifold_inner = _impl.varifold_inner
varifold_grad_first = _impl.varifold_grad_first
