"""Kernel backend selection.

Prefers the compiled Cython extension and falls back to the pure
numpy/scipy implementation when it is missing.  Set
BULLHURST_FORCE_FALLBACK=1 to skip the extension (used by the benchmark
and the parity tests).
"""
import os

if os.environ.get("BULLHURST_FORCE_FALLBACK"):
    from . import pyfallback as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import pyfallback as _impl

        BACKEND = "python"

RULE_N_MINUS_1 = 0
RULE_FLOOR_N = 1

fdmaa_fluctuation_matrix = _impl.fdmaa_fluctuation_matrix
garch_sigma2 = _impl.garch_sigma2
garch_nll_grad = _impl.garch_nll_grad
