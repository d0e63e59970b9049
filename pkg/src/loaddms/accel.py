"""Numba acceleration switch.

Hot kernels (tree building, SMO, Q-learning episode loops) exist in two
variants: a numba @njit version and a pure-numpy fallback.  The fallback is
selected by setting the environment variable ``LOADDMS_NO_NUMBA=1`` (or
automatically when numba is not importable).  Both variants are written to
produce bit-identical results; ``benchmarks/bench_accel.py`` compares their
speed.
"""

import logging
import os

log = logging.getLogger(__name__)

ENV_FLAG = "LOADDMS_NO_NUMBA"


def _resolve_numba() -> bool:
    if os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        log.warning("numba not importable, falling back to pure-numpy kernels")
        return False
    return True


USE_NUMBA = _resolve_numba()

if USE_NUMBA:
    from numba import njit
else:
    def njit(*args, **kwargs):
        """Identity decorator used when numba is disabled."""
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap
