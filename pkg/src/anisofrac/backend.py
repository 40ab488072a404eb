"""Hot-kernel backend selection: compiled extension with pure-NumPy fallback.

The compiled module is preferred when importable; set ANISOFRAC_PURE=1 to
force the NumPy implementation (used by the backend-comparison benchmark
and as the fallback when the extension was not built).
"""

import os

_force_pure = os.environ.get("ANISOFRAC_PURE", "").lower() in ("1", "true", "yes")

if not _force_pure:
    try:
        from ._fastkern import hat_gradient_table, unit_hat_gradient

        BACKEND = "compiled"
    except ImportError:
        from ._purekern import hat_gradient_table, unit_hat_gradient

        BACKEND = "pure"
else:
    from ._purekern import hat_gradient_table, unit_hat_gradient

    BACKEND = "pure"

__all__ = ["BACKEND", "hat_gradient_table", "unit_hat_gradient"]
