"""Kernel selection: compiled extension when available, pure Python otherwise.

Set IPSFORGE_KERNEL=python to force the fallback (used by the benchmark
to compare both implementations on one interpreter).
"""

import os

from ipsforge import _core_py

if os.environ.get("IPSFORGE_KERNEL", "").lower() == "python":
    _impl = _core_py
else:
    try:
        from ipsforge import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _core_py

IMPL = _impl.IMPL

poly_mul = _impl.poly_mul
poly_addmul = _impl.poly_addmul
poly_eval = _impl.poly_eval
prog_eval = _impl.prog_eval
common_roots = _impl.common_roots
unit_propagate = _impl.unit_propagate
sat_first = _impl.sat_first
sat_count = _impl.sat_count
sat_all = _impl.sat_all
