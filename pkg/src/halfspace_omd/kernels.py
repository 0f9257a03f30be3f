"""Backend selection for the hot kernels.

Set ``HALFSPACE_OMD_BACKEND=numpy`` to force the pure-numpy path; the default
is ``numba`` when it imports cleanly.  Both modules expose the same functions,
and ``get_backend(name)`` returns either one explicitly (used by the
cross-checking tests and the benchmark).
"""

import importlib
import logging
import os

log = logging.getLogger(__name__)

ENV_FLAG = "HALFSPACE_OMD_BACKEND"

_MODULES = {
    "numpy": "halfspace_omd._kernels_numpy",
    "numba": "halfspace_omd._kernels_numba",
}


def get_backend(name):
    if name not in _MODULES:
        raise ValueError(f"unknown kernel backend {name!r}; expected one of {sorted(_MODULES)}")
    return importlib.import_module(_MODULES[name])


def _select():
    wanted = os.environ.get(ENV_FLAG, "numba").strip().lower() or "numba"
    if wanted == "numba":
        try:
            return "numba", get_backend("numba")
        except ImportError:  # pragma: no cover - numba is a hard dependency
            log.warning("numba unavailable, falling back to numpy kernels")
            return "numpy", get_backend("numpy")
    return wanted, get_backend(wanted)


BACKEND, _impl = _select()

pnorm = _impl.pnorm
grad_phi = _impl.grad_phi
grad_phi_star = _impl.grad_phi_star
band_first = _impl.band_first
hash_uniform = _impl.hash_uniform
solve_shifted = _impl.solve_shifted
dykstra = _impl.dykstra
mirror_polish = _impl.mirror_polish
