"""Backend selection for the hot loops.

The compiled extension is preferred. Set ``RRKRYLOV_PURE_PYTHON=1`` to force
the numpy fallback (useful for debugging and for the benchmark).
"""

import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

python_backend = _pykernels
compiled_backend = None

try:
    from . import _ckernels as compiled_backend
except ImportError:  # extension not built
    log.debug("compiled kernels unavailable; using numpy fallback")

if compiled_backend is not None and os.environ.get("RRKRYLOV_PURE_PYTHON", "") not in ("1", "true"):
    backend = compiled_backend
else:
    backend = python_backend

BACKEND = backend.NAME

csr_matvec = backend.csr_matvec
csr_rmatvec = backend.csr_rmatvec
nrssor_sweeps = backend.nrssor_sweeps
mgs_project = backend.mgs_project
