"""Stencil kernels with a compiled core and a numpy fallback.

The backend is chosen once at import. Set ``MIXSIM_BACKEND`` to ``python``
to force the fallback or to ``compiled`` to fail loudly when the extension
is missing; the default ``auto`` prefers the compiled core.
"""
import logging
import os

from . import _pykernels

logger = logging.getLogger(__name__)

_NAMES = ("upwind_fluxes", "divergence", "convection", "strain_rates", "stress_divergence")


def _load(choice):
    if choice not in ("auto", "compiled", "python"):
        raise ImportError(f"MIXSIM_BACKEND must be auto, compiled or python, got {choice!r}")
    if choice == "python":
        return _pykernels, "python"
    try:
        from . import _ckernels
    except ImportError:
        if choice == "compiled":
            raise
        logger.info("compiled kernels unavailable, using numpy fallback")
        return _pykernels, "python"
    return _ckernels, "compiled"


_impl, BACKEND = _load(os.environ.get("MIXSIM_BACKEND", "auto").strip().lower())

upwind_fluxes = _impl.upwind_fluxes
divergence = _impl.divergence
convection = _impl.convection
strain_rates = _impl.strain_rates
stress_divergence = _impl.stress_divergence


def backend_module(name):
    """Return the kernel module for ``"python"`` or ``"compiled"`` (may raise ImportError)."""
    if name == "python":
        return _pykernels
    from . import _ckernels

    return _ckernels
