"""Spin-1/2 scattering from a PT-symmetric gain/loss bilayer wrapped by spin flippers."""

__version__ = "0.1.0"

from ._backend import available as available_backends  # noqa: E402
from ._backend import name as backend_name  # noqa: E402
from ._backend import use_backend  # noqa: E402
from .scattering import (  # noqa: E402
    PAPER_PARAMS,
    Amplitudes,
    LayerStack,
    PhysParams,
    amplitudes_closed_form,
    amplitudes_oracle,
    pt_stack,
    wavenumbers,
)
from .spinflip import DeviceConfig, SFKind, build_smatrix, eigenvalues_analytic, eigenvalues_numeric  # noqa: E402

__all__ = [
    "PAPER_PARAMS", "Amplitudes", "DeviceConfig", "LayerStack", "PhysParams", "SFKind",
    "amplitudes_closed_form", "amplitudes_oracle", "available_backends", "backend_name",
    "build_smatrix", "eigenvalues_analytic", "eigenvalues_numeric", "pt_stack", "use_backend",
    "wavenumbers",
]
