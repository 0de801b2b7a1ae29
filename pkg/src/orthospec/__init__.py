"""Relative trace formula and ortholength spectra for closed geodesics on
compact hyperbolic surfaces."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    InputError,
    InvariantViolation,
    NumericalError,
    OrthospecError,
)
from .hypgeo import MoebiusElement, delta_invariant, point_pair_u  # noqa: E402
from .fuchsian import (  # noqa: E402
    FuchsianGroup,
    OrthoSpectrum,
    builtin_bolza,
    geodesic_frame,
    load_group,
    ortho_spectrum,
    pair_cosets,
    pi_delta,
)
from .specfun import KernelSpec, k0, k_imag_order, k_real_order  # noqa: E402
from .rtf import (  # noqa: E402
    GeometricSideResult,
    SpectralDatum,
    geometric_side,
    orbital_integral_exp,
    orbital_integral_general,
    spectral_side,
)

__all__ = [
    "__version__",
    "OrthospecError",
    "InputError",
    "NumericalError",
    "InvariantViolation",
    "MoebiusElement",
    "delta_invariant",
    "point_pair_u",
    "FuchsianGroup",
    "OrthoSpectrum",
    "builtin_bolza",
    "load_group",
    "geodesic_frame",
    "ortho_spectrum",
    "pair_cosets",
    "pi_delta",
    "KernelSpec",
    "k0",
    "k_real_order",
    "k_imag_order",
    "GeometricSideResult",
    "SpectralDatum",
    "geometric_side",
    "spectral_side",
    "orbital_integral_exp",
    "orbital_integral_general",
]
