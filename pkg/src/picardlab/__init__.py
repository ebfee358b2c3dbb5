"""picardlab: frequency-grid laboratory for Picard/Duhamel iterates of
dispersive model equations and norm-growth experiments."""

from .spectral import (
    Box,
    ConvolutionOverflowError,
    GridSpec,
    SpectralField,
    conj_reflect,
    convolve,
    hermitian_defect,
    make_field,
    make_grid,
    norm,
    scale_field,
    zero_field,
)
from .families import DataFamily, build_data, closed_form_norms
from .equations import (
    Dispersion,
    EquationSpec,
    Nonlinearity,
    catalog,
    modulation,
    modulation_envelope_check,
)
from .picard import (
    IterateSet,
    QuadratureError,
    SeriesSum,
    active_levels,
    coord_window,
    iterate3_closed,
    iterate_series,
    leading_iterate_closed,
    series_sum,
    time_factor,
    time_factor2,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "ConvolutionOverflowError",
    "GridSpec",
    "SpectralField",
    "DataFamily",
    "Dispersion",
    "EquationSpec",
    "IterateSet",
    "Nonlinearity",
    "QuadratureError",
    "SeriesSum",
    "active_levels",
    "build_data",
    "catalog",
    "closed_form_norms",
    "conj_reflect",
    "convolve",
    "coord_window",
    "hermitian_defect",
    "iterate3_closed",
    "iterate_series",
    "leading_iterate_closed",
    "make_field",
    "make_grid",
    "modulation",
    "modulation_envelope_check",
    "norm",
    "scale_field",
    "series_sum",
    "time_factor",
    "time_factor2",
    "zero_field",
    "__version__",
]
