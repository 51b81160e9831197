"""Magnetotransport modeling and inference for 2D delta-doped layers.

Forward models for the weak-localization and Zeeman interaction
corrections to the sheet conductivity, Hall characterization, difference
fitting of the two field orientations, the B/T scaling collapse that
measures electron temperatures, and a synthetic-data generator closing the
loop.
"""

from ._version import __version__
from .constants import CONSTANTS, Constants, G0, Quantity, from_si, to_si
from .special import digamma
from .models import (
    AaParams,
    H_CROSS_C1,
    InPlaneParams,
    WlParams,
    elastic_field,
    gamma_param,
    phase_breaking_field,
    reduced_field,
    thickness_from_gamma,
    total_delta_sigma,
    wl_inplane,
    wl_perp,
    wl_perp_shape,
    zeeman_aa,
)
from .hall import (
    Geometry,
    HallSweep,
    KAPPA_DEFAULT,
    SamplePhysics,
    characterize,
    density_from_hall,
    fermi_wavevector,
    interaction_rs,
    mean_free_path,
    mobility,
    sheet_conductivity,
)
from .fit import (
    AaSlopeFit,
    FitResult,
    LinearFit,
    Measured,
    PowerLawFit,
    Residual,
    ResidualError,
    WlDifferenceFit,
    finite_difference_jacobian,
    fit_aa_slope,
    fit_coherence_power_law,
    fit_wl_difference,
    levmar,
    linear_fit,
)
from .collapse import (
    AaCurve,
    CollapseResult,
    OrientedCurve,
    WlFitTable,
    collapse_teff,
    dispersion,
    isolate_aa,
)
from .synth import (
    SweepPlanEntry,
    SynthConfig,
    effective_temperature,
    generate_dataset,
    generate_sweep,
)
from .sweepio import SweepRecord, parse_sweep_csv, write_plot_csv, write_sweep_csv
from .pipeline import (
    AnalysisConfig,
    Dataset,
    Report,
    load_datasets,
    run_analysis,
    write_report,
)
from .samples import LayerRecord, REFERENCE_LAYERS

__all__ = [
    "__version__",
    "AaCurve",
    "AaParams",
    "AaSlopeFit",
    "AnalysisConfig",
    "CONSTANTS",
    "CollapseResult",
    "Constants",
    "Dataset",
    "FitResult",
    "G0",
    "Geometry",
    "H_CROSS_C1",
    "HallSweep",
    "InPlaneParams",
    "KAPPA_DEFAULT",
    "LayerRecord",
    "LinearFit",
    "Measured",
    "OrientedCurve",
    "PowerLawFit",
    "Quantity",
    "REFERENCE_LAYERS",
    "Report",
    "Residual",
    "ResidualError",
    "SamplePhysics",
    "SweepPlanEntry",
    "SweepRecord",
    "SynthConfig",
    "WlDifferenceFit",
    "WlFitTable",
    "WlParams",
    "characterize",
    "collapse_teff",
    "density_from_hall",
    "digamma",
    "dispersion",
    "effective_temperature",
    "elastic_field",
    "fermi_wavevector",
    "finite_difference_jacobian",
    "fit_aa_slope",
    "fit_coherence_power_law",
    "fit_wl_difference",
    "from_si",
    "gamma_param",
    "generate_dataset",
    "generate_sweep",
    "interaction_rs",
    "isolate_aa",
    "levmar",
    "linear_fit",
    "load_datasets",
    "mean_free_path",
    "mobility",
    "parse_sweep_csv",
    "phase_breaking_field",
    "reduced_field",
    "run_analysis",
    "sheet_conductivity",
    "thickness_from_gamma",
    "to_si",
    "total_delta_sigma",
    "wl_inplane",
    "wl_perp",
    "wl_perp_shape",
    "write_plot_csv",
    "write_report",
    "write_sweep_csv",
    "zeeman_aa",
]
