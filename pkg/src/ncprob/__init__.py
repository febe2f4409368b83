"""Non-classicality criteria and quantifiers for bipartite photon-number distributions."""

from .criteria import (
    CriterionSpec,
    CriterionValue,
    Family,
    evaluate,
    list_appendix,
    parse_label,
    swap_spec,
)
from .exceptions import (
    DivisionByVacuum,
    HistogramParseError,
    InvalidIndices,
    MissingOrder,
    NCError,
    NotChaoticLike,
    NotCounts,
    PrecisionEscalation,
    ValidationError,
)
from .generators import (
    FieldModel,
    gen_coherent_product,
    gen_ideal_twin,
    gen_noisy_twin,
    gen_thermal_product,
)
from .kernels import KernelCache, apply_noise, apply_ordering, build_kernel, transform_moments
from .pmf import JointPMF, MomentVector, dump_histogram, load_histogram, moment_vector
from .quantifiers import NCResult, moment_ncd, nccp, ncd, ncd_many
from .scanners import ScanReport, bootstrap_errors, scan_grid, scan_index_sum, scan_local, scan_touching

__version__ = "0.1.0"

__all__ = [
    "CriterionSpec", "CriterionValue", "DivisionByVacuum", "Family", "FieldModel",
    "HistogramParseError", "InvalidIndices", "JointPMF", "KernelCache", "MissingOrder",
    "MomentVector", "NCError", "NCResult", "NotChaoticLike", "NotCounts",
    "PrecisionEscalation", "ScanReport", "ValidationError", "apply_noise", "apply_ordering",
    "bootstrap_errors", "build_kernel", "dump_histogram", "evaluate", "gen_coherent_product",
    "gen_ideal_twin", "gen_noisy_twin", "gen_thermal_product", "list_appendix",
    "load_histogram", "moment_ncd", "moment_vector", "nccp", "ncd", "ncd_many", "parse_label",
    "scan_grid", "scan_index_sum", "scan_local", "scan_touching", "swap_spec",
    "transform_moments",
]
