from .appendix import APPENDIX, list_appendix
from .evaluate import (
    eval_moment,
    eval_probability,
    evaluate,
    min_ball,
    polynomial,
    required_cells,
    required_moment_order,
)
from .families import expand_e3, expand_e4, mapped_probability_polynomial
from .majorization import redundancy_residual
from .polynomial import Polynomial
from .spec import (
    CriterionSpec,
    CriterionValue,
    Family,
    format_label,
    majorizes,
    parse_label,
    swap_spec,
)

__all__ = [
    "APPENDIX",
    "CriterionSpec",
    "CriterionValue",
    "Family",
    "Polynomial",
    "eval_moment",
    "eval_probability",
    "evaluate",
    "expand_e3",
    "expand_e4",
    "format_label",
    "list_appendix",
    "majorizes",
    "mapped_probability_polynomial",
    "min_ball",
    "parse_label",
    "polynomial",
    "redundancy_residual",
    "required_cells",
    "required_moment_order",
    "swap_spec",
]
