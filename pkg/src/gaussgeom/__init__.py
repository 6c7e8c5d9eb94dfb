"""Information geometry of the normal family, in a chart and on the affine group."""

from .chart import (
    SQRT2,
    ChartPoint,
    ConnectionField,
    CurvatureTensor,
    MetricTensor,
    Tensor3Sym,
    alpha_christoffels,
    alpha_connection,
    cubic_form_closed,
    metric_at,
)
from .errors import GeometryError
from .lie import BilinearMap, GroupElement, InnerProduct, LieAlgebra2
from .quadrature import GaussianParam, hermite_rule
from .statstruct import StatisticalStructure, VerificationReport, characterize_solutions, verify_conditions

__version__ = "0.1.0"
