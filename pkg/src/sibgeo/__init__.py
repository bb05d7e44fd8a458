"""Sibling metrics: the Riemannian/Lorentzian pair g_L = g - 2T♭⊗T♭ and
numerical verification of the curvature identities that relate them."""

from .config import RunConfig, load_config, parse_config
from .errors import (
    ArityError,
    Big3Violated,
    BadParameters,
    ConfigError,
    DegeneratePlane,
    DimensionMismatch,
    DomainError,
    ExprSyntaxError,
    NotSymmetric,
    NotUnit,
    SibgeoError,
    SignatureError,
    SingularMetric,
    TPropertiesViolated,
    UnknownIdentifier,
)
from .expr import Expr, eval_jet, parse, render
from .gallery import GalleryEntry, build
from .geometry import (
    Chart,
    MetricField,
    PointGeometry,
    VectorField,
    christoffel,
    hessian,
    integrate_geodesic,
    riemann_at,
    sectional,
)
from .identities import IdentityResult
from .jet import Jet2
from .runner import VerificationReport, run
from .sibling import SiblingPair, make_pair, shape_spectrum, sibling_metric, verify_T_properties
from .tensor import kn_product

__version__ = "0.1.0"
