"""freefield: exact symbolic free-field realizations of affine sl3 and the
Bershadsky-Polyakov algebra, with machine verification of their defining
relations, singular vectors, relaxed-module actions, characters and spectral
flow.

All arithmetic is exact over Q(k, parameters); there is no floating point
anywhere in the engine.
"""

from .scalars import Scalar, ScalarContext, ScalarError, scalar_arith, scalar_eq, scalar_eval

__version__ = "0.1.0"

__all__ = [
    "Scalar",
    "ScalarContext",
    "ScalarError",
    "scalar_arith",
    "scalar_eq",
    "scalar_eval",
    "__version__",
]
