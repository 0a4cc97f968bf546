"""quonspec: small violations of quantum statistics at desk scale.

q-deformed Fock spaces, permutation-symmetry mixtures, synthetic
rovibrational spectra with symmetry-forbidden lines, and statistical
upper limits on the violation parameter extracted from them.
"""

__version__ = "0.1.0"

from .qfock import (  # noqa: E402,F401
    FockState,
    GramMatrix,
    PositivityReport,
    QParameter,
    check_positivity,
    gram_matrix,
    inner_product,
    state_norm2,
)

__all__ = [
    "__version__",
    "FockState",
    "GramMatrix",
    "PositivityReport",
    "QParameter",
    "check_positivity",
    "gram_matrix",
    "inner_product",
    "state_norm2",
]
