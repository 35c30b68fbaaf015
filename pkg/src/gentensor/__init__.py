"""gentensor: a numerical lab for tensor-valued Colombeau generalized
functions on box charts.

The basic objects are evaluable maps t(omega, p, A) taking a compactly
supported unit-integral n-form, a chart point, and a two-point transport
operator, and returning an (r, s)-tensor at p.  Smooth fields embed by
pointwise evaluation, continuous and distributional tensor fields embed
through transported averages and the contraction pairing, and the library
ships diffeomorphism actions, generalized Lie derivatives, and an
experiment harness for scaling, association, and obstruction demonstrations.
"""

__version__ = "0.1.0"

from .geometry import (Chart, Diffeo, Point, SmoothMap, VectorFieldFlow,
                       as_point, flow, flow_diffeo, jacobian_at)
from .tensors import (BasisChange, SmoothTensorField, TensorAtPoint,
                      TensorType, contract_full, tensor_product)
from .distributions import (Combination, Dirac, DiracDerivative, NFormDensity,
                            Regular, ScalarDistribution, TensorDistribution,
                            apply_scalar, apply_tensor,
                            change_basis_representation,
                            lie_derivative_distribution, premultiplied,
                            scalar_distribution_field)
from .mollifiers import BumpProfile, ScaledMollifier, make_mollifier, profile_catalog
from .transport import (TensorTransport, TransportOperator, transport_catalog,
                        transport_dual, transport_tensor)
from .embedding import (BasicSpaceElement, GeneralizedScalar,
                        embed_iota_distribution, embed_iota_field,
                        embed_sigma, pointwise_product)
from .calculus import (PushedData, lie_classical, lie_hat, mu_hat,
                       pullback_field, pushforward_data, pushforward_field,
                       pushforward_vector_field)
from .asymptotics import (CommutatorResult, ScalingReport, association_test,
                          basis_dependence, fit_loglog, scaling_estimate,
                          schwartz_commutator)

__all__ = [
    "__version__",
    "Chart", "Diffeo", "Point", "SmoothMap", "VectorFieldFlow",
    "as_point", "flow", "flow_diffeo", "jacobian_at",
    "BasisChange", "SmoothTensorField", "TensorAtPoint", "TensorType",
    "contract_full", "tensor_product",
    "Combination", "Dirac", "DiracDerivative", "NFormDensity", "Regular",
    "ScalarDistribution", "TensorDistribution", "apply_scalar", "apply_tensor",
    "change_basis_representation", "lie_derivative_distribution",
    "premultiplied", "scalar_distribution_field",
    "BumpProfile", "ScaledMollifier", "make_mollifier", "profile_catalog",
    "TensorTransport", "TransportOperator", "transport_catalog",
    "transport_dual", "transport_tensor",
    "BasicSpaceElement", "GeneralizedScalar", "embed_iota_distribution",
    "embed_iota_field", "embed_sigma", "pointwise_product",
    "PushedData", "lie_classical", "lie_hat", "mu_hat", "pullback_field",
    "pushforward_data", "pushforward_field", "pushforward_vector_field",
    "CommutatorResult", "ScalingReport", "association_test",
    "basis_dependence", "fit_loglog", "scaling_estimate", "schwartz_commutator",
]
