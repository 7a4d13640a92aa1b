import factory

from core.applications.nonlinear_operators.interface import OperatorSpec
from core.helper.enums import OperatorKind


class OperatorSpecFactory(factory.Factory):
    kind = OperatorKind.MONGE_AMPERE
    n = 2

    class Meta:
        model = OperatorSpec

    class Params:
        hessian = factory.Trait(kind=OperatorKind.HESSIAN, n=3, k=2)
        pma = factory.Trait(kind=OperatorKind.P_MONGE_AMPERE, p=1)
