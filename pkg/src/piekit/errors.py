"""Exception types and enumeration budgets shared across the toolkit."""

from __future__ import annotations


class PieKitError(Exception):
    """Base class for all toolkit errors."""


class MalformedTable(PieKitError):
    """Raw category/graph tables are structurally ill-formed."""


class IdentityLawBroken(PieKitError):
    def __init__(self, obj, detail=""):
        self.obj = obj
        super().__init__(f"identity law broken at object {obj!r}" + (f": {detail}" if detail else ""))


class NotAssociative(PieKitError):
    def __init__(self, f, g, h):
        self.triple = (f, g, h)
        super().__init__(f"composition not associative on ({f!r}, {g!r}, {h!r})")


class CyclicGraph(PieKitError):
    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__(f"graph has a directed cycle through edges {self.cycle!r}")


class EnumerationBudgetExceeded(PieKitError):
    def __init__(self, budget, context=""):
        self.budget = budget
        super().__init__(f"enumeration budget {budget} exceeded" + (f" in {context}" if context else ""))


class TypeMismatch(PieKitError):
    """Arguments of a construction fail to be parallel/composable as required."""


class UnknownWeightName(PieKitError):
    pass


class InvalidSection(PieKitError):
    """A supplied splitting does not compose to the identity."""


class ModeMismatch(PieKitError):
    """A diagram map fails the pointwise hypothesis demanded by the mode."""


class NotPie(PieKitError):
    pass


class CertificateMismatch(PieKitError):
    """A pie certificate does not verify against the weight it claims to decompose."""


class ArityMismatch(PieKitError):
    pass


class NonComposable(PieKitError):
    pass


class ShapeMismatch(PieKitError):
    """An algebra structure does not match the presentation's signature shapes."""


class SchemaError(PieKitError):
    """A JSON document fails strict schema validation."""


class Budget:
    """A mutable node counter; spending past the limit raises loudly."""

    __slots__ = ("limit", "used", "context")

    def __init__(self, limit, context=""):
        if limit <= 0:
            raise ValueError("budget limit must be positive")
        self.limit = limit
        self.used = 0
        self.context = context

    def spend(self, n=1):
        self.used += n
        if self.used > self.limit:
            raise EnumerationBudgetExceeded(self.limit, self.context)

    def __repr__(self):
        return f"Budget(used={self.used}, limit={self.limit})"
