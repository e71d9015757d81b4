"""Exception types shared across the package."""


class RepairKitError(Exception):
    """Base class for all domain errors raised by this package."""


class DuplicateTid(RepairKitError):
    pass


class UnknownTid(RepairKitError):
    pass


class UnknownRelation(RepairKitError):
    pass


class UnknownAttribute(RepairKitError):
    pass


class ArityMismatch(RepairKitError):
    pass


class NotDerivable(RepairKitError):
    pass


class SpecSyntaxError(RepairKitError):
    """Parse failure with 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class UnsafeRule(RepairKitError):
    """A head or comparison variable does not occur in any body atom."""

    def __init__(self, rule_name: str, variable: str):
        super().__init__(f"unsafe rule {rule_name!r}: variable {variable!r} "
                         "does not occur in a body atom")
        self.rule_name = rule_name
        self.variable = variable


class DuplicateName(RepairKitError):
    pass


class QueryFalseInInstance(RepairKitError):
    pass


class AlreadyNegative(RepairKitError):
    pass


class NoCounterfactual(RepairKitError):
    pass


class OutOfDomain(RepairKitError):
    pass


class BudgetExceeded(RepairKitError):
    pass


class UniverseTooLarge(RepairKitError):
    pass


class ProtocolError(RepairKitError):
    """External classifier broke the line protocol."""
