# netnl/core/exceptions.py
"""
Custom Exceptions Module.

Defines the domain-specific exception classes of the package.
Callers can catch `NetnlError` to handle any library failure, or a
specific subclass to react to one kind of problem (for instance an
undefined conditional versus a genuine numerical failure).
"""


class NetnlError(Exception):
    """
    Base exception for all library errors.
    Extra keyword arguments are kept as diagnostic details.
    """
    def __init__(self, message, **kwargs):
        super().__init__(message)
        self.details = kwargs

    def __str__(self):
        base_message = super().__str__()
        details = {k: v for k, v in self.details.items() if v is not None}
        if details:
            details_str = ", ".join(f"{k}={v}" for k, v in details.items())
            return f"{base_message} (Details: {details_str})"
        return base_message


class DimensionError(NetnlError):
    """
    Raised when operator or tensor dimensions do not match, or when a
    product dimension would exceed the configured cap.
    """
    def __init__(self, message, expected=None, actual=None):
        super().__init__(message, expected=expected, actual=actual)
        self.expected = expected
        self.actual = actual


class PreconditionError(NetnlError):
    """
    Raised when an input violates an operation's precondition
    (non-Hermitian matrix, non-dichotomic observable, incomplete POVM...).
    """
    def __init__(self, message, check=None, deviation=None):
        super().__init__(message, check=check, deviation=deviation)
        self.check = check
        self.deviation = deviation


class ContractError(NetnlError):
    """
    Raised when an operation is called on a behavior or certificate of the
    wrong shape or kind.
    """
    def __init__(self, message, operation=None):
        super().__init__(message, operation=operation)
        self.operation = operation


class CapacityError(NetnlError):
    """
    Raised when an enumeration would exceed its configured cap.
    """
    def __init__(self, message, required=None, cap=None):
        super().__init__(message, required=required, cap=cap)
        self.required = required
        self.cap = cap


class SolverError(NetnlError):
    """
    Raised when the LP solver fails numerically or does not terminate.
    """
    def __init__(self, message, iterations=None, condition_number=None, backend=None):
        super().__init__(message, iterations=iterations,
                         condition_number=condition_number, backend=backend)
        self.iterations = iterations
        self.condition_number = condition_number
        self.backend = backend


class UndefinedConditionalError(NetnlError):
    """
    Raised when conditioning on an outcome of (numerically) zero probability.
    This is a property of the behavior, not a numerical failure.
    """
    def __init__(self, message, outcome=None, probability=None):
        super().__init__(message, outcome=outcome, probability=probability)
        self.outcome = outcome
        self.probability = probability


class NoSignalingViolationError(NetnlError):
    """
    Raised when a party's marginal depends on another party's input.
    """
    def __init__(self, message, party=None, deviation=None):
        super().__init__(message, party=party, deviation=deviation)
        self.party = party
        self.deviation = deviation


class BehaviorValidationError(NetnlError):
    """
    Raised when a probability tensor breaks a behavior invariant.
    `location` names the offending input tuple or entry.
    """
    def __init__(self, message, location=None, deviation=None):
        super().__init__(message, location=location, deviation=deviation)
        self.location = location
        self.deviation = deviation


class DocumentFormatError(NetnlError):
    """
    Raised when a JSON document cannot be read or does not have the
    expected structure.
    """
    def __init__(self, message, path=None, location=None):
        super().__init__(message, path=path, location=location)
        self.path = path
        self.location = location


class ConstructionInapplicableError(NetnlError):
    """
    Raised when an explicit model construction cannot be applied because
    its premise does not hold for the given behavior.
    """
    def __init__(self, message, construction=None, deviation=None):
        super().__init__(message, construction=construction, deviation=deviation)
        self.construction = construction
        self.deviation = deviation


class ProgramError(NetnlError):
    """
    Raised when a wiring program is invalid: foreign or reused terminal,
    out-of-range input or output, or a reference to missing history.
    """
    def __init__(self, message, party=None, step=None, terminal=None):
        super().__init__(message, party=party, step=step, terminal=terminal)
        self.party = party
        self.step = step
        self.terminal = terminal


class ReportExportError(NetnlError):
    """
    Raised when writing a report workbook fails.
    """
    def __init__(self, message, filename=None, sheet_name=None):
        super().__init__(message, filename=filename, sheet_name=sheet_name)
        self.filename = filename
        self.sheet_name = sheet_name


class ConfigurationError(Exception):
    """
    Separate exception for configuration problems (e.g., malformed environment
    variables). Doesn't inherit from NetnlError because it occurs at startup.
    """
    pass
