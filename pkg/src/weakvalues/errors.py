"""Exception hierarchy shared by all modules."""


class WeakValueError(Exception):
    """Base class for every error raised by this package."""


class SpaceMismatch(WeakValueError):
    pass


class ZeroState(WeakValueError):
    pass


class NotHermitian(WeakValueError):
    pass


class NotUnitary(WeakValueError):
    pass


class UnknownLabel(WeakValueError, KeyError):
    pass


class BadWidth(WeakValueError, ValueError):
    pass


class ZeroMeter(WeakValueError):
    pass


class RangeTooSmall(WeakValueError, ValueError):
    pass


class UndefinedWeakValue(WeakValueError):
    """The postselection amplitude <f|U_sys|in> vanishes."""


class ZeroPostselection(WeakValueError):
    """Postselection probability is numerically zero at the requested coupling."""


class SchemaError(WeakValueError):
    """A scenario document is missing a field or has the wrong shape."""


class ValidationError(WeakValueError):
    """A scenario document parsed but violates a physical invariant."""

    def __init__(self, findings):
        self.findings = list(findings)
        super().__init__("; ".join(str(f) for f in self.findings))
