"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested quantity."""


class TailUnderflowError(OverflowError):
    """A tail probability underflowed below the representable floor."""

    def __init__(self, t, survival):
        self.t = t
        self.survival = survival
        super().__init__(
            f"survival({t!r}) = {survival!r} is below 1e-300; "
            "conditional tail moment is not representable"
        )


class ScanNotFoundError(LookupError):
    """No measurement count up to the scan cap satisfies the target."""


class CapExceededError(RuntimeError):
    """An enumeration would exceed its configured size cap."""

    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f"enumeration needs {count} supports, cap is {cap}")
