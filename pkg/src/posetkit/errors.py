"""Exception hierarchy shared by every module."""


class PosetKitError(Exception):
    """Base class for all library errors."""


class CycleError(PosetKitError):
    """The reflexive-transitive closure of a relation is not antisymmetric."""


class UnknownIdError(PosetKitError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class CapExceeded(PosetKitError):
    """A configured size cap would be exceeded."""


class NotALattice(PosetKitError):
    """Some pair lacks a least upper bound or greatest lower bound."""


class NotDistributive(PosetKitError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class RoundTripFailure(PosetKitError):
    """A duality round trip did not yield an isomorphism (always a bug)."""


class UniverseMismatch(PosetKitError):
    pass


class NotPriestley(PosetKitError):
    pass


class TooFewParts(PosetKitError):
    pass


class InfeasiblePlacement(PosetKitError):
    pass


class UndecidableAtDepth(PosetKitError):
    """Gap bounds are too coarse to decide a comparison against a rational."""


class NotSeparablePrecondition(PosetKitError):
    pass


class IsoFailure(PosetKitError):
    pass
