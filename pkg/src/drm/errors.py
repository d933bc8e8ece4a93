"""
DRM error types.

Denials are the verdicts of `consume`: each subclass names one failed
usage check and its category is the reason recorded in usage reports.
"""

from core.errors import F4msError


class DrmError(F4msError):
    category = "DrmError"


class DuplicateContent(DrmError):
    category = "DuplicateContent"


class UnknownContent(DrmError):
    category = "UnknownContent"


class UnknownUser(DrmError):
    category = "UnknownUser"


class DuplicateUser(DrmError):
    category = "DuplicateUser"


class UnknownLicense(DrmError):
    category = "UnknownLicense"


class InvalidRules(DrmError, ValueError):
    category = "InvalidRules"


# =============================================================================
# Consumption denials
# =============================================================================

class Denial(DrmError):
    """A consume attempt was refused; reader state is left untouched."""

    category = "Denial"

    @property
    def reason(self) -> str:
        return self.category


class BadSignature(Denial):
    category = "BadSignature"


class Revoked(Denial):
    category = "Revoked"


class WrongUser(Denial):
    category = "WrongUser"


class Expired(Denial):
    category = "Expired"


class PlaysExhausted(Denial):
    category = "PlaysExhausted"


class WrongDevice(Denial):
    category = "WrongDevice"


class DecryptFailure(Denial):
    category = "DecryptFailure"


DENIAL_REASONS = tuple(cls.category for cls in (
    BadSignature, Revoked, WrongUser, Expired, PlaysExhausted, WrongDevice, DecryptFailure,
))
