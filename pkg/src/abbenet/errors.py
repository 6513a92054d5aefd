"""Exception hierarchy shared across the toolkit.

Grouped here so lower layers (pairing) and higher layers (cli) agree on
types without circular imports. Each module re-exports the names it owns.
"""


class AbbenetError(Exception):
    """Base class for every error raised by this package."""


# ---------------------------------------------------------------- pairing

class UnsupportedSecurityLevel(AbbenetError):
    """Curve generation was asked for a security level other than 128."""


class WrongGroup(AbbenetError):
    """Operands of a group operation or pairing live in the wrong group(s)."""


class InvalidEncoding(AbbenetError):
    """Bytes do not decode to a valid element of the claimed group."""


# ------------------------------------------------------------------- abbe

class AbbeError(AbbenetError):
    """Base class for key-encapsulation errors."""


class DuplicateUser(AbbeError):
    """Registry contains two users with the same id."""


class UnknownAttribute(AbbeError):
    """An attribute is not part of the attribute universe."""


class UnknownUser(AbbeError):
    """User id is not part of the registry fixed at setup."""


class UnknownRevokedUser(AbbeError):
    """A policy revokes a user id that is not in the registry."""


class MismatchedCurve(AbbeError):
    """Key and header (or key and public key) reference different curves."""


class NotAuthorized(AbbeError):
    """The key holder does not satisfy the header's access policy."""


class InvalidHeader(AbbeError):
    """Header elements fail the internal consistency check (malformed or
    tampered header; never raised for honestly produced headers)."""


# ---------------------------------------------------------------- formats

class SchemaViolation(AbbenetError):
    """A JSON artifact violates its schema or referential rules.

    ``path`` is a JSON-path-like string ("/policy/attributes/2") locating the
    first offending field.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message


# ---------------------------------------------------------------- content

class AuthFailure(AbbenetError):
    """AEAD authentication failed: wrong key or tampered ciphertext."""


# -------------------------------------------------------------------- ndn

class NdnError(AbbenetError):
    """Base class for transport errors."""


class Timeout(NdnError):
    """A fetch ran out of retries for some segment (or was nacked).

    ``reason`` is "deadline" for expired retries and "noroute" when the
    forwarder answered with a negative acknowledgment.
    """

    def __init__(self, name: str, reason: str = "deadline"):
        super().__init__(f"fetch of {name} failed: {reason}")
        self.name = name
        self.reason = reason


class SignatureInvalid(NdnError):
    """A data segment's producer signature failed verification."""


class PrefixNotRegistered(NdnError):
    """publish() was called before the producer registered a matching prefix."""
