"""Exception taxonomy shared across the package."""


class MedLedgerError(Exception):
    """Base class for all package errors."""


class WireError(MedLedgerError):
    """Malformed or truncated canonical encoding."""


class AuthenticationError(MedLedgerError):
    """AEAD open failed: wrong key, altered ciphertext, or altered associated data."""


class TamperAlarm(MedLedgerError):
    """Stored bytes fail their content-address check.

    Distinct from a missing entry: the store holds bytes, but rehashing them
    does not reproduce the key they were stored under.
    """

    def __init__(self, key_hex: str, holder: str | None = None):
        self.key_hex = key_hex
        self.holder = holder
        where = f" (holder {holder})" if holder else ""
        super().__init__(f"content address mismatch for {key_hex}{where}")


class IdentityError(MedLedgerError):
    """Registration or key-exchange precondition violated."""


class ReplayError(MedLedgerError):
    """Chain replay hit an invalid block."""

    def __init__(self, height: int, reason: str):
        self.height = height
        self.reason = reason
        super().__init__(f"invalid block at height {height}: {reason}")


class ScenarioError(MedLedgerError):
    """Scenario file could not be parsed or executed."""
