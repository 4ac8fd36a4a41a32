"""Exception hierarchy shared across the package."""


class ChainSSEError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(ChainSSEError, ValueError):
    """An argument is outside the supported range (key size, limits, ...)."""


class ConfigError(ChainSSEError):
    """Inconsistent or unusable configuration."""


class AuthenticationError(ChainSSEError):
    """Authenticated decryption failed (wrong key or corrupted ciphertext)."""


class IntegrityError(ChainSSEError):
    """Stored data does not satisfy a structural integrity requirement."""


class MacMismatchError(IntegrityError):
    """A keyed digest over retrieved data does not match the recorded one."""


class NotFoundError(ChainSSEError):
    """A transaction id does not name any mined transaction."""


class CorruptChainError(ChainSSEError):
    """A linked sequence of transactions is broken or inconsistent."""


class InsufficientFundsError(ChainSSEError):
    """A wallet cannot cover the requested amount."""


class TxRejected(ChainSSEError):
    """A transaction failed ledger validation.

    `reason` is one of the ledger's reject reason strings
    (the REASON_* constants in chainsse.chain.ledger).
    """

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


class StoreTimeoutError(ChainSSEError):
    """An emitted transaction did not appear on chain within the window."""


class ProtocolError(ChainSSEError):
    """A party attempted a workflow step whose preconditions do not hold."""


class CannotAbortError(ProtocolError):
    """Abort requested after the offer transaction was already mined."""


class ScenarioError(ChainSSEError):
    """A scenario script line could not be parsed or executed."""

    def __init__(self, step: int, message: str):
        self.step = step
        super().__init__(f"step {step}: {message}")
