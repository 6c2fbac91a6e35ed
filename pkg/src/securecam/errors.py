"""Exception hierarchy shared across the securecam package."""


class SecurecamError(Exception):
    """Base class for all securecam errors."""


# --- cipher layer ---

class InvalidKeyLength(SecurecamError):
    """Key is not 16, 24 or 32 bytes."""


class InvalidBlockLength(SecurecamError):
    """Single-block operation got input that is not exactly 16 bytes."""


class InvalidLength(SecurecamError):
    """Buffer length violates the block-multiple rule of the operation."""


class InvalidPadding(SecurecamError):
    """PKCS#7 padding is malformed (also the tamper signal for ECB/CBC)."""


# --- wire format ---

class WireError(SecurecamError):
    """Base class for encrypted-record parse failures."""


class BadMagic(WireError):
    pass


class UnsupportedVersion(WireError):
    pass


class UnknownMode(WireError):
    pass


class TruncatedRecord(WireError):
    pass


class LengthMismatch(WireError):
    """Declared lengths are inconsistent with the mode's expansion rules."""


# --- sealing / opening ---

class KeyMismatch(SecurecamError):
    """Record was sealed under a different key id than the local config."""


class CorruptImage(SecurecamError):
    """Recovered plaintext does not carry valid JPEG start/end markers."""


# --- camera ---

class UnknownVar(SecurecamError):
    """Control request named a setting that does not exist."""


class OutOfRange(SecurecamError):
    """Control value falls outside the setting's allowed range."""


class SourceExhausted(SecurecamError):
    """Directory-backed frame source has no JPEG files to serve."""


# --- relay ---

class ConnectFailed(SecurecamError):
    """Could not reach the device stream endpoint."""


class IoFailure(SecurecamError):
    """Sink could not persist a frame."""
