class CryptoError(Exception):
    """Raised when a cryptographic operation fails or rejects its input."""
