"""Deterministic cryptographic primitives shared by every protocol component."""

from __future__ import annotations

import hashlib

from .ecies import (
    KDF_INFO,
    DerivedKeys,
    DhKeyPair,
    aead_decrypt,
    aead_encrypt,
    dh_keygen,
    dh_shared_secret,
    kdf,
)
from .errors import CryptoError
from .keccak import keccak256
from .secp256k1 import (
    Signature,
    SigningKeyPair,
    address_from_pubkey,
    gen_account,
    keypair_from_scalar,
    recover_pubkey,
    recover_signer,
    sign,
    verify,
)


def sha256(data: bytes) -> bytes:
    """Standard SHA-256, used for attestation digests and key derivation."""
    return hashlib.sha256(data).digest()


__all__ = [
    "CryptoError",
    "DerivedKeys",
    "DhKeyPair",
    "KDF_INFO",
    "Signature",
    "SigningKeyPair",
    "address_from_pubkey",
    "aead_decrypt",
    "aead_encrypt",
    "dh_keygen",
    "dh_shared_secret",
    "gen_account",
    "kdf",
    "keccak256",
    "keypair_from_scalar",
    "recover_pubkey",
    "recover_signer",
    "sha256",
    "sign",
    "verify",
]
