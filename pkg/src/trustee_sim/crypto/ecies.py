"""Key agreement and authenticated encryption for sealed payloads.

X25519 for the ephemeral Diffie-Hellman exchange, HKDF-SHA-256 to derive
the symmetric keys, AES-128-CTR for encryption, and HMAC-SHA-256 over
iv||ct as the authentication tag (encrypt-then-MAC).
"""

from __future__ import annotations

import hashlib
import hmac as _hmac
import random
from dataclasses import dataclass

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .errors import CryptoError

KDF_INFO = b"trustee-ecies-v1"

_SYSTEM_RNG = random.SystemRandom()


@dataclass(frozen=True)
class DhKeyPair:
    """Curve25519 key pair; sk is stored clamped, pk is the 32-byte x-coordinate."""

    sk: bytes
    pk: bytes


@dataclass(frozen=True)
class DerivedKeys:
    """Symmetric keys split out of one HKDF expansion: k1 encrypts, k2 authenticates."""

    k1: bytes
    k2: bytes


def _clamp(scalar: bytes) -> bytes:
    clamped = bytearray(scalar)
    clamped[0] &= 248
    clamped[31] &= 127
    clamped[31] |= 64
    return bytes(clamped)


def dh_keygen(rng: random.Random | None = None) -> DhKeyPair:
    """Generate a curve25519 key pair from 32 bytes of entropy."""
    rng = rng or _SYSTEM_RNG
    return dh_keypair_from_secret(rng.randbytes(32))


def dh_keypair_from_secret(sk: bytes) -> DhKeyPair:
    """Build the key pair for a fixed 32-byte secret (clamped on the way in)."""
    if len(sk) != 32:
        raise CryptoError("secret must be 32 bytes")
    clamped = _clamp(sk)
    pk = X25519PrivateKey.from_private_bytes(clamped).public_key().public_bytes_raw()
    return DhKeyPair(sk=clamped, pk=pk)


def dh_shared_secret(my_sk: bytes, their_pk: bytes) -> bytes:
    """X25519 exchange; rejects low-order peer points instead of returning zeros."""
    if len(their_pk) != 32:
        raise CryptoError("public key must be 32 bytes")
    try:
        return X25519PrivateKey.from_private_bytes(my_sk).exchange(
            X25519PublicKey.from_public_bytes(their_pk)
        )
    except ValueError as exc:
        raise CryptoError("degenerate shared secret") from exc


def kdf(ss: bytes) -> DerivedKeys:
    """Derive (k1, k2) = HKDF-SHA-256(salt=empty, ikm=ss, info=KDF_INFO, 48 bytes)."""
    return derive_keys(ss, KDF_INFO)


def derive_keys(ikm: bytes, info: bytes) -> DerivedKeys:
    """One HKDF-SHA-256 expansion split into a cipher key and a MAC key."""
    okm = HKDF(algorithm=hashes.SHA256(), length=48, salt=None, info=info).derive(ikm)
    return DerivedKeys(k1=okm[:16], k2=okm[16:])


def _mac(k2: bytes, iv: bytes, ct: bytes) -> bytes:
    return _hmac.new(k2, iv + ct, hashlib.sha256).digest()


def aead_encrypt(plaintext: bytes, iv: bytes, k1: bytes, k2: bytes) -> tuple[bytes, bytes]:
    """AES-128-CTR encrypt, then MAC iv||ct. Returns (ciphertext, 32-byte tag)."""
    if len(iv) != 16:
        raise CryptoError("iv must be 16 bytes")
    encryptor = Cipher(algorithms.AES(k1), modes.CTR(iv)).encryptor()
    ct = encryptor.update(plaintext) + encryptor.finalize()
    return ct, _mac(k2, iv, ct)


def aead_decrypt(ct: bytes, iv: bytes, tag: bytes, k1: bytes, k2: bytes) -> bytes:
    """Verify the tag (constant-time), then decrypt. The MAC check comes first."""
    if len(iv) != 16 or not _hmac.compare_digest(tag, _mac(k2, iv, ct)):
        raise CryptoError("authentication failure")
    decryptor = Cipher(algorithms.AES(k1), modes.CTR(iv)).decryptor()
    return decryptor.update(ct) + decryptor.finalize()
