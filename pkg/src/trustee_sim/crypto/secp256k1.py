"""secp256k1 ECDSA with deterministic nonces (RFC 6979) and sender recovery.

Pure-Python arithmetic: Jacobian coordinates for generic scalar
multiplication plus a precomputed 4-bit fixed-base table for the generator.
Mathematically correct but not side-channel hardened; intended for
deterministic simulation and test-vector generation, never for real funds.
"""

from __future__ import annotations

import hashlib
import hmac
import random
from dataclasses import dataclass

from .errors import CryptoError
from .keccak import keccak256

# Curve parameters: y^2 = x^3 + 7 over GF(P), generator G of prime order N.
P = 2**256 - 2**32 - 977
N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
_GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
_GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8

_INFINITY = (0, 0, 0)  # Jacobian encoding of the point at infinity (y == 0)

_SYSTEM_RNG = random.SystemRandom()


@dataclass(frozen=True)
class SigningKeyPair:
    """An account: secret scalar, 64-byte uncompressed public point, 20-byte address."""

    sk: int
    pk: bytes
    address: bytes


@dataclass(frozen=True)
class Signature:
    """ECDSA signature with the recovery bit needed to derive the signer.

    Honestly produced signatures have r, s in [1, N) with s in the lower
    half; attacker-supplied values are validated at verification time, not
    at construction.
    """

    r: int
    s: int
    recovery_id: int


def _jacobian_double(point):
    x, y, z = point
    if y == 0:
        return _INFINITY
    y_sq = y * y % P
    s = 4 * x * y_sq % P
    m = 3 * x * x % P  # curve coefficient a = 0
    nx = (m * m - 2 * s) % P
    ny = (m * (s - nx) - 8 * y_sq * y_sq) % P
    return nx, ny, 2 * y * z % P


def _jacobian_add(p1, p2):
    if p1[1] == 0:
        return p2
    if p2[1] == 0:
        return p1
    z1_sq = p1[2] * p1[2] % P
    z2_sq = p2[2] * p2[2] % P
    u1 = p1[0] * z2_sq % P
    u2 = p2[0] * z1_sq % P
    s1 = p1[1] * z2_sq * p2[2] % P
    s2 = p2[1] * z1_sq * p1[2] % P
    if u1 == u2:
        if s1 != s2:
            return _INFINITY
        return _jacobian_double(p1)
    h = u2 - u1
    r = s2 - s1
    h_sq = h * h % P
    h_cu = h * h_sq % P
    u1h_sq = u1 * h_sq % P
    nx = (r * r - h_cu - 2 * u1h_sq) % P
    ny = (r * (u1h_sq - nx) - s1 * h_cu) % P
    return nx, ny, h * p1[2] * p2[2] % P


def _jacobian_mul(point, scalar: int):
    accumulator = _INFINITY
    addend = point
    while scalar:
        if scalar & 1:
            accumulator = _jacobian_add(accumulator, addend)
        addend = _jacobian_double(addend)
        scalar >>= 1
    return accumulator


def _to_affine(point) -> tuple[int, int]:
    x, y, z = point
    if y == 0:
        return 0, 0
    z_inv = pow(z, -1, P)
    return x * z_inv * z_inv % P, y * pow(z_inv, 3, P) % P


def _build_generator_table():
    # table[w][d] = (d << 4w) * G in affine form, so k*G costs at most 64
    # additions. Affine conversion is batched through one field inversion.
    jacobian_rows = []
    base = (_GX, _GY, 1)
    for _ in range(64):
        row = [base]
        for _ in range(14):
            row.append(_jacobian_add(row[-1], base))
        jacobian_rows.append(row)
        for _ in range(4):
            base = _jacobian_double(base)

    flat = [pt for row in jacobian_rows for pt in row]
    prefix = [1]
    for pt in flat:
        prefix.append(prefix[-1] * pt[2] % P)
    running = pow(prefix[-1], -1, P)
    affine: list[tuple[int, int, int]] = [_INFINITY] * len(flat)
    for i in range(len(flat) - 1, -1, -1):
        z_inv = running * prefix[i] % P
        running = running * flat[i][2] % P
        z_inv_sq = z_inv * z_inv % P
        affine[i] = (flat[i][0] * z_inv_sq % P, flat[i][1] * z_inv_sq * z_inv % P, 1)
    entries = iter(affine)
    return [[_INFINITY] + [next(entries) for _ in range(15)] for _ in range(64)]


_G_TABLE = _build_generator_table()


def _mul_generator(scalar: int):
    scalar %= N
    accumulator = _INFINITY
    for window in range(64):
        digit = (scalar >> (4 * window)) & 0xF
        if digit:
            accumulator = _jacobian_add(accumulator, _G_TABLE[window][digit])
    return accumulator


def _point_from_pubkey(pk: bytes) -> tuple[int, int]:
    if len(pk) != 64:
        raise CryptoError("public key must be 64 bytes")
    x = int.from_bytes(pk[:32], "big")
    y = int.from_bytes(pk[32:], "big")
    if x >= P or y >= P or (y * y - (pow(x, 3, P) + 7)) % P != 0:
        raise CryptoError("point not on curve")
    return x, y


def _pubkey_bytes(x: int, y: int) -> bytes:
    return x.to_bytes(32, "big") + y.to_bytes(32, "big")


def address_from_pubkey(pk: bytes) -> bytes:
    """Derive the 20-byte account address: rightmost 20 bytes of keccak256(pk)."""
    if len(pk) != 64:
        raise CryptoError("public key must be 64 bytes")
    return keccak256(pk)[12:]


def keypair_from_scalar(sk: int) -> SigningKeyPair:
    if not 1 <= sk < N:
        raise CryptoError("invalid signing key")
    x, y = _to_affine(_mul_generator(sk))
    pk = _pubkey_bytes(x, y)
    return SigningKeyPair(sk=sk, pk=pk, address=address_from_pubkey(pk))


def gen_account(rng: random.Random | None = None) -> SigningKeyPair:
    """Generate a fresh account key pair, rejection-sampling the scalar."""
    rng = rng or _SYSTEM_RNG
    while True:
        sk = int.from_bytes(rng.randbytes(32), "big")
        if 1 <= sk < N:
            return keypair_from_scalar(sk)


def _rfc6979_nonces(digest: bytes, sk: int):
    x = sk.to_bytes(32, "big")
    h1 = (int.from_bytes(digest, "big") % N).to_bytes(32, "big")
    v = b"\x01" * 32
    k = b"\x00" * 32
    k = hmac.new(k, v + b"\x00" + x + h1, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    k = hmac.new(k, v + b"\x01" + x + h1, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    while True:
        v = hmac.new(k, v, hashlib.sha256).digest()
        candidate = int.from_bytes(v, "big")
        if 1 <= candidate < N:
            yield candidate
        k = hmac.new(k, v + b"\x00", hashlib.sha256).digest()
        v = hmac.new(k, v, hashlib.sha256).digest()


def sign(digest: bytes, sk: int) -> Signature:
    """Sign a 32-byte digest; deterministic, canonical low-s output."""
    if not 1 <= sk < N:
        raise CryptoError("invalid signing key")
    if len(digest) != 32:
        raise CryptoError("digest must be 32 bytes")
    e = int.from_bytes(digest, "big") % N
    for nonce in _rfc6979_nonces(digest, sk):
        rx, ry = _to_affine(_mul_generator(nonce))
        r = rx % N
        # rx >= N would need recovery_id 2 or 3; retry instead (p ~ 2^-127)
        if r == 0 or rx >= N:
            continue
        s = pow(nonce, -1, N) * (e + r * sk) % N
        if s == 0:
            continue
        recovery_id = ry & 1
        if s > N // 2:
            s = N - s
            recovery_id ^= 1
        return Signature(r=r, s=s, recovery_id=recovery_id)


def verify(digest: bytes, sig: Signature, pk: bytes) -> bool:
    """Check an ECDSA signature over digest against a 64-byte public key."""
    if len(digest) != 32:
        return False
    try:
        point = _point_from_pubkey(pk)
    except CryptoError:
        return False
    if not (1 <= sig.r < N and 1 <= sig.s < N):
        return False
    e = int.from_bytes(digest, "big") % N
    w = pow(sig.s, -1, N)
    u1 = e * w % N
    u2 = sig.r * w % N
    combined = _jacobian_add(_mul_generator(u1), _jacobian_mul((point[0], point[1], 1), u2))
    if combined[1] == 0:
        return False
    x, _ = _to_affine(combined)
    return x % N == sig.r


def recover_signer(digest: bytes, sig: Signature) -> bytes:
    """Recover the 20-byte address whose key produced sig over digest."""
    pk = recover_pubkey(digest, sig)
    return address_from_pubkey(pk)


def recover_pubkey(digest: bytes, sig: Signature) -> bytes:
    if len(digest) != 32:
        raise CryptoError("unrecoverable signature")
    if not (1 <= sig.r < N and 1 <= sig.s < N) or sig.recovery_id not in (0, 1):
        raise CryptoError("unrecoverable signature")
    x = sig.r
    y_sq = (pow(x, 3, P) + 7) % P
    y = pow(y_sq, (P + 1) // 4, P)
    if y * y % P != y_sq:
        raise CryptoError("unrecoverable signature")
    if (y & 1) != sig.recovery_id:
        y = P - y
    e = int.from_bytes(digest, "big") % N
    r_inv = pow(sig.r, -1, N)
    # Q = r^-1 * (s*R - e*G), folded into one mul per point
    q = _jacobian_add(
        _jacobian_mul((x, y, 1), sig.s * r_inv % N),
        _mul_generator((N - e) * r_inv % N),
    )
    if q[1] == 0:
        raise CryptoError("unrecoverable signature")
    qx, qy = _to_affine(q)
    return _pubkey_bytes(qx, qy)
