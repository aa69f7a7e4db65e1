"""Golden test vectors: fixed inputs, frozen primitive outputs.

Each vector is one JSON file of the form {name, inputs, outputs} with every
byte string as lowercase hex (no 0x prefix). Regeneration is byte-stable,
so any other implementation of this protocol can diff against these files
directly. Vectors with published sources (FIPS 180-4, RFC 7748, NIST SP
800-38A) reuse the published inputs verbatim.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import random

from .bidder import BidderAgent, seal_bid
from .crypto import aead_encrypt, kdf, keccak256, keypair_from_scalar, sha256, sign
from .crypto.ecies import dh_keypair_from_secret, dh_shared_secret


class _FixedBytes(random.Random):
    """Entropy stub that returns one predetermined byte string."""

    def __init__(self, value: bytes):
        super().__init__(0)
        self._value = value

    def randbytes(self, n: int) -> bytes:
        assert n == len(self._value)
        return self._value


def build_vectors() -> list[dict]:
    vectors = []

    for label, message in (
        ("empty", b""),
        ("abc", b"abc"),
        ("multiblock", bytes(range(256)) * 2),
    ):
        vectors.append({
            "name": f"keccak256_{label}",
            "inputs": {"data": message.hex()},
            "outputs": {"digest": keccak256(message).hex()},
        })

    for label, message in (("empty", b""), ("abc", b"abc")):
        vectors.append({
            "name": f"sha256_{label}",
            "inputs": {"data": message.hex()},
            "outputs": {"digest": sha256(message).hex()},
        })

    nine = b"\x09" + b"\x00" * 31
    vectors.append({
        "name": "x25519_base_iteration",
        "inputs": {"scalar": nine.hex(), "u": nine.hex()},
        "outputs": {"shared": dh_shared_secret(nine, nine).hex()},
    })

    alice_sk = bytes.fromhex("77076d0a7318a57d3c16c17251b26645df4c2f87ebc0992ab177fba51db92c2a")
    bob_sk = bytes.fromhex("5dab087e624a8a4b79e17f8b83800ee66f3bb1292618b6fd1c2f8b27ff88e0eb")
    alice = dh_keypair_from_secret(alice_sk)
    bob = dh_keypair_from_secret(bob_sk)
    vectors.append({
        "name": "x25519_rfc7748_exchange",
        "inputs": {"alice_sk": alice_sk.hex(), "bob_sk": bob_sk.hex()},
        "outputs": {
            "alice_pk": alice.pk.hex(),
            "bob_pk": bob.pk.hex(),
            "shared": dh_shared_secret(alice_sk, bob.pk).hex(),
        },
    })

    ss = b"\x0b" * 32
    keys = kdf(ss)
    vectors.append({
        "name": "hkdf_fixed_secret",
        "inputs": {"ss": ss.hex()},
        "outputs": {"k1": keys.k1.hex(), "k2": keys.k2.hex()},
    })

    nist_key = bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c")
    nist_iv = bytes.fromhex("f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff")
    nist_pt = bytes.fromhex(
        "6bc1bee22e409f96e93d7e117393172a"
        "ae2d8a571e03ac9c9eb76fac45af8e51"
        "30c81c46a35ce411e5fbc1191a0a52ef"
        "f69f2445df4f9b17ad2b417be66c3710"
    )
    ct, tag = aead_encrypt(nist_pt, nist_iv, nist_key, b"\x00" * 32)
    vectors.append({
        "name": "aes128ctr_nist_sp800_38a_f51",
        "inputs": {
            "k1": nist_key.hex(), "k2": (b"\x00" * 32).hex(),
            "iv": nist_iv.hex(), "plaintext": nist_pt.hex(),
        },
        "outputs": {"ciphertext": ct.hex(), "tag": tag.hex()},
    })

    digest = hashlib.sha256(b"Satoshi Nakamoto").digest()
    signature = sign(digest, 1)
    account = keypair_from_scalar(1)
    vectors.append({
        "name": "ecdsa_deterministic_sk1",
        "inputs": {"sk": f"{1:064x}", "digest": digest.hex()},
        "outputs": {
            "r": f"{signature.r:064x}",
            "s": f"{signature.s:064x}",
            "recovery_id": f"{signature.recovery_id:02x}",
            "pk": account.pk.hex(),
            "address": account.address.hex(),
        },
    })

    for scalar in (2, 0xDEADBEEF):
        account = keypair_from_scalar(scalar)
        vectors.append({
            "name": f"account_address_sk{scalar}",
            "inputs": {"sk": f"{scalar:064x}"},
            "outputs": {"pk": account.pk.hex(), "address": account.address.hex()},
        })

    bid_sk = bytes(range(32))
    enclave_sk = bytes(range(32, 64))
    iv = bytes(range(16))
    value = 7
    enclave_pair = dh_keypair_from_secret(enclave_sk)
    agent = BidderAgent(
        account=keypair_from_scalar(1),
        bid_value=value,
        ephemeral=dh_keypair_from_secret(bid_sk),
    )
    sealed = seal_bid(agent, enclave_pair.pk, _FixedBytes(iv))
    vectors.append({
        "name": "seal_bid_pipeline",
        "inputs": {
            "bid_sk": bid_sk.hex(),
            "enclave_dh_sk": enclave_sk.hex(),
            "iv": iv.hex(),
            "value": value.to_bytes(32, "big").hex(),
        },
        "outputs": {
            "enclave_dh_pk": enclave_pair.pk.hex(),
            "ephemeral_pk": sealed.ephemeral_key.hex(),
            "sealed_bid": sealed.ciphertext.hex(),
        },
    })

    return vectors


def write_vectors(out_dir: Path) -> list[Path]:
    """Write one JSON file per vector; byte-identical on every run."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for vector in build_vectors():
        path = out_dir / f"{vector['name']}.json"
        path.write_text(json.dumps(vector, indent=2, sort_keys=True) + "\n")
        written.append(path)
    return written
