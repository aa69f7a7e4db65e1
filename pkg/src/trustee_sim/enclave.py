"""Simulated enclave: key generation, state sealing with rollback protection,
winner revelation, and attestation report creation.

The enclave is stateless between calls. Everything it must remember travels
in the sealed blob, and the platform's monotonic counter defends against a
host replaying an old blob into a fresh instance: revelation only proceeds
when the sealed counter equals the live counter, and bumps it first thing.
"""

from __future__ import annotations

import os
import random
import threading
from dataclasses import dataclass, replace
from pathlib import Path

from .attestation import Quote, quote_signing_digest
from .chain import RawTransaction, sign_transaction
from .contract import set_winner_args
from .crypto import (
    CryptoError,
    DhKeyPair,
    SigningKeyPair,
    aead_decrypt,
    aead_encrypt,
    dh_keygen,
    dh_shared_secret,
    gen_account,
    kdf,
    keccak256,
    keypair_from_scalar,
    sha256,
    sign,
)
from .crypto.ecies import derive_keys, dh_keypair_from_secret

ENCLAVE_CODE_IDENTITY = "trustee-sim-enclave/1.0"
ENCLAVE_MEASUREMENT = sha256(ENCLAVE_CODE_IDENTITY.encode("ascii"))

_SEAL_INFO = b"trustee-seal-v1"
_SEALED_PAYLOAD_LEN = 32 + 32 + 8  # signing scalar, dh secret, counter
_SYSTEM_RNG = random.SystemRandom()


class EnclaveError(Exception):
    pass


class PlatformSim:
    """Simulated SGX-capable host.

    Holds what the hardware would hold: a seal key bound to (platform,
    enclave code), a non-volatile monotonic counter, and the device
    attestation key the quoting machinery signs with. The counter can be
    backed by a file (8-byte big-endian, write-then-rename) so it survives
    process restarts.
    """

    def __init__(self, platform_id: bytes, attestation_key: SigningKeyPair,
                 measurement: bytes = ENCLAVE_MEASUREMENT,
                 counter_file: Path | None = None):
        if len(platform_id) != 16:
            raise ValueError("platform_id must be 16 bytes")
        self.platform_id = platform_id
        self.attestation_key = attestation_key
        self.measurement = measurement
        self.seal_key = sha256(b"platform-seal-key/1" + platform_id + measurement)
        self._counter_file = Path(counter_file) if counter_file is not None else None
        self._lock = threading.Lock()
        self._counter = self._load_counter()

    @classmethod
    def create(cls, rng: random.Random | None = None, *,
               measurement: bytes = ENCLAVE_MEASUREMENT,
               counter_file: Path | None = None) -> "PlatformSim":
        rng = rng or _SYSTEM_RNG
        return cls(rng.randbytes(16), gen_account(rng), measurement=measurement,
                   counter_file=counter_file)

    def _load_counter(self) -> int:
        if self._counter_file is not None and self._counter_file.exists():
            return int.from_bytes(self._counter_file.read_bytes(), "big")
        return 0

    def _persist_counter(self, value: int) -> None:
        if self._counter_file is None:
            return
        tmp = self._counter_file.with_name(self._counter_file.name + ".tmp")
        tmp.write_bytes(value.to_bytes(8, "big"))
        os.replace(tmp, self._counter_file)

    def counter_value(self) -> int:
        with self._lock:
            return self._counter

    def increment_and_read(self) -> int:
        with self._lock:
            bumped = self._counter + 1
            self._persist_counter(bumped)
            self._counter = bumped
            return bumped

    def advance_if_current(self, expected: int) -> int | None:
        """Atomic compare-and-increment; None when `expected` is stale."""
        with self._lock:
            if self._counter != expected:
                return None
            bumped = self._counter + 1
            self._persist_counter(bumped)
            self._counter = bumped
            return bumped

    def sign_quote(self, user_data: bytes) -> Quote:
        digest = quote_signing_digest(self.measurement, user_data, self.platform_id)
        return Quote(
            measurement=self.measurement,
            user_data=user_data,
            platform_id=self.platform_id,
            signature=sign(digest, self.attestation_key.sk),
        )


@dataclass(frozen=True)
class EnclaveSecrets:
    """Never leaves the enclave boundary except through seal()."""

    signing: SigningKeyPair
    exchange: DhKeyPair
    counter: int


@dataclass(frozen=True)
class SealedState:
    blob: bytes


@dataclass(frozen=True)
class WinnerTransaction:
    """The enclave's verdict: bid-set digest, winner index, clearing price,
    wrapped in a chain transaction signed with the enclave's account key.

    `empty` marks the rollback-abort case, which decides nothing.
    """

    empty: bool
    bids_digest: bytes | None = None
    index: int | None = None
    price: int | None = None
    envelope: RawTransaction | None = None

    @property
    def signature(self):
        return self.envelope.signature if self.envelope is not None else None


def seal(platform: PlatformSim, secrets: EnclaveSecrets,
         rng: random.Random | None = None) -> SealedState:
    """Encrypt secrets under keys derived from the platform seal key; the
    derivation info binds (platform_id, measurement) so nothing else unseals it."""
    rng = rng or _SYSTEM_RNG
    payload = (
        secrets.signing.sk.to_bytes(32, "big")
        + secrets.exchange.sk
        + secrets.counter.to_bytes(8, "big")
    )
    keys = derive_keys(platform.seal_key, _SEAL_INFO + platform.platform_id + platform.measurement)
    iv = rng.randbytes(16)
    ct, tag = aead_encrypt(payload, iv, keys.k1, keys.k2)
    return SealedState(blob=iv + ct + tag)


def unseal(platform: PlatformSim, sealed: SealedState) -> EnclaveSecrets:
    blob = sealed.blob
    if len(blob) != 16 + _SEALED_PAYLOAD_LEN + 32:
        raise EnclaveError("unsealing failure")
    iv, ct, tag = blob[:16], blob[16:16 + _SEALED_PAYLOAD_LEN], blob[16 + _SEALED_PAYLOAD_LEN:]
    keys = derive_keys(platform.seal_key, _SEAL_INFO + platform.platform_id + platform.measurement)
    try:
        payload = aead_decrypt(ct, iv, tag, keys.k1, keys.k2)
    except CryptoError:
        raise EnclaveError("unsealing failure") from None
    return EnclaveSecrets(
        signing=keypair_from_scalar(int.from_bytes(payload[:32], "big")),
        exchange=dh_keypair_from_secret(payload[32:64]),
        counter=int.from_bytes(payload[64:], "big"),
    )


def initialize(platform: PlatformSim,
               rng: random.Random | None = None) -> tuple[SealedState, bytes, bytes]:
    """Boot a fresh enclave identity.

    Generates the account key pair used to sign the verdict and the DH key
    pair bidders seal against, folds in a fresh counter value, and returns
    (sealed secrets, account address, DH public key).
    """
    rng = rng or _SYSTEM_RNG
    signing = gen_account(rng)
    exchange = dh_keygen(rng)
    try:
        counter = platform.increment_and_read()
    except OSError as exc:
        raise EnclaveError("counter unavailable") from exc
    secrets = EnclaveSecrets(signing=signing, exchange=exchange, counter=counter)
    return seal(platform, secrets, rng), signing.address, exchange.pk


def get_quote(platform: PlatformSim, sealed: SealedState, nonce: bytes) -> Quote:
    """Attestation report binding this enclave's public identity to the challenge."""
    if len(nonce) != 32:
        raise ValueError("nonce must be 32 bytes")
    try:
        secrets = unseal(platform, sealed)
    except EnclaveError:
        raise EnclaveError("bad sealed state") from None
    user_data = sha256(secrets.signing.address + secrets.exchange.pk + nonce)
    return platform.sign_quote(user_data)


def select_winner(values: list[int]) -> tuple[int, int]:
    """Single-pass scan for (winner index, second-highest value).

    Earliest maximum wins; ties feed the runner-up price, and a lone bid
    prices at zero.
    """
    top = 0
    second = 0
    index = -1
    for i, value in enumerate(values):
        if index < 0 or value > top:
            second = top if index >= 0 else 0
            top = value
            index = i
        elif value > second:
            second = value
    return index, second


def reveal_winner(platform: PlatformSim, ciphertexts: list[bytes], ephemeral_keys: list[bytes],
                  sealed: SealedState, contract_address: bytes,
                  rng: random.Random | None = None) -> tuple[WinnerTransaction, SealedState]:
    """Open the sealed bids and emit the signed verdict transaction.

    Rollback guard first: the sealed counter must equal the live platform
    counter, which is bumped (and the state resealed) before any bid is
    decrypted, so no crash or replay yields a second verdict from the same
    sealed state. Undecryptable bids count as zero but stay in the digest,
    keeping the contract's binding check honest about what was received.
    """
    if len(ciphertexts) != len(ephemeral_keys) or not ciphertexts:
        raise ValueError("need equal-length, non-empty bid lists")
    rng = rng or _SYSTEM_RNG
    try:
        secrets = unseal(platform, sealed)
    except EnclaveError:
        raise EnclaveError("bad sealed state") from None

    fresh = platform.advance_if_current(secrets.counter)
    if fresh is None:
        return WinnerTransaction(empty=True), sealed
    resealed = seal(platform, replace(secrets, counter=fresh), rng)

    values = [
        open_sealed_bid(secrets.exchange.sk, ct, pk)
        for ct, pk in zip(ciphertexts, ephemeral_keys)
    ]
    index, second = select_winner(values)
    digest = keccak256(b"".join(ct + pk for ct, pk in zip(ciphertexts, ephemeral_keys)))
    envelope = sign_transaction(
        contract_address, "SetWinner", set_winner_args(digest, index, second), 0,
        secrets.signing.sk,
    )
    verdict = WinnerTransaction(
        empty=False, bids_digest=digest, index=index, price=second, envelope=envelope,
    )
    return verdict, resealed


def open_sealed_bid(exchange_sk: bytes, ciphertext: bytes, ephemeral_key: bytes) -> int:
    """ECIES-decrypt one sealed bid; anything malformed or forged is worth 0."""
    if len(ciphertext) != 80 or len(ephemeral_key) != 32:
        return 0
    ct, iv, tag = ciphertext[:32], ciphertext[32:48], ciphertext[48:]
    try:
        keys = kdf(dh_shared_secret(exchange_sk, ephemeral_key))
        plaintext = aead_decrypt(ct, iv, tag, keys.k1, keys.k2)
    except CryptoError:
        return 0
    return int.from_bytes(plaintext, "big")
