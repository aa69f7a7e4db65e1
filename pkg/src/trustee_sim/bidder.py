"""Bidder agent: attestation-gated bid sealing and submission.

A wary bidder refuses to seal anything until a fresh-nonce attestation
round proves the posted keys came out of the genuine enclave. The sealed
bid itself is ciphertext||iv||tag next to the ephemeral public key.
"""

from __future__ import annotations

import random
from collections.abc import Callable
from dataclasses import dataclass, field

from .attestation import IasRegistry, Quote, bidder_check_quote, ias_verify
from .chain import Chain, Receipt, sign_transaction
from .contract import submit_bid_args
from .crypto import (
    CryptoError,
    DhKeyPair,
    SigningKeyPair,
    aead_encrypt,
    dh_keygen,
    dh_shared_secret,
    gen_account,
    kdf,
)

BID_PLAINTEXT_LEN = 32
SEALED_BID_LEN = BID_PLAINTEXT_LEN + 16 + 32  # ct || iv || tag


@dataclass(frozen=True)
class SealedBid:
    ciphertext: bytes  # ct || iv || tag
    ephemeral_key: bytes

    def __post_init__(self):
        if len(self.ciphertext) != SEALED_BID_LEN:
            raise ValueError(f"sealed bid must be {SEALED_BID_LEN} bytes")
        if len(self.ephemeral_key) != 32:
            raise ValueError("ephemeral key must be 32 bytes")

    def parts(self) -> tuple[bytes, bytes, bytes]:
        """Partition at offsets 32 and 48: (ct, iv, tag)."""
        return self.ciphertext[:32], self.ciphertext[32:48], self.ciphertext[48:]


@dataclass
class BidderAgent:
    """One bidder in one auction; the ephemeral key pair is single-use."""

    account: SigningKeyPair
    bid_value: int
    ephemeral: DhKeyPair
    sealed_once: bool = field(default=False)

    @classmethod
    def new(cls, rng: random.Random, bid_value: int) -> "BidderAgent":
        return cls(account=gen_account(rng), bid_value=bid_value, ephemeral=dh_keygen(rng))


def seal_bid(agent: BidderAgent, enclave_dh_public: bytes, rng: random.Random) -> SealedBid:
    """ECIES-seal the agent's bid value against the enclave's DH key."""
    if agent.sealed_once:
        raise ValueError("ephemeral key pair already used; one seal per auction")
    keys = kdf(dh_shared_secret(agent.ephemeral.sk, enclave_dh_public))
    iv = rng.randbytes(16)
    ct, tag = aead_encrypt(agent.bid_value.to_bytes(BID_PLAINTEXT_LEN, "big"), iv, keys.k1, keys.k2)
    agent.sealed_once = True
    return SealedBid(ciphertext=ct + iv + tag, ephemeral_key=agent.ephemeral.pk)


@dataclass(frozen=True)
class JoinOutcome:
    status: str  # submitted | abstained | rejected_by_contract
    reason: str | None = None
    receipt: Receipt | None = None


def join_auction(agent: BidderAgent, chain: Chain, challenge: Callable[[bytes], Quote],
                 registry: IasRegistry, expected_measurement: bytes, rng: random.Random,
                 *, verify_attestation: bool = True, value: int | None = None) -> JoinOutcome:
    """Challenge-verify-seal-submit; abstains the moment any check fails.

    `challenge` is whatever the relay exposes: it receives the fresh nonce
    and returns a quote that may or may not be genuine.
    """
    contract = chain.contract
    if verify_attestation:
        nonce = rng.randbytes(32)
        quote = challenge(nonce)
        verdict = ias_verify(registry, quote)
        check = bidder_check_quote(
            quote, verdict, expected_measurement,
            contract.enclave_address, contract.enclave_dh_public, nonce,
        )
        if not check.accepted:
            return JoinOutcome(status="abstained", reason=check.reason)
    try:
        sealed = seal_bid(agent, contract.enclave_dh_public, rng)
    except CryptoError as exc:
        return JoinOutcome(status="abstained", reason=str(exc))
    tx = sign_transaction(
        chain.contract_address, "SubmitBid",
        submit_bid_args(sealed.ciphertext, sealed.ephemeral_key),
        contract.deposit if value is None else value,
        agent.account.sk,
    )
    receipt = chain.submit(tx)
    if receipt.status != "ok":
        return JoinOutcome(status="rejected_by_contract", reason=receipt.revert_reason, receipt=receipt)
    return JoinOutcome(status="submitted", receipt=receipt)


def withdraw_deposit(agent: BidderAgent, chain: Chain) -> Receipt:
    """Reclaim the deposit inside the withdraw window; the receipt tells the story."""
    tx = sign_transaction(chain.contract_address, "Withdraw", b"", 0, agent.account.sk)
    return chain.submit(tx)
