"""Scenario-building helpers shared across the contract, chain, and acceptance tests."""

from __future__ import annotations

import random
from dataclasses import dataclass

from trustee_sim.attestation import IasRegistry
from trustee_sim.chain import Chain, new_chain, sign_transaction
from trustee_sim.contract import (
    AuctionContract,
    Phase,
    set_winner_args,
    start_auction_args,
    submit_bid_args,
)
from trustee_sim.crypto import SigningKeyPair, gen_account
from trustee_sim.enclave import ENCLAVE_MEASUREMENT, PlatformSim, SealedState, initialize

DEPOSIT = 100
T1_OFFSET = 10
T2_OFFSET = 20
T3_OFFSET = 30


@dataclass
class AuctionFixture:
    chain: Chain
    auctioneer: SigningKeyPair
    enclave_key: SigningKeyPair  # plain account standing in for the enclave identity
    bidders: list[SigningKeyPair]
    deposit: int
    t1: int
    t2: int
    t3: int

    def bid_blob(self, i: int) -> tuple[bytes, bytes]:
        # opaque, unique sealed-bid stand-ins; contract never inspects them
        return bytes([0xB0 + i]) * 80, bytes([0xE0 + i]) * 32


def make_auction(rng: random.Random, *, n_bidders: int = 3, deposit: int = DEPOSIT,
                 start: bool = True, submit_bids: bool = True,
                 offsets: tuple[int, int, int] = (T1_OFFSET, T2_OFFSET, T3_OFFSET)) -> AuctionFixture:
    auctioneer = gen_account(rng)
    enclave_key = gen_account(rng)
    bidders = [gen_account(rng) for _ in range(n_bidders)]
    chain = Chain(new_chain(AuctionContract(), rng.randbytes(20)))
    chain.fund(auctioneer.address, deposit * 4)
    for bidder in bidders:
        chain.fund(bidder.address, deposit * 4)

    base = chain.block_number
    fixture = AuctionFixture(
        chain=chain,
        auctioneer=auctioneer,
        enclave_key=enclave_key,
        bidders=bidders,
        deposit=deposit,
        t1=base + offsets[0],
        t2=base + offsets[1],
        t3=base + offsets[2],
    )
    if start:
        receipt = start_auction(fixture)
        assert receipt.status == "ok", receipt
        if submit_bids:
            for i in range(n_bidders):
                receipt = submit_bid(fixture, i)
                assert receipt.status == "ok", receipt
    return fixture


def start_auction(fx: AuctionFixture, *, value: int | None = None,
                  t1: int | None = None, t2: int | None = None, t3: int | None = None):
    args = start_auction_args(
        fx.enclave_key.address, bytes(32),
        fx.t1 if t1 is None else t1,
        fx.t2 if t2 is None else t2,
        fx.t3 if t3 is None else t3,
        fx.deposit,
    )
    tx = sign_transaction(fx.chain.contract_address, "StartAuction", args,
                          fx.deposit if value is None else value, fx.auctioneer.sk)
    return fx.chain.submit(tx)


def submit_bid(fx: AuctionFixture, i: int, *, value: int | None = None,
               blob: tuple[bytes, bytes] | None = None):
    ciphertext, ephemeral = blob if blob is not None else fx.bid_blob(i)
    tx = sign_transaction(fx.chain.contract_address, "SubmitBid",
                          submit_bid_args(ciphertext, ephemeral),
                          fx.deposit if value is None else value, fx.bidders[i].sk)
    return fx.chain.submit(tx)


def set_winner(fx: AuctionFixture, *, digest: bytes | None = None, index: int = 0,
               price: int = 0, signer: SigningKeyPair | None = None):
    digest = digest if digest is not None else fx.chain.contract.stored_bids_digest()
    signer = signer or fx.enclave_key
    tx = sign_transaction(fx.chain.contract_address, "SetWinner",
                          set_winner_args(digest, index, price), 0, signer.sk)
    return fx.chain.submit(tx)


def withdraw(fx: AuctionFixture, key: SigningKeyPair):
    tx = sign_transaction(fx.chain.contract_address, "Withdraw", b"", 0, key.sk)
    return fx.chain.submit(tx)


def reset(fx: AuctionFixture, key: SigningKeyPair | None = None):
    tx = sign_transaction(fx.chain.contract_address, "Reset", b"", 0, (key or fx.auctioneer).sk)
    return fx.chain.submit(tx)


# ---------------------------------------------------------------------------
# Auctions wired to a real enclave instead of a stand-in key
# ---------------------------------------------------------------------------


@dataclass
class EnclaveAuction:
    chain: Chain
    auctioneer: SigningKeyPair
    platform: PlatformSim
    sealed: SealedState
    enclave_address: bytes
    enclave_dh_public: bytes
    registry: IasRegistry
    deposit: int
    t1: int
    t2: int
    t3: int


def make_enclave_auction(rng: random.Random, *, deposit: int = DEPOSIT,
                         offsets: tuple[int, int, int] = (T1_OFFSET, T2_OFFSET, T3_OFFSET),
                         ) -> EnclaveAuction:
    platform = PlatformSim.create(rng)
    registry = IasRegistry(ENCLAVE_MEASUREMENT)
    registry.register(platform.platform_id, platform.attestation_key.pk)
    sealed, enclave_address, enclave_dh_public = initialize(platform, rng)

    auctioneer = gen_account(rng)
    chain = Chain(new_chain(AuctionContract(), rng.randbytes(20)))
    chain.fund(auctioneer.address, deposit * 4)
    base = chain.block_number
    t1, t2, t3 = (base + off for off in offsets)
    args = start_auction_args(enclave_address, enclave_dh_public, t1, t2, t3, deposit)
    receipt = chain.submit(sign_transaction(chain.contract_address, "StartAuction",
                                            args, deposit, auctioneer.sk))
    assert receipt.status == "ok", receipt
    return EnclaveAuction(
        chain=chain, auctioneer=auctioneer, platform=platform, sealed=sealed,
        enclave_address=enclave_address, enclave_dh_public=enclave_dh_public,
        registry=registry, deposit=deposit, t1=t1, t2=t2, t3=t3,
    )


# ---------------------------------------------------------------------------
# Exhaustive phase-machine enumeration
# ---------------------------------------------------------------------------

WINDOWS = ("pre_t1", "at_t1", "reveal", "at_t2", "withdraw", "at_t3", "post_t3")


def drive_to(fx: AuctionFixture, phase: Phase, window: str) -> None:
    """Advance a started 3-bidder auction into (phase, window).

    The chain is positioned so the *next* transaction executes at the
    window's representative block.
    """
    if phase in (Phase.REVEALED, Phase.REJECTED):
        fx.chain.advance_to(fx.t1 + 1)
        digest = fx.chain.contract.stored_bids_digest()
        if phase is Phase.REJECTED:
            digest = bytes(32)
        receipt = set_winner(fx, digest=digest, index=1, price=7)
        assert receipt.status == "ok" and fx.chain.contract.phase is phase

    target = {
        "pre_t1": fx.t1 - 1,
        "at_t1": fx.t1,
        "reveal": fx.t1 + 2,
        "at_t2": fx.t2,
        "withdraw": fx.t2 + 1,
        "at_t3": fx.t3,
        "post_t3": fx.t3 + 1,
    }[window]
    fx.chain.advance_to(target)


def reachable(phase: Phase, window: str) -> bool:
    if phase is Phase.BIDDING:
        return True
    # Revealed/Rejected require a SetWinner strictly inside (t1, t2)
    return window not in ("pre_t1", "at_t1")


def expected_transition(phase: Phase, function: str, window: str):
    """(status, reason, resulting phase) for a canonical well-formed call.

    Canonical means: correct actor, valid arguments, exact deposit. The
    table mirrors the contract pseudocode with strict window comparisons.
    """
    if function == "StartAuction":
        return ("reverted", "bad phase", phase)  # enumeration never starts from Init
    if function == "SubmitBid":
        if phase is not Phase.BIDDING:
            return ("reverted", "bad phase", phase)
        if window == "pre_t1":
            return ("ok", None, Phase.BIDDING)
        return ("reverted", "bidding closed", phase)
    if function == "SetWinner":
        if phase is not Phase.BIDDING:
            return ("reverted", "bad phase", phase)
        if window == "reveal":
            return ("ok", None, Phase.REVEALED)
        return ("reverted", "window", phase)
    if function == "Withdraw":
        if window != "withdraw":
            return ("reverted", "window", phase)
        if phase is Phase.BIDDING:
            return ("reverted", "ineligible", phase)
        return ("ok", None, phase)  # losing bidder withdraws in Revealed/Rejected
    if function == "Reset":
        if window == "post_t3":
            return ("ok", None, Phase.INIT)
        return ("reverted", "window", phase)
    raise AssertionError(function)


def fire_canonical(fx: AuctionFixture, phase: Phase, function: str,
                   extra_bidder: SigningKeyPair | None = None):
    """Fire `function` with canonical valid arguments for the current state.

    `extra_bidder` must already be funded; it submits the canonical bid so
    SubmitBid never trips the duplicate-sender guard.
    """
    if function == "StartAuction":
        return start_auction(fx)
    if function == "SubmitBid":
        tx = sign_transaction(fx.chain.contract_address, "SubmitBid",
                              submit_bid_args(b"\xAA" * 80, b"\xBB" * 32),
                              fx.deposit, extra_bidder.sk)
        return fx.chain.submit(tx)
    if function == "SetWinner":
        return set_winner(fx, index=1, price=7)
    if function == "Withdraw":
        # bidder 0 lost (winner is bidder 1 when Revealed), so always eligible
        return withdraw(fx, fx.bidders[0])
    if function == "Reset":
        return reset(fx)
    raise AssertionError(function)


@dataclass
class PhaseMachineCase:
    phase: Phase
    function: str
    window: str
    receipt: object
    fx: AuctionFixture
    expected: tuple
    escrow_before: int
    supply_before: int


def enumerate_phase_machine(seed: int = 0x5EED):
    """Fire every (phase, function, window) combination on fresh fixtures."""
    from trustee_sim.chain import total_supply

    for phase in (Phase.BIDDING, Phase.REVEALED, Phase.REJECTED):
        for window in WINDOWS:
            if not reachable(phase, window):
                continue
            for function in ("StartAuction", "SubmitBid", "SetWinner", "Withdraw", "Reset"):
                case_rng = random.Random(seed)
                fx = make_auction(case_rng)
                extra_bidder = gen_account(case_rng)
                fx.chain.fund(extra_bidder.address, fx.deposit)
                drive_to(fx, phase, window)
                escrow_before = fx.chain.contract.escrow
                supply_before = total_supply(fx.chain.state)
                receipt = fire_canonical(fx, phase, function, extra_bidder)
                yield PhaseMachineCase(
                    phase=phase, function=function, window=window, receipt=receipt,
                    fx=fx, expected=expected_transition(phase, function, window),
                    escrow_before=escrow_before, supply_before=supply_before,
                )
