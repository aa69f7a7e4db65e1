import dataclasses
import random

import pytest

from trustee_sim.chain import (
    Chain,
    Receipt,
    advance_blocks,
    fund,
    new_chain,
    sign_transaction,
    snapshot,
    submit_transaction,
    total_supply,
    transaction_digest,
)
from trustee_sim.contract import AuctionContract, Phase, submit_bid_args
from trustee_sim.crypto import Signature, gen_account

from helpers import make_auction, start_auction, submit_bid


def _fresh_state(rng):
    return new_chain(AuctionContract(), rng.randbytes(20))


def test_advance_blocks(rng):
    state = _fresh_state(rng)
    assert advance_blocks(state, 1).block_number == state.block_number + 1
    assert advance_blocks(advance_blocks(state, 3), 4).block_number == advance_blocks(state, 7).block_number
    funded = fund(state, b"\x01" * 20, 55)
    assert advance_blocks(funded, 10).balances == funded.balances
    with pytest.raises(ValueError):
        advance_blocks(state, 0)


def test_fund(rng):
    state = _fresh_state(rng)
    addr = b"\x02" * 20
    assert fund(state, addr, 0).balances.get(addr, 0) == 0
    assert fund(state, addr, 7).balances[addr] == 7
    a, b = b"\x03" * 20, b"\x04" * 20
    one_way = fund(fund(state, a, 5), b, 9)
    other_way = fund(fund(state, b, 9), a, 5)
    assert one_way.balances == other_way.balances


def test_sender_seen_by_contract_is_recovered_address(rng):
    fx = make_auction(rng, start=False, submit_bids=False)
    receipt = start_auction(fx)
    assert receipt.status == "ok"
    assert fx.chain.contract.auctioneer == fx.auctioneer.address


def test_corrupted_signature_dropped(rng):
    fx = make_auction(rng, start=False, submit_bids=False)
    before = fx.chain.state
    tx = sign_transaction(fx.chain.contract_address, "SubmitBid",
                          submit_bid_args(b"\x00" * 80, b"\x00" * 32), 0, fx.bidders[0].sk)
    bad = dataclasses.replace(tx, signature=Signature(r=0, s=0, recovery_id=0))
    receipt = fx.chain.submit(bad)
    assert receipt == Receipt("invalid", "unrecoverable signature")
    assert fx.chain.state.balances == before.balances
    assert fx.chain.block_number == before.block_number + 1


def test_tampered_transaction_changes_sender(rng):
    # a valid signature over different content recovers some other sender,
    # so the auctioneer's start call no longer installs the signing account
    fx = make_auction(rng, start=False, submit_bids=False)
    tx = sign_transaction(fx.chain.contract_address, "SubmitBid",
                          submit_bid_args(b"\x01" * 80, b"\x02" * 32), 0, fx.bidders[0].sk)
    tampered = dataclasses.replace(tx, value=1)
    receipt = fx.chain.submit(tampered)
    # either an unfunded recovered sender or a phase revert; never bidder 0's bid
    assert receipt.status in ("reverted", "invalid")
    assert fx.bidders[0].address not in fx.chain.contract.bids


def test_reverted_call_leaves_state_identical_except_block(rng):
    fx = make_auction(rng)
    state_before = fx.chain.state
    reverting = [
        # wrong phase for StartAuction
        lambda: start_auction(fx),
        # duplicate bid
        lambda: submit_bid(fx, 0),
        # unknown function
        lambda: fx.chain.submit(sign_transaction(
            fx.chain.contract_address, "Nonsense", b"", 0, fx.auctioneer.sk)),
        # wrong target address
        lambda: fx.chain.submit(sign_transaction(
            bytes(20), "Withdraw", b"", 0, fx.auctioneer.sk)),
        # insufficient funds
        lambda: fx.chain.submit(sign_transaction(
            fx.chain.contract_address, "SubmitBid",
            submit_bid_args(b"\x00" * 80, b"\x00" * 32), 10**9, fx.bidders[1].sk)),
    ]
    for call in reverting:
        receipt = call()
        assert receipt.status == "reverted"
        after = fx.chain.state
        assert after.balances == state_before.balances
        assert snapshot(after)["contract"] == snapshot(state_before)["contract"]
        state_before = after


def test_conservation_across_random_traffic():
    rng = random.Random(0xC0115)
    fx = make_auction(rng, start=False, submit_bids=False)
    supply = total_supply(fx.chain.state)
    start_auction(fx)
    assert total_supply(fx.chain.state) == supply
    actions = [
        lambda: submit_bid(fx, rng.randrange(3)),
        lambda: submit_bid(fx, rng.randrange(3), value=fx.deposit * 2),
        lambda: fx.chain.advance(1),
        lambda: fx.chain.submit(sign_transaction(
            fx.chain.contract_address, "Withdraw", b"", 0, fx.bidders[0].sk)),
    ]
    for _ in range(40):
        rng.choice(actions)()
        assert total_supply(fx.chain.state) == supply


def test_unknown_function_reverts(rng):
    fx = make_auction(rng, start=False, submit_bids=False)
    receipt = fx.chain.submit(sign_transaction(
        fx.chain.contract_address, "SelfDestruct", b"", 0, fx.auctioneer.sk))
    assert receipt == Receipt("reverted", "unknown function")


def test_transaction_digest_is_unambiguous():
    to = b"\x07" * 20
    base = transaction_digest(to, "SubmitBid", b"ab" + b"c", 5)
    assert base == transaction_digest(to, "SubmitBid", b"abc", 5)
    # length-prefixing separates fields: moving bytes between fields changes it
    assert transaction_digest(to, "SubmitBi", b"dabc", 5) != base
    assert transaction_digest(to, "SubmitBid", b"abc", 6) != base
    assert transaction_digest(b"\x08" * 20, "SubmitBid", b"abc", 5) != base


def test_chain_wrapper_advance_to(rng):
    fx = make_auction(rng, start=False, submit_bids=False)
    fx.chain.advance_to(50)
    assert fx.chain.block_number == 49  # next tx executes at block 50
    fx.chain.advance_to(10)
    assert fx.chain.block_number == 49  # never goes backwards


def test_one_transaction_per_block(rng):
    fx = make_auction(rng, start=False, submit_bids=False)
    b0 = fx.chain.block_number
    start_auction(fx)
    assert fx.chain.block_number == b0 + 1
    submit_bid(fx, 0)
    assert fx.chain.block_number == b0 + 2


def test_value_deducted_and_change_returned(rng):
    fx = make_auction(rng, start=False, submit_bids=False)
    start_auction(fx)
    before = fx.chain.balance(fx.bidders[0].address)
    receipt = submit_bid(fx, 0, value=fx.deposit * 3)
    assert receipt.status == "ok"
    # deposit kept in escrow, the rest returned as change
    assert fx.chain.balance(fx.bidders[0].address) == before - fx.deposit
    assert fx.chain.contract.escrow == fx.deposit * 2


def test_contract_phase_reached(rng):
    fx = make_auction(rng)
    assert fx.chain.contract.phase is Phase.BIDDING
    assert len(fx.chain.contract.bidders) == 3
