"""The auction escrow contract: a phase machine holding deposits.

The contract never learns bid values. It stores sealed blobs, binds the
enclave's verdict to the exact bid set through a keccak256 commitment, and
pays deposits back only to eligible parties inside the withdraw window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .crypto import keccak256
from .encoding import decode_fields, decode_uint, encode_fields, encode_uint


class Phase(str, Enum):
    INIT = "Init"
    BIDDING = "Bidding"
    REVEALED = "Revealed"
    REJECTED = "Rejected"


class ContractRevert(Exception):
    """Aborts the current call; the chain rolls back every effect."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _require(condition: bool, reason: str) -> None:
    if not condition:
        raise ContractRevert(reason)


@dataclass
class AuctionContract:
    """Full on-chain auction state plus the five callable functions.

    Deadlines are block numbers: bids strictly before bidding_deadline, the
    winner declaration strictly inside (bidding_deadline, reveal_deadline),
    withdrawals strictly inside (reveal_deadline, withdraw_deadline).
    """

    phase: Phase = Phase.INIT
    auctioneer: bytes | None = None
    enclave_address: bytes | None = None
    enclave_dh_public: bytes | None = None
    bidding_deadline: int = 0
    reveal_deadline: int = 0
    withdraw_deadline: int = 0
    deposit: int = 0
    escrow: int = 0
    bidders: list[bytes] = field(default_factory=list)
    bids: dict[bytes, tuple[bytes, bytes]] = field(default_factory=dict)
    winner: bytes | None = None
    price: int | None = None
    withdrawn: set[bytes] = field(default_factory=set)

    # -- dispatch -----------------------------------------------------------

    def dispatch(self, function: str, args: bytes, *, sender: bytes, value: int,
                 block: int, balances: dict[bytes, int]) -> None:
        """Route a recovered-sender call into the named function.

        `value` has already been debited from the sender; anything the
        function does not keep must be credited back through `balances`.
        """
        try:
            fields = decode_fields(args)
        except ValueError:
            raise ContractRevert("bad args") from None

        if function == "StartAuction":
            _require(len(fields) == 6 and len(fields[0]) == 20 and len(fields[1]) == 32, "bad args")
            try:
                t1, t2, t3, d = (decode_uint(f) for f in fields[2:])
            except ValueError:
                raise ContractRevert("bad args") from None
            self.start_auction(sender, value, block, balances, fields[0], fields[1], t1, t2, t3, d)
        elif function == "SubmitBid":
            _require(len(fields) == 2 and len(fields[1]) == 32, "bad args")
            self.submit_bid(sender, value, block, balances, fields[0], fields[1])
        elif function == "SetWinner":
            _require(len(fields) == 3 and len(fields[0]) == 32, "bad args")
            try:
                index, price = decode_uint(fields[1]), decode_uint(fields[2])
            except ValueError:
                raise ContractRevert("bad args") from None
            self.set_winner(sender, value, block, balances, fields[0], index, price)
        elif function == "Withdraw":
            _require(len(fields) == 0, "bad args")
            self.withdraw(sender, value, block, balances)
        elif function == "Reset":
            _require(len(fields) == 0, "bad args")
            self.reset(sender, value, block, balances)
        else:
            raise ContractRevert("unknown function")

    # -- functions ----------------------------------------------------------

    def start_auction(self, sender: bytes, value: int, block: int, balances: dict[bytes, int],
                      enclave_address: bytes, enclave_dh_public: bytes,
                      t1: int, t2: int, t3: int, d: int) -> None:
        _require(self.phase is Phase.INIT, "bad phase")
        _require(value >= d, "deposit")
        _require(block < t1 < t2 < t3, "intervals")
        self.auctioneer = sender
        self.enclave_address = enclave_address
        self.enclave_dh_public = enclave_dh_public
        self.bidding_deadline = t1
        self.reveal_deadline = t2
        self.withdraw_deadline = t3
        self.deposit = d
        self.escrow += d
        self.phase = Phase.BIDDING
        _credit(balances, sender, value - d)

    def submit_bid(self, sender: bytes, value: int, block: int, balances: dict[bytes, int],
                   ciphertext: bytes, ephemeral_key: bytes) -> None:
        _require(self.phase is Phase.BIDDING, "bad phase")
        _require(block < self.bidding_deadline, "bidding closed")
        _require(value >= self.deposit, "deposit")
        _require(sender not in self.bids, "already bid")
        self.escrow += self.deposit
        self.bids[sender] = (ciphertext, ephemeral_key)
        self.bidders.append(sender)
        _credit(balances, sender, value - self.deposit)

    def set_winner(self, sender: bytes, value: int, block: int, balances: dict[bytes, int],
                   bids_digest: bytes, index: int, price: int) -> None:
        _require(sender == self.enclave_address, "unauthorized")
        _require(self.phase is Phase.BIDDING, "bad phase")
        _require(self.bidding_deadline < block < self.reveal_deadline, "window")
        _credit(balances, sender, value)
        if self.stored_bids_digest() != bids_digest:
            # the enclave saw a different bid set than the one stored here
            self.phase = Phase.REJECTED
            return
        _require(index < len(self.bidders), "bad index")
        self.phase = Phase.REVEALED
        self.winner = self.bidders[index]
        self.price = price

    def withdraw(self, sender: bytes, value: int, block: int, balances: dict[bytes, int]) -> None:
        _require(self.reveal_deadline < block < self.withdraw_deadline, "window")
        if self.phase is Phase.REVEALED:
            eligible = sender == self.auctioneer or (sender in self.bids and sender != self.winner)
        elif self.phase is Phase.REJECTED:
            eligible = sender in self.bids
        else:
            eligible = False
        _require(eligible, "ineligible")
        _require(sender not in self.withdrawn, "already withdrawn")
        self.withdrawn.add(sender)
        self.escrow -= self.deposit
        _credit(balances, sender, self.deposit + value)

    def reset(self, sender: bytes, value: int, block: int, balances: dict[bytes, int]) -> None:
        _require(sender is not None and sender == self.auctioneer, "unauthorized")
        _require(block > self.withdraw_deadline, "window")
        # stranded deposits (the winner's, or the auctioneer's after a
        # rejection) stay escrowed; nothing here pays them out
        self.phase = Phase.INIT
        self.bidders.clear()
        self.bids.clear()
        self.winner = None
        self.price = None
        self.withdrawn.clear()
        _credit(balances, sender, value)

    # -- views ---------------------------------------------------------------

    def stored_bids_digest(self) -> bytes:
        """keccak256 over every stored ciphertext||ephemeral-key pair in bid order."""
        preimage = b"".join(
            self.bids[bidder][0] + self.bids[bidder][1] for bidder in self.bidders
        )
        return keccak256(preimage)

    def bid_list(self) -> list[tuple[bytes, bytes]]:
        """Stored (ciphertext, ephemeral key) pairs in submission order."""
        return [self.bids[bidder] for bidder in self.bidders]

    def state_dump(self) -> dict:
        return {
            "phase": self.phase.value,
            "auctioneer": _hex_or_none(self.auctioneer),
            "enclave_address": _hex_or_none(self.enclave_address),
            "enclave_dh_public": _hex_or_none(self.enclave_dh_public),
            "bidding_deadline": self.bidding_deadline,
            "reveal_deadline": self.reveal_deadline,
            "withdraw_deadline": self.withdraw_deadline,
            "deposit": self.deposit,
            "escrow": self.escrow,
            "bidders": [b.hex() for b in self.bidders],
            "bids": {
                b.hex(): {"ciphertext": self.bids[b][0].hex(), "ephemeral_key": self.bids[b][1].hex()}
                for b in self.bidders
            },
            "winner": _hex_or_none(self.winner),
            "price": self.price,
            "withdrawn": sorted(w.hex() for w in self.withdrawn),
        }


def _credit(balances: dict[bytes, int], address: bytes, amount: int) -> None:
    if amount:
        balances[address] = balances.get(address, 0) + amount


def _hex_or_none(value: bytes | None) -> str | None:
    return value.hex() if value is not None else None


# -- call argument encoders (the contract ABI) --------------------------------


def start_auction_args(enclave_address: bytes, enclave_dh_public: bytes,
                       t1: int, t2: int, t3: int, d: int) -> bytes:
    return encode_fields([
        enclave_address, enclave_dh_public,
        encode_uint(t1), encode_uint(t2), encode_uint(t3), encode_uint(d),
    ])


def submit_bid_args(ciphertext: bytes, ephemeral_key: bytes) -> bytes:
    return encode_fields([ciphertext, ephemeral_key])


def set_winner_args(bids_digest: bytes, index: int, price: int) -> bytes:
    return encode_fields([bids_digest, encode_uint(index), encode_uint(price)])
