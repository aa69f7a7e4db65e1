"""Minimal deterministic Ethereum-like environment.

One hosted contract, account balances, and a block counter. Senders are
authenticated exactly the way the real chain does it: by recovering the
signer address from the transaction signature. One transaction per block,
so interval boundaries are fully deterministic in tests. Gas is not
metered.

A transaction submitted on top of block B executes at block B+1 and the
resulting state reports block_number == B+1.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, replace

from .contract import AuctionContract, ContractRevert
from .crypto import CryptoError, Signature, keccak256, recover_signer, sign
from .encoding import encode_fields, encode_uint

STATUS_OK = "ok"
STATUS_REVERTED = "reverted"
STATUS_INVALID = "invalid"


@dataclass(frozen=True)
class Receipt:
    status: str
    revert_reason: str | None = None


@dataclass(frozen=True)
class RawTransaction:
    """Signed call envelope; the signature covers to||function||args||value."""

    to: bytes
    function: str
    args: bytes
    value: int
    signature: Signature


@dataclass(frozen=True)
class ChainState:
    """Immutable snapshot; every operation returns a fresh state.

    Successive states share unchanged structure, and nothing ever mutates
    structure reachable from an already-returned state.
    """

    block_number: int
    balances: dict[bytes, int]
    contract: AuctionContract
    contract_address: bytes


def transaction_digest(to: bytes, function: str, args: bytes, value: int) -> bytes:
    return keccak256(encode_fields([to, function.encode("ascii"), args, encode_uint(value)]))


def sign_transaction(to: bytes, function: str, args: bytes, value: int, sk: int) -> RawTransaction:
    signature = sign(transaction_digest(to, function, args, value), sk)
    return RawTransaction(to=to, function=function, args=args, value=value, signature=signature)


def new_chain(contract: AuctionContract, contract_address: bytes, start_block: int = 0) -> ChainState:
    return ChainState(
        block_number=start_block,
        balances={},
        contract=contract,
        contract_address=contract_address,
    )


def submit_transaction(state: ChainState, tx: RawTransaction) -> tuple[ChainState, Receipt]:
    """Authenticate, dispatch, and either commit or roll back one call."""
    execution_block = state.block_number + 1
    try:
        digest = transaction_digest(tx.to, tx.function, tx.args, tx.value)
        sender = recover_signer(digest, tx.signature)
    except CryptoError:
        return replace(state, block_number=execution_block), Receipt(STATUS_INVALID, "unrecoverable signature")

    contract = copy.deepcopy(state.contract)
    balances = dict(state.balances)
    try:
        if tx.to != state.contract_address:
            raise ContractRevert("bad target")
        if balances.get(sender, 0) < tx.value:
            raise ContractRevert("insufficient funds")
        if tx.value:
            balances[sender] = balances[sender] - tx.value
        contract.dispatch(
            tx.function, tx.args,
            sender=sender, value=tx.value, block=execution_block, balances=balances,
        )
    except ContractRevert as revert:
        return replace(state, block_number=execution_block), Receipt(STATUS_REVERTED, revert.reason)
    next_state = ChainState(
        block_number=execution_block,
        balances=balances,
        contract=contract,
        contract_address=state.contract_address,
    )
    return next_state, Receipt(STATUS_OK)


def advance_blocks(state: ChainState, n: int) -> ChainState:
    if n < 1:
        raise ValueError("must advance by at least one block")
    return replace(state, block_number=state.block_number + n)


def fund(state: ChainState, address: bytes, amount: int) -> ChainState:
    """Faucet for scenario setup; mints `amount` into the address."""
    if amount < 0:
        raise ValueError("amount must be non-negative")
    balances = dict(state.balances)
    balances[address] = balances.get(address, 0) + amount
    return replace(state, balances=balances)


def total_supply(state: ChainState) -> int:
    """Sum of all balances plus contract-held escrow; constant across transactions."""
    return sum(state.balances.values()) + state.contract.escrow


def snapshot(state: ChainState) -> dict:
    return {
        "block_number": state.block_number,
        "balances": {address.hex(): amount for address, amount in sorted(state.balances.items())},
        "contract": state.contract.state_dump(),
    }


class Chain:
    """Mutable handle threading ChainState through a sequential scenario."""

    def __init__(self, state: ChainState):
        self.state = state

    @property
    def block_number(self) -> int:
        return self.state.block_number

    @property
    def contract(self) -> AuctionContract:
        return self.state.contract

    @property
    def contract_address(self) -> bytes:
        return self.state.contract_address

    def balance(self, address: bytes) -> int:
        return self.state.balances.get(address, 0)

    def submit(self, tx: RawTransaction) -> Receipt:
        self.state, receipt = submit_transaction(self.state, tx)
        return receipt

    def advance(self, n: int) -> None:
        self.state = advance_blocks(self.state, n)

    def advance_to(self, block: int) -> None:
        """Advance so the next transaction executes at exactly `block`."""
        target = block - 1
        if target > self.state.block_number:
            self.state = advance_blocks(self.state, target - self.state.block_number)

    def fund(self, address: bytes, amount: int) -> None:
        self.state = fund(self.state, address, amount)
