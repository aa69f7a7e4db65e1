"""The untrusted relay: message conduit between enclave, chain, and bidders.

One honest strategy and three adversarial ones. Every deviation the relay
can attempt is either neutralized before money moves (bidders abstain, the
rollback counter starves extra enclave instances) or punished by the
contract (rejection forfeits the auctioneer's deposit). The runner scripts
a full auction lifecycle deterministically from the scenario seed and
returns a structured report.
"""

from __future__ import annotations

import json
import random
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

from .attestation import IasRegistry, Quote
from .bidder import BidderAgent, join_auction, withdraw_deposit
from .chain import Chain, new_chain, sign_transaction
from .contract import AuctionContract, Phase, set_winner_args, start_auction_args
from .crypto import DhKeyPair, SigningKeyPair, dh_keygen, gen_account, sha256
from .enclave import (
    ENCLAVE_MEASUREMENT,
    PlatformSim,
    SealedState,
    get_quote,
    initialize,
    open_sealed_bid,
    reveal_winner,
    select_winner,
)

if TYPE_CHECKING:
    from .scenario import ScenarioConfig

SCHEMA = "trustee-sim/1"


@dataclass(frozen=True)
class RelayStrategy:
    """Exactly one mode is active per run; the extra fields parametrize it."""

    mode: str  # honest | masquerade | eclipse | replay
    eclipse_keep: tuple[int, ...] = ()
    replay_instances: int = 0
    masquerade_flavor: str = "self_signed"

    @classmethod
    def honest(cls) -> "RelayStrategy":
        return cls(mode="honest")

    @classmethod
    def eclipse(cls, keep: tuple[int, ...]) -> "RelayStrategy":
        return cls(mode="eclipse", eclipse_keep=tuple(keep))

    @classmethod
    def replay(cls, instances: int) -> "RelayStrategy":
        return cls(mode="replay", replay_instances=instances)

    @classmethod
    def masquerade(cls, flavor: str = "self_signed") -> "RelayStrategy":
        return cls(mode="masquerade", masquerade_flavor=flavor)


@dataclass
class RelayState:
    """What the relay itself persists: the sealed blob on disk, plus the
    bid list it read back from the contract (in stored order)."""

    sealed_state_file: Path
    cached_bids: list[tuple[bytes, bytes]] = field(default_factory=list)

    def save(self, sealed: SealedState) -> None:
        self.sealed_state_file.write_bytes(sealed.blob)

    def load(self) -> SealedState:
        return SealedState(self.sealed_state_file.read_bytes())


@dataclass
class ScenarioReport:
    scenario: str
    seed: int
    final_phase: str
    winner_address: str | None
    winner_index: int | None  # position in the config's bidder list
    price: int | None
    balances: dict[str, int]  # hex address -> delta against the funded baseline
    events: list[str]
    final_escrow: int
    deposit: int

    def to_json_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "scenario": self.scenario,
            "seed": self.seed,
            "final_phase": self.final_phase,
            "winner_address": self.winner_address,
            "winner_index": self.winner_index,
            "price": self.price,
            "balances": dict(sorted(self.balances.items())),
            "events": list(self.events),
            "final_escrow": self.final_escrow,
            "deposit": self.deposit,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"


@dataclass
class MasqueradeIdentity:
    """Relay-held keys masquerading as an enclave, plus the quote fakery."""

    signing: SigningKeyPair
    exchange: DhKeyPair
    quote_for: object  # Callable[[bytes], Quote]


class ScenarioRunner:
    """Deterministic lifecycle driver; all entropy flows from the config seed."""

    def __init__(self, config: "ScenarioConfig", work_dir: Path | None = None):
        self.config = config
        self.strategy = config.strategy
        self.rng = random.Random(config.seed)
        self.events: list[str] = []
        if work_dir is None:
            self._tmp = tempfile.TemporaryDirectory(prefix="trustee-sim-")
            work_dir = Path(self._tmp.name)
        self.work_dir = Path(work_dir)
        self.relay_state = RelayState(sealed_state_file=self.work_dir / "sealed_state.bin")

        self.platform: PlatformSim | None = None
        self.sealed: SealedState | None = None
        self.masquerade: MasqueradeIdentity | None = None
        self.enclave_address: bytes | None = None
        self.enclave_dh_public: bytes | None = None
        self.submitted_order: list[int] = []  # bidder indices in stored-bid order

    # -- lifecycle ----------------------------------------------------------

    def run(self) -> ScenarioReport:
        self._setup_parties()
        self._publish_identity()
        self._start_auction()
        self._bidding_round()
        self._reveal_round()
        self._withdraw_round()
        return self._report()

    def _setup_parties(self) -> None:
        config = self.config
        self.auctioneer = gen_account(self.rng)
        self.agents = [BidderAgent.new(self.rng, spec.bid_value) for spec in config.bidders]
        self.chain = Chain(new_chain(AuctionContract(), self.rng.randbytes(20)))
        self.chain.fund(self.auctioneer.address, config.deposit * 2)
        for agent in self.agents:
            self.chain.fund(agent.account.address, config.deposit * 2)
        self.registry = IasRegistry(self._expected_measurement())
        self.baseline = dict(self.chain.state.balances)

    def _expected_measurement(self) -> bytes:
        if self.config.expected_measurement is not None:
            return self.config.expected_measurement
        return ENCLAVE_MEASUREMENT

    def _publish_identity(self) -> None:
        if self.strategy.mode == "masquerade":
            self.masquerade = masquerade_start(
                self.strategy, self.registry, self.rng, self.events,
            )
            self.enclave_address = self.masquerade.signing.address
            self.enclave_dh_public = self.masquerade.exchange.pk
        else:
            self.platform = PlatformSim.create(self.rng)
            self.registry.register(self.platform.platform_id, self.platform.attestation_key.pk)
            self.sealed, self.enclave_address, self.enclave_dh_public = initialize(
                self.platform, self.rng,
            )
            self.relay_state.save(self.sealed)
            self.events.append("enclave initialized; sealed state stored by relay")

    def _start_auction(self) -> None:
        config = self.config
        base = self.chain.block_number
        self.t1, self.t2, self.t3 = (base + off for off in config.intervals)
        args = start_auction_args(
            self.enclave_address, self.enclave_dh_public,
            self.t1, self.t2, self.t3, config.deposit,
        )
        tx = sign_transaction(self.chain.contract_address, "StartAuction", args,
                              config.deposit, self.auctioneer.sk)
        receipt = self.chain.submit(tx)
        phase = self.chain.contract.phase.value
        self.events.append(f"start_auction: {receipt.status} (phase={phase}, deposit={config.deposit})")

    def _challenge(self, nonce: bytes) -> Quote:
        if self.masquerade is not None:
            return self.masquerade.quote_for(nonce)
        return get_quote(self.platform, self.sealed, nonce)

    def _bidding_round(self) -> None:
        late = []
        for i, (agent, spec) in enumerate(zip(self.agents, self.config.bidders)):
            if spec.behavior == "late":
                late.append((i, agent, spec))
                continue
            self._join(i, agent, spec)
        self.chain.advance_to(self.t1)
        for i, agent, spec in late:
            self._join(i, agent, spec)

    def _join(self, i: int, agent: BidderAgent, spec) -> None:
        value = self.config.deposit * 2 if spec.behavior == "overdeposit" else None
        outcome = join_auction(
            agent, self.chain, self._challenge, self.registry,
            self._expected_measurement(), self.rng,
            verify_attestation=spec.behavior != "no_attest", value=value,
        )
        if outcome.status == "submitted":
            self.submitted_order.append(i)
            self.events.append(f"bidder {i} ({spec.behavior}): submitted")
        else:
            reason = f" ({outcome.reason})" if outcome.reason else ""
            self.events.append(f"bidder {i} ({spec.behavior}): {outcome.status}{reason}")

    def _reveal_round(self) -> None:
        self.chain.advance_to(self.t1 + 1)
        cached = self.chain.contract.bid_list()
        self.relay_state.cached_bids = cached
        self.events.append(f"relay cached {len(cached)} sealed bid(s) from the contract")
        if not cached:
            self.events.append("nothing to reveal; auction dies in the bidding phase")
            return

        if self.masquerade is not None:
            self._masquerade_reveal(cached)
            return

        ciphertexts = [ct for ct, _ in cached]
        ephemeral = [pk for _, pk in cached]
        if self.strategy.mode == "eclipse":
            keep = [k for k in self.strategy.eclipse_keep if k < len(cached)]
            ciphertexts = [ciphertexts[k] for k in keep]
            ephemeral = [ephemeral[k] for k in keep]
            self.events.append(f"eclipse: forwarded {len(keep)} of {len(cached)} cached bids")
            verdicts = [self._reveal_once(ciphertexts, ephemeral)]
        elif self.strategy.mode == "replay":
            verdicts = self._replay_reveals(ciphertexts, ephemeral)
        else:
            verdicts = [self._reveal_once(ciphertexts, ephemeral)]

        usable = [v for v in verdicts if not v.empty]
        self.chain.fund(self.enclave_address, self.config.fund_amount)
        self.events.append(f"funded enclave account with {self.config.fund_amount}")
        if not usable:
            self.events.append("no usable verdict; auction stays in the bidding phase")
            return
        verdict = usable[0]
        receipt = self.chain.submit(verdict.envelope)
        phase = self.chain.contract.phase.value
        detail = f"index={verdict.index}, price={verdict.price}"
        reason = f", {receipt.revert_reason}" if receipt.revert_reason else ""
        self.events.append(f"set_winner: {receipt.status}{reason} (phase={phase}, {detail})")

    def _reveal_once(self, ciphertexts, ephemeral):
        verdict, resealed = reveal_winner(
            self.platform, ciphertexts, ephemeral, self.sealed,
            self.chain.contract_address, self.rng,
        )
        if verdict.empty:
            self.events.append("reveal: empty verdict (stale counter)")
        else:
            self.sealed = resealed
            self.relay_state.save(resealed)
            self.events.append(
                f"reveal: verdict over {len(ciphertexts)} bid(s) "
                f"(index={verdict.index}, price={verdict.price})"
            )
        return verdict

    def _replay_reveals(self, ciphertexts, ephemeral):
        """Launch several instances on one platform, replaying the same sealed state."""
        k = self.strategy.replay_instances
        stale = self.sealed  # every instance starts from the pre-reveal blob
        assignments = {0: (ciphertexts, ephemeral)}
        for j in range(1, k):
            if len(ciphertexts) == 1:
                subset = [0]
            else:
                size = self.rng.randrange(1, len(ciphertexts))
                subset = sorted(self.rng.sample(range(len(ciphertexts)), size))
            assignments[j] = ([ciphertexts[s] for s in subset], [ephemeral[s] for s in subset])
        order = list(range(k))
        self.rng.shuffle(order)

        verdicts = []
        for j in order:
            cts, pks = assignments[j]
            verdict, resealed = reveal_winner(
                self.platform, cts, pks, stale, self.chain.contract_address, self.rng,
            )
            if verdict.empty:
                self.events.append(f"replay instance {j}: empty verdict (stale counter)")
            else:
                self.sealed = resealed
                self.relay_state.save(resealed)
                self.events.append(
                    f"replay instance {j}: verdict over {len(cts)} of "
                    f"{len(ciphertexts)} bids (index={verdict.index}, price={verdict.price})"
                )
                verdicts.append(verdict)
        self.events.append(
            f"replay attack: {len(verdicts)} usable verdict(s) across {k} instances"
        )
        return verdicts

    def _masquerade_reveal(self, cached) -> None:
        # the relay holds the private keys, so it can open every stored bid
        values = []
        for position, (ct, pk) in enumerate(cached):
            value = open_sealed_bid(self.masquerade.exchange.sk, ct, pk)
            values.append(value)
            bidder_index = self.submitted_order[position]
            self.events.append(
                f"masquerade: relay decrypted bidder {bidder_index}'s sealed bid: "
                f"{value} (privacy loss)"
            )
        index, price = select_winner(values)
        digest = self.chain.contract.stored_bids_digest()
        tx = sign_transaction(
            self.chain.contract_address, "SetWinner",
            set_winner_args(digest, index, price), 0, self.masquerade.signing.sk,
        )
        self.chain.fund(self.enclave_address, self.config.fund_amount)
        receipt = self.chain.submit(tx)
        phase = self.chain.contract.phase.value
        self.events.append(
            f"set_winner (relay-forged): {receipt.status} (phase={phase}, "
            f"index={index}, price={price})"
        )

    def _withdraw_round(self) -> None:
        self.chain.advance_to(self.t2 + 1)
        for i, agent in enumerate(self.agents):
            receipt = withdraw_deposit(agent, self.chain)
            reason = f" ({receipt.revert_reason})" if receipt.revert_reason else ""
            self.events.append(f"bidder {i} withdraw: {receipt.status}{reason}")
        tx = sign_transaction(self.chain.contract_address, "Withdraw", b"", 0, self.auctioneer.sk)
        receipt = self.chain.submit(tx)
        reason = f" ({receipt.revert_reason})" if receipt.revert_reason else ""
        self.events.append(f"auctioneer withdraw: {receipt.status}{reason}")

    def _report(self) -> ScenarioReport:
        contract = self.chain.contract
        parties = {self.auctioneer.address, *(a.account.address for a in self.agents)}
        if self.enclave_address is not None:
            parties.add(self.enclave_address)
        deltas = {
            address.hex(): self.chain.balance(address) - self.baseline.get(address, 0)
            for address in parties
        }
        winner_index = None
        if contract.winner is not None:
            for i, agent in enumerate(self.agents):
                if agent.account.address == contract.winner:
                    winner_index = i
                    break
        return ScenarioReport(
            scenario=self.strategy.mode,
            seed=self.config.seed,
            final_phase=contract.phase.value,
            winner_address=contract.winner.hex() if contract.winner else None,
            winner_index=winner_index,
            price=contract.price,
            balances=deltas,
            events=self.events,
            final_escrow=contract.escrow,
            deposit=self.config.deposit,
        )


def masquerade_start(strategy: RelayStrategy, registry: IasRegistry,
                     rng: random.Random, events: list[str]) -> MasqueradeIdentity:
    """Relay-generated keys posing as an enclave identity, per attack flavor.

    self_signed: the quote is signed with a key the attestation service has
    never seen. replayed_quote: a genuine enclave answers challenges, but it
    attests to its own keys, not the posted ones. wrong_code: a registered
    device runs attacker code, which happily signs over the posted keys but
    cannot fake the measurement.
    """
    signing = gen_account(rng)
    exchange = dh_keygen(rng)
    flavor = strategy.masquerade_flavor

    if flavor == "replayed_quote":
        platform = PlatformSim.create(rng)
        registry.register(platform.platform_id, platform.attestation_key.pk)
        sealed, _, _ = initialize(platform, rng)

        def quote_for(nonce: bytes) -> Quote:
            return get_quote(platform, sealed, nonce)

    elif flavor == "wrong_code":
        platform = PlatformSim.create(rng, measurement=sha256(b"unaudited auction enclave"))
        registry.register(platform.platform_id, platform.attestation_key.pk)

        def quote_for(nonce: bytes) -> Quote:
            return platform.sign_quote(sha256(signing.address + exchange.pk + nonce))

    else:  # self_signed
        rogue = PlatformSim.create(rng)  # never registered with the service

        def quote_for(nonce: bytes) -> Quote:
            return rogue.sign_quote(sha256(signing.address + exchange.pk + nonce))

    events.append(f"masquerade ({flavor}): relay published self-generated keys")
    return MasqueradeIdentity(signing=signing, exchange=exchange, quote_for=quote_for)


def run_auction(config: "ScenarioConfig", work_dir: Path | None = None) -> ScenarioReport:
    """Run one full auction lifecycle under the configured relay strategy."""
    return ScenarioRunner(config, work_dir=work_dir).run()
