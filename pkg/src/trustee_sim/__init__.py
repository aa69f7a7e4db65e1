"""Desk-scale simulator of an enclave-backed sealed-bid Vickrey auction.

Every trust boundary of the protocol is a separate component: an
Ethereum-like chain hosting the escrow contract, a simulated enclave with
sealing and rollback protection, an attestation service, bidder agents,
and an untrusted relay with pluggable adversarial strategies.
"""

__version__ = "0.1.0"
