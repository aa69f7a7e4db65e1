"""Simulated quoting and attestation verification.

A device-specific signing key stands in for the platform's group-signature
secret, and a registry of known device keys stands in for the attestation
service's knowledge of genuine hardware. Verdicts are plain strings so they
survive JSON transport unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

from .crypto import Signature, sha256, verify

VERDICT_GENUINE = "genuine"
VERDICT_UNKNOWN_DEVICE = "unknown_device"
VERDICT_BAD_SIGNATURE = "bad_signature"

REASON_USER_DATA = "user_data_mismatch"
REASON_MEASUREMENT = "measurement_mismatch"


@dataclass(frozen=True)
class Quote:
    """Signed attestation evidence: what code ran, on which device, saying what."""

    measurement: bytes
    user_data: bytes
    platform_id: bytes
    signature: Signature

    def to_json_dict(self) -> dict:
        return {
            "measurement": self.measurement.hex(),
            "user_data": self.user_data.hex(),
            "platform_id": self.platform_id.hex(),
            "signature": {
                "r": f"{self.signature.r:064x}",
                "s": f"{self.signature.s:064x}",
                "recovery_id": self.signature.recovery_id,
            },
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Quote":
        sig = data["signature"]
        return cls(
            measurement=bytes.fromhex(data["measurement"]),
            user_data=bytes.fromhex(data["user_data"]),
            platform_id=bytes.fromhex(data["platform_id"]),
            signature=Signature(r=int(sig["r"], 16), s=int(sig["s"], 16),
                                recovery_id=int(sig["recovery_id"])),
        )


def quote_signing_digest(measurement: bytes, user_data: bytes, platform_id: bytes) -> bytes:
    """The signature covers measurement || user_data || platform_id."""
    return sha256(measurement + user_data + platform_id)


class IasRegistry:
    """Append-only map of genuine device identities to their attestation keys."""

    def __init__(self, expected_measurement: bytes):
        self.expected_measurement = expected_measurement
        self.known_devices: dict[bytes, bytes] = {}

    def register(self, platform_id: bytes, device_pk: bytes) -> None:
        if platform_id in self.known_devices:
            raise ValueError("platform already registered")
        self.known_devices[platform_id] = device_pk


def ias_verify(registry: IasRegistry, quote: Quote) -> str:
    """Judge a quote the way the attestation service would: device known, signature valid."""
    device_pk = registry.known_devices.get(quote.platform_id)
    if device_pk is None:
        return VERDICT_UNKNOWN_DEVICE
    digest = quote_signing_digest(quote.measurement, quote.user_data, quote.platform_id)
    if not verify(digest, quote.signature, device_pk):
        return VERDICT_BAD_SIGNATURE
    return VERDICT_GENUINE


@dataclass(frozen=True)
class QuoteCheck:
    accepted: bool
    reason: str | None = None


def bidder_check_quote(quote: Quote, ias_verdict: str, expected_measurement: bytes,
                       enclave_address: bytes, enclave_dh_public: bytes,
                       nonce: bytes) -> QuoteCheck:
    """The wary bidder's three checks; the reason names the first that failed."""
    if ias_verdict != VERDICT_GENUINE:
        return QuoteCheck(False, ias_verdict)
    if quote.user_data != sha256(enclave_address + enclave_dh_public + nonce):
        return QuoteCheck(False, REASON_USER_DATA)
    if quote.measurement != expected_measurement:
        return QuoteCheck(False, REASON_MEASUREMENT)
    return QuoteCheck(True, None)
