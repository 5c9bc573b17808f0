"""Public input randomness: bit streams, exact samplers, and the beacon client.

Protocol inputs (the per-run test flag and the setting trit) and the
extractor seed are drawn from an auditable bit supply: either raw files or
a public randomness beacon serving 512-bit pulses.  Conversion to trits
uses two-bit rejection sampling and conversion to Bernoulli variables uses
the interval algorithm, both exactly unbiased for unbiased input bits.
Every consumed bit is counted so the net randomness gain of a session can
be reported against the actual cost, not just the analytic expectation.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable

import numpy as np
import requests

DEFAULT_BEACON_URL = "https://beacon.nist.gov/beacon/2.0"
BEACON_URL_ENV = "DIQRNG_BEACON_URL"
BEACON_CACHE_ENV = "DIQRNG_BEACON_CACHE"
PULSE_BITS = 512


class SeedExhaustedError(RuntimeError):
    """The bit supply ran out mid-request."""


class BeaconUnavailableError(RuntimeError):
    """No network and no cached pulse for the requested time."""


class BeaconFormatError(ValueError):
    """A pulse did not match the expected wire format."""


class BitStream:
    """Single-consumer MSB-first bit supply with consumption accounting.

    Bits come from an in-memory array, optionally refilled by a pull
    callback (used for beacon chaining).  Each bit is consumed at most
    once; running out raises SeedExhaustedError.
    """

    def __init__(self, bits: np.ndarray, refill: Callable[[], np.ndarray | None] | None = None):
        self._bits = np.asarray(bits, dtype=np.uint8)
        self._pos = 0
        self._consumed = 0
        self._refill = refill

    @classmethod
    def from_bytes(cls, data: bytes, nbits: int | None = None) -> "BitStream":
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        if nbits is not None:
            if nbits > bits.size:
                raise ValueError(f"requested {nbits} bits from {bits.size}")
            bits = bits[:nbits]
        return cls(bits)

    @property
    def consumed(self) -> int:
        """Number of bits handed out so far."""
        return self._consumed

    def remaining(self) -> int:
        return int(self._bits.size - self._pos)

    def _ensure(self, k: int) -> None:
        while self.remaining() < k:
            more = self._refill() if self._refill is not None else None
            if more is None or len(more) == 0:
                raise SeedExhaustedError(
                    f"need {k} bits, only {self.remaining()} left"
                )
            self._bits = np.concatenate([self._bits[self._pos :], np.asarray(more, dtype=np.uint8)])
            self._pos = 0

    def read_bit(self) -> int:
        self._ensure(1)
        b = int(self._bits[self._pos])
        self._pos += 1
        self._consumed += 1
        return b

    def read_bits(self, k: int) -> int:
        """Next k bits as an integer, MSB first."""
        self._ensure(k)
        out = 0
        chunk = self._bits[self._pos : self._pos + k]
        for b in chunk:
            out = (out << 1) | int(b)
        self._pos += k
        self._consumed += k
        return out

    def read_bit_array(self, k: int) -> np.ndarray:
        self._ensure(k)
        out = self._bits[self._pos : self._pos + k].copy()
        self._pos += k
        self._consumed += k
        return out


def file_source(path: str | Path | Iterable[str | Path]) -> BitStream:
    """Stream bits MSB-first from one raw file or several, concatenated.

    A JSON sidecar `<path>.json` with a "bits" field trims trailing pad
    bits when present.
    """
    paths = [path] if isinstance(path, (str, Path)) else list(path)
    pieces = []
    for p in paths:
        p = Path(p)
        if not p.is_file():
            raise FileNotFoundError(f"no such bit file: {p}")
        data = p.read_bytes()
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        sidecar = p.with_name(p.name + ".json")
        if sidecar.is_file():
            try:
                nbits = int(json.loads(sidecar.read_text())["bits"])
            except (KeyError, ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"corrupt sidecar {sidecar}: {exc}") from exc
            if nbits > bits.size:
                raise ValueError(f"sidecar claims {nbits} bits, file has {bits.size}")
            bits = bits[:nbits]
        pieces.append(bits)
    return BitStream(np.concatenate(pieces) if pieces else np.zeros(0, dtype=np.uint8))


def draw_trit(stream: BitStream) -> int:
    """One uniform trit in {1,2,3} by two-bit rejection (11 rejected)."""
    while True:
        v = stream.read_bits(2)
        if v != 0b11:
            return v + 1


def bits_to_trits(stream: BitStream, count: int) -> list[int]:
    """Exactly `count` uniform trits; costs 8/3 bits per trit on average."""
    return [draw_trit(stream) for _ in range(count)]


def bernoulli_sample(gamma: Fraction | float | int | tuple, stream: BitStream) -> int:
    """One Bernoulli(gamma) bit via the interval algorithm, exact for rational gamma.

    Refines the dyadic interval [c/2^k, (c+1)/2^k) with consumed bits until
    it falls inside the success region [1-gamma, 1) (emit 1) or [0, 1-gamma)
    (emit 0).  gamma = 1 emits 1 without consuming anything; gamma = 1/2
    emits exactly the next bit.
    """
    if isinstance(gamma, tuple):
        gamma = Fraction(*gamma)
    elif not isinstance(gamma, Fraction):
        gamma = Fraction(gamma)
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    if gamma == 1:
        return 1
    p, q = gamma.numerator, gamma.denominator
    threshold = q - p  # success region is [ (q-p)/q , 1 )
    c, pow2 = 0, 1  # current interval [c/pow2, (c+1)/pow2)
    while True:
        c = (c << 1) | stream.read_bit()
        pow2 <<= 1
        if c * q >= threshold * pow2:
            return 1
        if (c + 1) * q <= threshold * pow2:
            return 0


@dataclass(frozen=True)
class BeaconRecord:
    """One 512-bit beacon pulse."""

    timestamp: int
    output_bits: bytes
    uri: str

    def __post_init__(self):
        if len(self.output_bits) * 8 != PULSE_BITS:
            raise BeaconFormatError(
                f"pulse carries {len(self.output_bits) * 8} bits, expected {PULSE_BITS}"
            )

    def bit_array(self) -> np.ndarray:
        return np.unpackbits(np.frombuffer(self.output_bits, dtype=np.uint8))


class BeaconClient:
    """Fetches beacon pulses over HTTP with a local JSON cache.

    The cache is keyed by the requested timestamp, so repeated fetches are
    reproducible and an offline client works from a pre-seeded cache.
    """

    def __init__(
        self,
        base_url: str | None = None,
        cache_dir: str | Path | None = None,
        offline: bool = False,
        timeout: float = 10.0,
    ):
        self.base_url = (base_url or os.environ.get(BEACON_URL_ENV) or DEFAULT_BEACON_URL).rstrip("/")
        cache = cache_dir or os.environ.get(BEACON_CACHE_ENV) or (Path.home() / ".cache" / "diqrng-beacon")
        self.cache_dir = Path(cache)
        self.offline = offline
        self.timeout = timeout

    def _cache_path(self, timestamp: int | None) -> Path:
        key = "last" if timestamp is None else str(int(timestamp))
        return self.cache_dir / f"pulse-{key}.json"

    @staticmethod
    def _parse_timestamp(raw) -> int:
        """Pulse timestamps as epoch seconds; accepts epoch s/ms or ISO 8601."""
        if isinstance(raw, (int, float)):
            ts = int(raw)
            return ts // 1000 if ts > 10**12 else ts
        text = str(raw)
        try:
            return BeaconClient._parse_timestamp(int(text))
        except ValueError:
            pass
        from datetime import datetime, timezone

        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())

    def _parse(self, payload: dict, uri: str) -> BeaconRecord:
        try:
            pulse = payload["pulse"]
            hexval = pulse["outputValue"]
            ts = self._parse_timestamp(pulse["timeStamp"])
        except (KeyError, TypeError, ValueError) as exc:
            raise BeaconFormatError(f"malformed pulse payload: {exc}") from exc
        if len(hexval) != PULSE_BITS // 4:
            raise BeaconFormatError(
                f"outputValue has {len(hexval) * 4} bits, expected {PULSE_BITS}"
            )
        return BeaconRecord(timestamp=ts, output_bits=bytes.fromhex(hexval), uri=uri)

    def fetch(self, timestamp: int | None = None) -> BeaconRecord:
        """Pulse at/nearest-after the timestamp (seconds), or the latest."""
        cache_file = self._cache_path(timestamp)
        if cache_file.is_file():
            payload = json.loads(cache_file.read_text())
            return self._parse(payload, payload.get("_uri", str(cache_file)))
        if self.offline:
            raise BeaconUnavailableError(
                f"offline and no cached pulse for {timestamp!r} in {self.cache_dir}"
            )
        if timestamp is None:
            uri = f"{self.base_url}/pulse/last"
        else:
            uri = f"{self.base_url}/pulse/time/{int(timestamp) * 1000}"
        try:
            resp = requests.get(uri, timeout=self.timeout)
            resp.raise_for_status()
            payload = resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise BeaconUnavailableError(f"beacon fetch failed: {exc}") from exc
        record = self._parse(payload, uri)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        payload["_uri"] = uri
        cache_file.write_text(json.dumps(payload))
        return record


def fetch_beacon(
    timestamp: int | None = None, client: BeaconClient | None = None
) -> BeaconRecord:
    return (client or BeaconClient()).fetch(timestamp)


def beacon_stream(
    client: BeaconClient, start_timestamp: int, period: int = 60
) -> BitStream:
    """Bit stream chaining consecutive pulses from the start timestamp."""
    state = {"t": int(start_timestamp)}

    def refill() -> np.ndarray:
        record = client.fetch(state["t"])
        state["t"] = max(record.timestamp + period, state["t"] + period)
        return record.bit_array()

    return BitStream(np.zeros(0, dtype=np.uint8), refill=refill)
