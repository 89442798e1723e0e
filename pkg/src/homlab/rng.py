"""Deterministic counter-based randomness.

Every random quantity in this package is a pure function of a structured
key (seed, stream tags, trial index, tuple ids, ...).  Keys are hashed
through BLAKE2b, so re-sampling a window and restricting it commutes
exactly with sampling the smaller window directly: the per-point or
per-pair draws are literally the same numbers.
"""

from __future__ import annotations

import hashlib


def key_bytes(*parts) -> bytes:
    """Encode a heterogeneous key tuple injectively into bytes."""
    out = bytearray()
    for p in parts:
        if isinstance(p, bool):
            out += b"b" + (b"\x01" if p else b"\x00")
        elif isinstance(p, int):
            if p < 0:
                raise ValueError("rng keys must use non-negative integers")
            out += b"i" + p.to_bytes(16, "little")
        elif isinstance(p, str):
            enc = p.encode("utf-8")
            out += b"s" + len(enc).to_bytes(4, "little") + enc
        elif isinstance(p, bytes):
            out += b"y" + len(p).to_bytes(4, "little") + p
        elif isinstance(p, tuple):
            inner = key_bytes(*p)
            out += b"t" + len(inner).to_bytes(4, "little") + inner
        else:
            raise TypeError(f"unsupported key part: {p!r}")
    return bytes(out)


def u64(*parts) -> int:
    """A 64-bit word derived from the key."""
    digest = hashlib.blake2b(key_bytes(*parts), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def uniform(*parts) -> float:
    """Uniform float in [0, 1) with 53 random bits."""
    return (u64(*parts) >> 11) / float(1 << 53)


def bernoulli(p: float, *parts) -> bool:
    return uniform(*parts) < p


def choice_index(n: int, *parts) -> int:
    """Uniform index in range(n), unbiased via rejection."""
    if n <= 0:
        raise ValueError("choice_index needs n >= 1")
    bound = (1 << 64) - ((1 << 64) % n)
    attempt = 0
    while True:
        w = u64(*parts, attempt)
        if w < bound:
            return w % n
        attempt += 1


def uniform_permutation(n: int, *parts) -> tuple[int, ...]:
    """Uniformly random permutation of range(n) (Fisher-Yates)."""
    images = list(range(n))
    for i in range(n - 1, 0, -1):
        j = choice_index(i + 1, *parts, "fy", i)
        images[i], images[j] = images[j], images[i]
    return tuple(images)
