"""Deterministic randomness for everything that takes a seed.

A SHA-256 counter-mode generator: the same seed produces the same byte
stream on every platform and Python version, which is what makes seeded CLI
runs byte-reproducible. With no seed it self-seeds from ``os.urandom`` and
is suitable as a key-material source.
"""

import hashlib
import os

_DOMAIN = b"abbenet-drbg-v1"


class DeterministicRandom:
    def __init__(self, seed: bytes | int | None = None):
        if seed is None:
            seed = os.urandom(32)
        elif isinstance(seed, int):
            if seed < 0:
                raise ValueError("seed must be non-negative")
            seed = seed.to_bytes((seed.bit_length() + 7) // 8 or 1, "big")
        self._key = hashlib.sha256(_DOMAIN + seed).digest()
        self._counter = 0
        self._pool = b""

    def randbytes(self, n: int) -> bytes:
        if len(self._pool) < n:
            # Collect blocks in a list: += on bytes would recopy the whole
            # pool per 32-byte block, which is quadratic for MiB-sized reads.
            blocks = [self._pool]
            have = len(self._pool)
            while have < n:
                block = hashlib.sha256(
                    self._key + self._counter.to_bytes(8, "big")
                ).digest()
                self._counter += 1
                blocks.append(block)
                have += len(block)
            self._pool = b"".join(blocks)
        out, self._pool = self._pool[:n], self._pool[n:]
        return out

    def getrandbits(self, k: int) -> int:
        if k <= 0:
            return 0
        nbytes = (k + 7) // 8
        value = int.from_bytes(self.randbytes(nbytes), "big")
        return value >> (nbytes * 8 - k)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        k = n.bit_length()
        while True:
            value = self.getrandbits(k)
            if value < n:
                return value

    def randrange(self, start: int, stop: int | None = None) -> int:
        if stop is None:
            start, stop = 0, start
        return start + self.randbelow(stop - start)

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]

    def sample(self, seq, k: int) -> list:
        """k distinct elements, order-stable under the seed (partial shuffle)."""
        pool = list(seq)
        if k > len(pool):
            raise ValueError("sample larger than population")
        for i in range(k):
            j = i + self.randbelow(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def shuffle(self, seq: list) -> None:
        for i in range(len(seq) - 1, 0, -1):
            j = self.randbelow(i + 1)
            seq[i], seq[j] = seq[j], seq[i]
