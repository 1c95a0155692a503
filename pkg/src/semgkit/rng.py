"""PCG32: a small, portable, seedable pseudo-random generator.

State is a 64-bit linear congruential generator

    state <- state * 6364136223846793005 + inc   (mod 2**64)

and each output is the permuted XSH-RR projection of the old state to 32
bits (O'Neill 2014, ``pcg32_random_r``). Seeding follows ``pcg32_srandom_r``
so streams match the reference C implementation exactly. Blocks of outputs
are produced with numpy by jumping the LCG ahead in closed form.
"""

import numpy as np

MULT = 6364136223846793005
DEFAULT_STREAM = 54
_MASK = (1 << 64) - 1
_BLOCK = 4096


def _jump_tables(inc, n):
    # state_k = A_k * state_0 + C_k
    A = np.empty(n, dtype=np.uint64)
    C = np.empty(n, dtype=np.uint64)
    a, c = 1, 0
    for k in range(n):
        A[k], C[k] = a, c
        a = (a * MULT) & _MASK
        c = (c * MULT + inc) & _MASK
    return A, C, a, c


class Pcg32:
    """Generator value; distinct ``(seed, stream)`` pairs give independent sequences.

    >>> [hex(v) for v in Pcg32(42, 54).integers(3)]
    ['0xa15c02b7', '0x7b47f409', '0xba1d3330']
    """

    _tables = {}

    def __init__(self, seed: int, stream: int = DEFAULT_STREAM):
        self.inc = ((int(stream) << 1) | 1) & _MASK
        self.state = 0
        self._step()
        self.state = (self.state + (int(seed) & _MASK)) & _MASK
        self._step()

    def _step(self):
        self.state = (self.state * MULT + self.inc) & _MASK

    def _table(self):
        if self.inc not in self._tables:
            self._tables[self.inc] = _jump_tables(self.inc, _BLOCK)
        return self._tables[self.inc]

    def integers(self, n: int) -> np.ndarray:
        """Next ``n`` raw 32-bit outputs as ``uint32``."""
        A, C, a_blk, c_blk = self._table()
        out = np.empty(n, dtype=np.uint32)
        pos = 0
        while pos < n:
            m = min(_BLOCK, n - pos)
            s0 = np.uint64(self.state)
            old = A[:m] * s0 + C[:m]
            xorshifted = (((old >> np.uint64(18)) ^ old) >> np.uint64(27)) & np.uint64(0xFFFFFFFF)
            rot = old >> np.uint64(59)
            left = (np.uint64(32) - rot) & np.uint64(31)
            rotated = (xorshifted >> rot) | (xorshifted << left)
            out[pos:pos + m] = (rotated & np.uint64(0xFFFFFFFF)).astype(np.uint32)
            if m == _BLOCK:
                self.state = (a_blk * self.state + c_blk) & _MASK
            else:
                self.state = (int(A[m - 1]) * MULT * self.state
                              + int(C[m - 1]) * MULT + self.inc) & _MASK
            pos += m
        return out

    def uniform(self, n: int) -> np.ndarray:
        """Uniform doubles in the open interval (0, 1)."""
        return (self.integers(n).astype(np.float64) + 0.5) * 2.0 ** -32

    def normal(self, n: int) -> np.ndarray:
        """Standard normal draws by the Box-Muller transform."""
        m = (n + 1) // 2
        u = self.uniform(2 * m)
        r = np.sqrt(-2.0 * np.log(u[0::2]))
        theta = 2.0 * np.pi * u[1::2]
        z = np.empty(2 * m)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:n]
