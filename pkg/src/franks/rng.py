"""Small portable random source for experiment seeds.

xorshift64* with the update x ^= x >> 12; x ^= x << 25; x ^= x >> 27 and
output x * 0x2545F4914F6CDD1D (mod 2^64). The state is seeded through one
splitmix64 step so that nearby seeds give unrelated streams. Uniforms take
the top 53 bits; normals use Box-Muller and cache the second draw.
"""

import math

import numpy as np

MASK = (1 << 64) - 1
MULT = 0x2545F4914F6CDD1D


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed=0):
        s = splitmix64(int(seed) & MASK)
        self.state = s if s != 0 else 0x9E3779B97F4A7C15
        self._spare = None

    def next_u64(self):
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK
        x ^= x >> 27
        self.state = x
        return (x * MULT) & MASK

    def uniform(self):
        """Uniform on [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def normal(self):
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = self.uniform()
        while u1 <= 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def uniforms(self, shape):
        n = int(np.prod(shape))
        return np.array([self.uniform() for _ in range(n)]).reshape(shape)

    def normals(self, shape):
        n = int(np.prod(shape))
        return np.array([self.normal() for _ in range(n)]).reshape(shape)

    def unit_vector(self, dim):
        v = self.normals(dim)
        nrm = float(np.linalg.norm(v))
        while nrm == 0.0:
            v = self.normals(dim)
            nrm = float(np.linalg.norm(v))
        return v / nrm
