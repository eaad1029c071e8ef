"""
Uniform sampling of the binary symplectic group Sp(2n, F_2).

Canonical-form construction of Koenig and Smolin: a canonical index in
[0, |Sp(2n)|) maps to a symplectic matrix through a product of symplectic
transvections, one level per qubit. Vectors use the interleaved layout
(x_0, z_0, x_1, z_1, ...), so the form is a direct sum of [[0, 1], [1, 0]]
blocks. Row 2j of the returned matrix is the image of X_j, row 2j+1 the image
of Z_j.
"""

from __future__ import annotations

import numpy as np


def num_cosets(n: int) -> int:
    return 2 ** (2 * n - 1) * (4**n - 1)


def num_symplectics(n: int) -> int:
    """|Sp(2n, F_2)|: 6 for one qubit, 720 for two."""
    count = 1
    for j in range(1, n + 1):
        count *= num_cosets(j)
    return count


def symplectic_inner(v: np.ndarray, w: np.ndarray) -> int:
    return int(np.sum(v[0::2] * w[1::2] + v[1::2] * w[0::2]) % 2)


def transvection(k: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Z_k v = v + <k, v> k."""
    return (v + symplectic_inner(k, v) * k) % 2


def _to_bits(i: int, n: int) -> np.ndarray:
    return np.array([(i >> j) & 1 for j in range(n)], dtype=np.int8)


def find_transvections(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Two vectors h1, h2 with y = Z_h1 Z_h2 x (h2 may be zero)."""
    out = np.zeros((2, len(x)), dtype=np.int8)
    if np.array_equal(x, y):
        return out
    if symplectic_inner(x, y) == 1:
        out[0] = (x + y) % 2
        return out

    z = np.zeros(len(x), dtype=np.int8)
    for i in range(0, len(x), 2):
        if (x[i] or x[i + 1]) and (y[i] or y[i + 1]):
            z[i] = (x[i] + y[i]) % 2
            z[i + 1] = (x[i + 1] + y[i + 1]) % 2
            if not (z[i] or z[i + 1]):
                z[i + 1] = 1
                if x[i] != x[i + 1]:
                    z[i] = 1
            out[0] = (x + z) % 2
            out[1] = (y + z) % 2
            return out

    for i in range(0, len(x), 2):
        if (x[i] or x[i + 1]) and not (y[i] or y[i + 1]):
            if x[i] == x[i + 1]:
                z[i + 1] = 1
            else:
                z[i + 1] = x[i]
                z[i] = x[i + 1]
            break
    for i in range(0, len(x), 2):
        if not (x[i] or x[i + 1]) and (y[i] or y[i + 1]):
            if y[i] == y[i + 1]:
                z[i + 1] = 1
            else:
                z[i + 1] = y[i]
                z[i] = y[i + 1]
            break
    out[0] = (x + z) % 2
    out[1] = (y + z) % 2
    return out


def symplectic_from_index(index: int, n: int) -> np.ndarray:
    """The 2n x 2n symplectic matrix with canonical index `index`."""
    if not 0 <= index < num_symplectics(n):
        raise ValueError(f"Index {index} outside Sp(2*{n})")
    nn = 2 * n
    s = (1 << nn) - 1
    k = (index % s) + 1
    index //= s

    f1 = _to_bits(k, nn)
    e1 = np.zeros(nn, dtype=np.int8)
    e1[0] = 1
    t = find_transvections(e1, f1)

    bits = _to_bits(index % (1 << (nn - 1)), nn - 1)
    eprime = e1.copy()
    eprime[2:] = bits[1:]
    h0 = transvection(t[0], eprime)
    h0 = transvection(t[1], h0)
    if bits[0] == 1:
        f1 = np.zeros_like(f1)

    g = np.identity(nn, dtype=np.int8)
    if n > 1:
        g[2:, 2:] = symplectic_from_index(index >> (nn - 1), n - 1)
    for j in range(nn):
        row = transvection(t[0], g[j])
        row = transvection(t[1], row)
        row = transvection(h0, row)
        g[j] = transvection(f1, row)
    return g


def random_symplectic_index(n: int, rng: np.random.Generator) -> int:
    """Uniform canonical index, drawn level by level so it never overflows int64."""
    index = 0
    for level in range(1, n + 1):
        s = (1 << (2 * level)) - 1
        k = int(rng.integers(s))
        bits = int(rng.integers(1 << (2 * level - 1)))
        index = k + s * (bits + (index << (2 * level - 1)))
    return index


def random_symplectic(n: int, rng: np.random.Generator) -> np.ndarray:
    return symplectic_from_index(random_symplectic_index(n, rng), n)


def is_symplectic(g: np.ndarray) -> bool:
    nn = g.shape[0]
    form = np.kron(np.eye(nn // 2, dtype=np.int64), np.array([[0, 1], [1, 0]]))
    return bool(np.array_equal((g.astype(np.int64) @ form @ g.T.astype(np.int64)) % 2, form))
