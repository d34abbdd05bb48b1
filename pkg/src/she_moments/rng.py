"""Counter-based random streams for reproducible parallel Monte Carlo.

Two needs, two tools, one keying discipline:

* :func:`path_key` derives a per-path 2-word Philox key from
  ``(seed, domain, path_index)``.  Engines that consume large per-path
  blocks (the SPDE solver) wrap it in numpy's native Philox bit generator
  via :func:`path_generator` and draw sequentially -- fast, and the stream
  depends only on the key, never on batching or worker assignment.

* :func:`uniforms_at` evaluates Philox4x64-10 directly (vectorised over
  paths) so cheap consumers (the Feynman-Kac sampler) can address "uniform
  block j of path i" as pure random access.  The implementation is
  bit-identical to numpy's Philox keystream, which the test suite checks
  word for word.

Either way, path ``i``'s draws are a pure function of ``(seed, i)``:
results are reproducible across any worker count or batch split.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_MASK32 = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)
_SH11 = np.uint64(11)
_INV53 = float(2.0 ** -53)

# Domain tags keep independent consumers off each other's streams.
DOMAIN_SPDE = 0x53504445        # "SPDE"
DOMAIN_FK = 0x464B5341          # "FKSA"
DOMAIN_FK_OCC = 0x464B4F43      # "FKOC"


def _mix64(x) -> np.ndarray:
    """splitmix64 finaliser; whitens structured seeds into key words."""
    with np.errstate(over="ignore"):
        z = np.asarray(x, dtype=np.uint64) + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def path_key(seed: int, domain: int, index) -> np.ndarray:
    """2-word uint64 Philox key for one path (or an array of paths)."""
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        seed_w = _mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
        dom_w = _mix64(seed_w ^ np.uint64(domain))
        k0 = _mix64(dom_w + idx)
        k1 = _mix64(k0 ^ np.uint64(0xD6E8FEB86659FD93))
    return np.stack(np.broadcast_arrays(k0, k1), axis=-1)


def path_generator(seed: int, domain: int, index: int) -> np.random.Generator:
    """numpy Generator on the path's own Philox stream (sequential use)."""
    key = path_key(seed, domain, int(index))
    return np.random.Generator(np.random.Philox(key=key))


def _mulhilo(a: np.uint64, b: np.ndarray):
    lo = a * b
    ah, al = a >> _SH32, a & _MASK32
    bh, bl = b >> _SH32, b & _MASK32
    p_hh = ah * bh
    p_lh = al * bh
    p_hl = ah * bl
    p_ll = al * bl
    mid = p_lh + p_hl
    carry = (mid < p_lh).astype(np.uint64) << _SH32
    t = (p_ll >> _SH32) + (mid & _MASK32)
    hi = p_hh + (mid >> _SH32) + (t >> _SH32) + carry
    return hi, lo


def philox4x64(counter: np.ndarray, key: np.ndarray) -> np.ndarray:
    """Philox4x64-10 block function.

    ``counter``: uint64 array (..., 4); ``key``: uint64 array (..., 2).
    Returns the (..., 4) keystream block.  Matches numpy's Philox: numpy's
    n-th raw block equals ``philox4x64([n + 1, 0, 0, 0], key)`` (numpy
    increments the counter before generating).
    """
    counter = np.asarray(counter, dtype=np.uint64)
    key = np.asarray(key, dtype=np.uint64)
    c0 = counter[..., 0].copy()
    c1 = counter[..., 1].copy()
    c2 = counter[..., 2].copy()
    c3 = counter[..., 3].copy()
    k0 = key[..., 0].copy()
    k1 = key[..., 1].copy()
    with np.errstate(over="ignore"):
        for _ in range(10):
            hi0, lo0 = _mulhilo(_M0, c0)
            hi1, lo1 = _mulhilo(_M1, c2)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
            k0 = k0 + _W0
            k1 = k1 + _W1
    return np.stack([c0, c1, c2, c3], axis=-1)


def uniforms_at(seed: int, domain: int, path_index: np.ndarray,
                n_uniforms: int) -> np.ndarray:
    """The first ``n_uniforms`` uniforms of each path's substream.

    ``path_index`` is an integer array of shape (n,); returns floats in the
    open interval (0, 1) of shape (n, n_uniforms) (53-bit grid centred away
    from the endpoints, so inverse-CDF maps never see 0 or 1).  Uniform
    ``j`` of path ``i`` is a fixed function of ``(seed, domain, i, j)``:
    random access, no state.
    """
    path_index = np.atleast_1d(np.asarray(path_index, dtype=np.uint64))
    n = path_index.shape[0]
    key = path_key(seed, domain, path_index)      # (n, 2)
    n_blocks = (n_uniforms + 3) // 4
    out = np.empty((n, n_blocks * 4), dtype=float)
    counter = np.zeros((n, 4), dtype=np.uint64)
    for j in range(n_blocks):
        counter[:, 0] = np.uint64(j)
        words = philox4x64(counter, key)
        out[:, 4 * j:4 * (j + 1)] = ((words >> _SH11).astype(float) + 0.5) * _INV53
    return out[:, :n_uniforms]
