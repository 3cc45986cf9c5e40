"""Polar encoding (``x = u R F^{(x)n}``) and successive-cancellation decoding over erasures.

Received words are ``uint8`` arrays whose symbols are 0, 1 or :data:`ERASED`.
Both functions accept a single frame of shape ``(N,)`` or a batch ``(B, N)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polarization import bit_reversal, is_power_of_two

ERASED = np.uint8(0xFF)


@dataclass(frozen=True, eq=False)
class FrozenMap:
    """Frozen positions (boolean mask) and the value forced at each of them.

    ``values`` outside ``mask`` are ignored.  Either field may carry a leading
    batch axis.
    """

    mask: np.ndarray
    values: np.ndarray

    @classmethod
    def zeros(cls, mask) -> "FrozenMap":
        mask = np.asarray(mask, dtype=bool)
        return cls(mask, np.zeros(mask.shape, dtype=np.uint8))


def _check_length(N: int) -> None:
    if not is_power_of_two(N):
        raise ValueError(f"frame length must be a power of two, got {N}")


def _butterfly(u: np.ndarray) -> np.ndarray:
    """``u F^{(x)n}`` along the last axis, in place on a copy."""
    x = np.array(u, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    h = N // 2
    while h >= 1:
        v = x.reshape(x.shape[:-1] + (-1, 2, h))
        v[..., 0, :] ^= v[..., 1, :]
        h //= 2
    return x


def encode(u) -> np.ndarray:
    """Return ``u G_N`` over GF(2) with ``G_N = R F^{(x)n}``.

    ``F = [[1, 0], [1, 1]]`` and ``R`` is the bit-reversal permutation.  The
    map is an involution: ``encode(encode(u)) == u``.
    """
    u = np.asarray(u, dtype=np.uint8)
    N = u.shape[-1]
    _check_length(N)
    if np.any(u > 1):
        raise ValueError("frame bits must be 0 or 1")
    # R commutes with F^{(x)n}, so permuting the output is equivalent
    return _butterfly(u)[..., bit_reversal(N)]


def _fill_bits(rng, shape) -> np.ndarray:
    if isinstance(rng, (list, tuple)):
        if len(rng) != shape[0]:
            raise ValueError("need one generator per frame")
        return np.stack([g.integers(0, 2, shape[1], dtype=np.uint8) for g in rng])
    return np.random.default_rng(rng).integers(0, 2, shape, dtype=np.uint8)


def sc_decode(y, frozen: FrozenMap, rng=None, *, return_guessed: bool = False):
    """Successive-cancellation decoding of an erasure-channel output.

    Messages live in ``{0, 1, ERASED}``.  Frozen positions take their forced
    value regardless of channel evidence.  An information bit whose evidence
    is erased is filled from a uniformly random stream drawn from ``rng``
    (an int seed, a ``Generator``, or one ``Generator`` per frame of a batch);
    the fill for a frame only depends on that frame's generator.

    Parameters
    ----------
    y : array_like of uint8, shape (N,) or (B, N)
        Received symbols.
    frozen : FrozenMap
        Frozen mask and values, shape (N,) or (B, N).
    rng : int, Generator or sequence of Generator, optional
    return_guessed : bool
        Also return the mask of information bits that were filled at random.

    Returns
    -------
    u_hat : ndarray of uint8, same shape as ``y``
    guessed : ndarray of bool, only when ``return_guessed``
    """
    y = np.asarray(y, dtype=np.uint8)
    single = y.ndim == 1
    Y = np.atleast_2d(y)
    B, N = Y.shape
    _check_length(N)
    fmask = np.broadcast_to(np.asarray(frozen.mask, dtype=bool), (B, N))
    fval = np.broadcast_to(np.asarray(frozen.values, dtype=np.uint8), (B, N))
    if isinstance(rng, (list, tuple)) and single:
        rng = rng[0]
    fill = _fill_bits(rng, (B, N))

    u_hat = np.zeros((B, N), dtype=np.uint8)
    guessed = np.zeros((B, N), dtype=bool)

    def decide(L: np.ndarray, lo: int) -> np.ndarray:
        n = L.shape[1]
        if n == 1:
            v = L[:, 0]
            fz = fmask[:, lo]
            erased = v == ERASED
            bit = np.where(fz, fval[:, lo], np.where(erased, fill[:, lo], v))
            u_hat[:, lo] = bit
            guessed[:, lo] = erased & ~fz
            return bit[:, None].astype(np.uint8)
        h = n // 2
        a, b = L[:, :h], L[:, h:]
        if fmask[:, lo:lo + h].all():
            # an all-frozen subtree ignores its evidence entirely
            ua = fval[:, lo:lo + h]
            u_hat[:, lo:lo + h] = ua
            xa = _butterfly(ua)
        else:
            upper = np.where((a == ERASED) | (b == ERASED), ERASED, a ^ b).astype(np.uint8)
            xa = decide(upper, lo)
        if fmask[:, lo + h:lo + n].all():
            ub = fval[:, lo + h:lo + n]
            u_hat[:, lo + h:lo + n] = ub
            xb = _butterfly(ub)
        else:
            lower = np.where(b != ERASED, b, np.where(a != ERASED, a ^ xa, ERASED))
            xb = decide(lower.astype(np.uint8), lo + h)
        return np.concatenate([xa ^ xb, xb], axis=1)

    decide(Y[:, bit_reversal(N)], 0)
    if single:
        u_hat, guessed = u_hat[0], guessed[0]
    return (u_hat, guessed) if return_guessed else u_hat


def pack_bits(bits) -> bytes:
    """Pack a 0/1 vector little-endian (first bit in the least significant position)."""
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def unpack_bits(data: bytes, n: int) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=n, bitorder="little")
