"""Square Gray-labelled QAM: constellations, bit mapping, slicing, soft demapping.

LLR sign convention used throughout the package: a positive LLR means the
bit is more likely to be 0.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

#: Supported modulation orders (square QAM, equal bit split per axis).
SUPPORTED_ORDERS = (4, 16, 64, 256, 1024, 4096)


def gray_encode(n: np.ndarray) -> np.ndarray:
    return n ^ (n >> 1)


def gray_decode(g: np.ndarray) -> np.ndarray:
    """Inverse of gray_encode, valid for words up to 32 bits."""
    b = np.asarray(g).copy()
    for shift in (1, 2, 4, 8, 16):
        b ^= b >> shift
    return b


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack the trailing axis of a {0,1} array into integers, MSB first."""
    bits = np.asarray(bits)
    k = bits.shape[-1]
    weights = 1 << np.arange(k - 1, -1, -1)
    return (bits * weights).sum(axis=-1)


def unpack_bits(values: np.ndarray, k: int) -> np.ndarray:
    """Unpack integers into a trailing axis of k bits, MSB first."""
    values = np.asarray(values)
    shifts = np.arange(k - 1, -1, -1)
    return ((values[..., None] >> shifts) & 1).astype(np.uint8)


@dataclass(frozen=True)
class Constellation:
    """Unit-energy square QAM whose points are indexed by their bit label.

    ``points[v]`` is the symbol carrying the label word ``v`` (an integer
    formed from ``bits_per_symbol`` bits, MSB first).  The first half of
    the word Gray-selects the in-phase amplitude, the second half the
    quadrature amplitude; amplitudes run from +(sqrt(M)-1) down to
    -(sqrt(M)-1) as the Gray-decoded half-word increases, so the all-zero
    word sits in the upper-right corner (e.g. QPSK 00 -> (1+1j)/sqrt(2)).
    """

    M: int
    points: np.ndarray
    bits_per_symbol: int
    E_s: float = 1.0

    @property
    def bit_labels(self) -> np.ndarray:
        """(M, bits_per_symbol) table of label words, row v = bits of v."""
        return unpack_bits(np.arange(self.M), self.bits_per_symbol)

    def __post_init__(self):
        if self.points.shape != (self.M,):
            raise ValueError("points must have shape (M,)")


@lru_cache(maxsize=None)
def make_constellation(M: int) -> Constellation:
    """Build the Gray-labelled square M-QAM constellation with E_s = 1."""
    if M not in SUPPORTED_ORDERS:
        raise ValueError(f"M must be one of {SUPPORTED_ORDERS}, got {M}")
    k = int(np.log2(M))
    half = k // 2
    m_side = 1 << half

    labels = np.arange(M)
    i_word = labels >> half
    q_word = labels & (m_side - 1)
    # Gray-decoded half-word j maps to amplitude (m-1) - 2j.
    i_amp = (m_side - 1) - 2 * gray_decode(i_word)
    q_amp = (m_side - 1) - 2 * gray_decode(q_word)
    points = i_amp + 1j * q_amp
    scale = np.sqrt(np.mean(np.abs(points) ** 2))
    return Constellation(M=M, points=points / scale, bits_per_symbol=k)


def map_bits(bits: np.ndarray, c: Constellation) -> complex | np.ndarray:
    """Map one word (or an array of words on the trailing axis) to symbols."""
    bits = np.asarray(bits)
    if bits.shape[-1] != c.bits_per_symbol:
        raise ValueError(
            f"expected {c.bits_per_symbol} bits per word, got {bits.shape[-1]}"
        )
    symbols = c.points[pack_bits(bits)]
    return symbols if symbols.ndim else complex(symbols)


def slice_hard(y: complex | np.ndarray, c: Constellation) -> np.ndarray:
    """Nearest-point hard decision; ties go to the lowest label index.

    Returns the label bits of the closest constellation point, shape
    ``y.shape + (bits_per_symbol,)``.
    """
    y = np.asarray(y)
    d2 = np.abs(y[..., None] - c.points) ** 2
    idx = np.argmin(d2, axis=-1)  # argmin takes the first (lowest) index on ties
    return unpack_bits(idx, c.bits_per_symbol)


def demap_soft(
    y_eff: complex,
    gain: complex,
    sigma_eff2: float,
    prior: np.ndarray | None,
    c: Constellation,
) -> np.ndarray:
    """Max-log a-posteriori LLRs of the bits carried by one symbol.

    ``prior`` holds per-bit a-priori LLRs (positive means bit 0); pass
    None or zeros when no prior information is available.
    """
    y = np.asarray([y_eff])
    g = np.asarray([gain])
    pr = None if prior is None else np.asarray(prior, dtype=float)[None, :]
    return demap_soft_many(y, g, sigma_eff2, pr, c)[0]


def demap_soft_many(
    y_eff: np.ndarray,
    gain: np.ndarray | complex,
    sigma_eff2: float | np.ndarray,
    priors: np.ndarray | None,
    c: Constellation,
) -> np.ndarray:
    """Vectorised demap_soft over a batch of scalar observations.

    y_eff: (N,) observations, gain: scalar or (N,), sigma_eff2: scalar or
    (N,), priors: None or (N, bits_per_symbol).  Returns (N, k) LLRs.
    """
    y = np.asarray(y_eff)
    sigma = np.asarray(sigma_eff2, dtype=float)
    if np.any(sigma <= 0):
        raise ValueError("sigma_eff2 must be positive")
    g = np.broadcast_to(np.asarray(gain), y.shape)

    # Symbol metric: -|y - g x|^2 / sigma^2 plus the a-priori term
    # sum_j (1 - 2 b_j(x)) * prior_j / 2.
    metric = -np.abs(y[:, None] - g[:, None] * c.points[None, :]) ** 2
    metric = metric / np.broadcast_to(sigma, y.shape)[:, None]
    signs = 1.0 - 2.0 * c.bit_labels  # (M, k) in {+1, -1}
    if priors is not None:
        metric = metric + 0.5 * np.asarray(priors, dtype=float) @ signs.T

    k = c.bits_per_symbol
    llrs = np.empty(y.shape + (k,), dtype=float)
    labels = c.bit_labels
    for j in range(k):
        mask0 = labels[:, j] == 0
        best0 = np.max(metric[:, mask0], axis=-1)
        best1 = np.max(metric[:, ~mask0], axis=-1)
        llrs[..., j] = best0 - best1
    return llrs
