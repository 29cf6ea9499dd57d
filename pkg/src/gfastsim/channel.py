"""Per-tone FEXT channel matrices: synthesis, CSV interchange, application.

The synthetic cable model is log-domain parametric: the direct path loses
``direct_atten_coeff * loop_length_m * sqrt(f_MHz)`` dB while crosstalk
grows log-linearly in frequency and loop length, so the two families of
curves cross inside the upper half of the band at the default 100 m loop.
Entry phases are i.i.d. uniform.  All randomness is driven by explicit
seeds or generators; equal inputs give bit-identical outputs.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np


class ChannelConfigError(ValueError):
    """Invalid grid, cable parameters or line count."""


class ChannelCsvError(ValueError):
    """Malformed channel CSV file."""


@dataclass(frozen=True)
class ToneGrid:
    """Uniformly spaced tone grid over [f_start_hz, f_end_hz]."""

    num_tones: int
    f_start_hz: float
    f_end_hz: float

    def __post_init__(self):
        if self.num_tones < 1:
            raise ChannelConfigError("num_tones must be >= 1")
        if not self.f_end_hz > self.f_start_hz:
            raise ChannelConfigError("f_end_hz must exceed f_start_hz")

    @property
    def spacing_hz(self) -> float:
        return (self.f_end_hz - self.f_start_hz) / self.num_tones

    def center_freq_hz(self, tone_index: int) -> float:
        return self.f_start_hz + tone_index * self.spacing_hz

    def frequencies_hz(self) -> np.ndarray:
        return self.f_start_hz + np.arange(self.num_tones) * self.spacing_hz


#: Desk-scale default grid: the 2-212 MHz band split into 256 tones.
DEFAULT_GRID = ToneGrid(num_tones=256, f_start_hz=2e6, f_end_hz=212e6)

#: Full-scale grid matching the 4096-tone band plan.
FULL_GRID = ToneGrid(num_tones=4096, f_start_hz=2e6, f_end_hz=212e6)


@dataclass(frozen=True)
class CableModelParams:
    """Parametric twisted-pair binder model.

    Magnitudes in dB: direct path -direct_atten_coeff * length * sqrt(f_MHz);
    crosstalk fext_base_db + fext_freq_slope*log10(f_MHz)
    + fext_length_term*log10(length) + a per-pair N(0, fext_spread_db^2)
    offset that is fixed across tones.  fext_base_db = -inf disables
    crosstalk exactly.
    """

    loop_length_m: float = 100.0
    direct_atten_coeff: float = 0.0172  # dB per metre per sqrt(MHz)
    fext_base_db: float = -62.5
    fext_freq_slope: float = 15.0  # dB per decade of frequency
    fext_length_term: float = 5.0  # dB per decade of loop length
    fext_spread_db: float = 3.0
    seed: int = 20260801

    def __post_init__(self):
        if self.loop_length_m <= 0:
            raise ChannelConfigError("loop_length_m must be positive")
        if self.direct_atten_coeff <= 0:
            raise ChannelConfigError("direct_atten_coeff must be positive")


@dataclass(frozen=True)
class ImpulseNoiseConfig:
    """Bursty symbol-wide noise: each OFDM symbol is hit with probability
    kappa, adding white complex Gaussian noise power_ratio_db above the
    background noise on every tone of that symbol."""

    kappa: float
    power_ratio_db: float = 20.0

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 1.0:
            raise ChannelConfigError("kappa must lie in [0, 1]")


@dataclass(frozen=True)
class ToneChannel:
    """Frequency-domain L x L channel matrix of one tone.

    Diagonal entries are the direct paths, off-diagonal entries the FEXT
    coupling from other lines.  center_freq_hz is NaN for channels loaded
    from CSV without an accompanying grid.
    """

    tone_index: int
    center_freq_hz: float
    matrix: np.ndarray

    @property
    def L(self) -> int:
        return self.matrix.shape[0]

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ChannelConfigError("matrix must be square with L >= 1")
        if not np.all(np.isfinite(m)):
            raise ChannelConfigError("matrix entries must be finite")


def synthesize_channel(
    grid: ToneGrid, params: CableModelParams, L: int
) -> list[ToneChannel]:
    """Generate one ToneChannel per grid tone, reproducibly from the seed."""
    if L < 1:
        raise ChannelConfigError("L must be >= 1")
    rng = np.random.default_rng(params.seed)

    f_mhz = grid.frequencies_hz() / 1e6
    direct_db = -params.direct_atten_coeff * params.loop_length_m * np.sqrt(f_mhz)

    # Per-pair coupling offsets are drawn once and shared by all tones.
    pair_offset_db = rng.normal(0.0, params.fext_spread_db, size=(L, L))
    if math.isinf(params.fext_base_db) and params.fext_base_db < 0:
        fext_mag = np.zeros((grid.num_tones, L, L))
    else:
        fext_db = (
            params.fext_base_db
            + params.fext_freq_slope * np.log10(f_mhz)[:, None, None]
            + params.fext_length_term * math.log10(params.loop_length_m)
            + pair_offset_db[None, :, :]
        )
        fext_mag = 10.0 ** (fext_db / 20.0)

    eye = np.eye(L, dtype=bool)
    mag = np.where(eye[None, :, :], 10.0 ** (direct_db / 20.0)[:, None, None], fext_mag)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(grid.num_tones, L, L))
    matrices = mag * np.exp(1j * phases)

    return [
        ToneChannel(t, grid.center_freq_hz(t), matrices[t])
        for t in range(grid.num_tones)
    ]


CSV_HEADER = ["tone", "l", "m", "re", "im"]


def save_channel_csv(path, channels: list[ToneChannel]) -> None:
    """Write channels in the interchange format (header tone,l,m,re,im).

    Line indices l, m are 1-based; tone indices are 0-based.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for ch in channels:
            for l in range(ch.L):
                for m in range(ch.L):
                    v = complex(ch.matrix[l, m])
                    writer.writerow([ch.tone_index, l + 1, m + 1, repr(v.real), repr(v.imag)])


def load_channel_csv(path, grid: ToneGrid | None = None) -> list[ToneChannel]:
    """Read the interchange CSV back into per-tone matrices.

    Row order is irrelevant; every (tone, l, m) combination for
    l, m in 1..L must appear exactly once.  Tone centre frequencies are
    taken from ``grid`` when given, otherwise recorded as NaN.
    """
    entries: dict[int, dict[tuple[int, int], complex]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ChannelCsvError("empty channel CSV") from None
        if [h.strip() for h in header] != CSV_HEADER:
            raise ChannelCsvError(f"expected header {','.join(CSV_HEADER)}")
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                tone, l, m = int(row[0]), int(row[1]), int(row[2])
                re, im = float(row[3]), float(row[4])
            except (ValueError, IndexError):
                raise ChannelCsvError(f"unparsable row {row_num}: {row}") from None
            if l < 1 or m < 1:
                raise ChannelCsvError(f"line indices are 1-based at (tone {tone}, {l}, {m})")
            if not (math.isfinite(re) and math.isfinite(im)):
                raise ChannelCsvError(f"non-finite value at (tone {tone}, {l}, {m})")
            per_tone = entries.setdefault(tone, {})
            if (l, m) in per_tone:
                raise ChannelCsvError(f"duplicate entry (tone {tone}, {l}, {m})")
            per_tone[(l, m)] = complex(re, im)

    if not entries:
        raise ChannelCsvError("channel CSV holds no data rows")
    L = max(max(max(l, m) for l, m in d) for d in entries.values())
    channels = []
    for tone in sorted(entries):
        matrix = np.zeros((L, L), dtype=complex)
        for l in range(1, L + 1):
            for m in range(1, L + 1):
                if (l, m) not in entries[tone]:
                    raise ChannelCsvError(f"missing entry (tone {tone}, {l}, {m})")
                matrix[l - 1, m - 1] = entries[tone][(l, m)]
        freq = grid.center_freq_hz(tone) if grid is not None else float("nan")
        channels.append(ToneChannel(tone, freq, matrix))
    return channels


def complex_awgn(shape, variance, rng: np.random.Generator) -> np.ndarray:
    """Circularly symmetric complex Gaussian with E|w|^2 = variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_infection_flags(
    kappa: float, num_symbols: int, rng: np.random.Generator
) -> np.ndarray:
    """One Bernoulli(kappa) flag per OFDM symbol, shared by all tones."""
    return rng.random(num_symbols) < kappa


def apply_channel(
    H: ToneChannel | np.ndarray,
    X: np.ndarray,
    sigma_w2: float,
    rng: np.random.Generator,
    impulse: ImpulseNoiseConfig | None = None,
    infected: bool = False,
) -> np.ndarray:
    """Y = H X + W, optionally plus the impulse burst U on infected symbols.

    sigma_w2 is the total complex noise variance per receive entry.  With
    sigma_w2 = 0 and no infection the output is exactly H X (no generator
    draws are consumed).
    """
    if sigma_w2 < 0:
        raise ValueError("sigma_w2 must be >= 0")
    matrix = H.matrix if isinstance(H, ToneChannel) else np.asarray(H)
    y = matrix @ X
    if sigma_w2 > 0:
        y = y + complex_awgn(y.shape, sigma_w2, rng)
    if infected:
        if impulse is None:
            raise ValueError("infected symbol needs an ImpulseNoiseConfig")
        sigma_u2 = sigma_w2 * 10.0 ** (impulse.power_ratio_db / 10.0)
        if sigma_u2 > 0:
            y = y + complex_awgn(y.shape, sigma_u2, rng)
    return y


def noise_enhancement(H: ToneChannel | np.ndarray) -> float:
    """Noise amplification of the channel-inverting canceller.

    Returns trace((H^H H)^-1) / L, the ratio of mean noise power after
    inversion to the mean noise power before it.
    """
    matrix = H.matrix if isinstance(H, ToneChannel) else np.asarray(H)
    s = np.linalg.svd(matrix, compute_uv=False)
    if s[-1] == 0.0:
        raise np.linalg.LinAlgError("singular channel matrix")
    return float(np.sum(1.0 / s**2) / matrix.shape[0])
