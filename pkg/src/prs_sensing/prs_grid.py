"""PRS resource allocation and transmit-grid generation.

The positioning reference signal occupies a comb-structured subset of the
OFDM time-frequency grid.  A comb of size ``K_c`` places one subcarrier in
``K_c`` on each of ``K_c`` consecutive symbols, with a per-symbol frequency
stagger, so the occupied region has PRS density exactly ``1/K_c``.  The
base pattern is repeated ``12*num_rb/K_c`` times in frequency and
``repetition_factor`` times in time, leaving ``K_c*(time_gap-1)`` blank
symbols between repetitions.

Allocated resource elements carry unit-magnitude QPSK symbols drawn from a
degree-31 Gold sequence; everything else in the transmit grid is exactly
zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative subcarrier offset per pattern-local symbol, 5G-NR convention.
COMB_OFFSETS = {
    2: (0, 1),
    4: (0, 2, 1, 3),
    6: (0, 3, 1, 4, 2, 5),
    12: (0, 6, 3, 9, 1, 7, 4, 10, 2, 8, 5, 11),
}

#: Cyclic-prefix duration as a fraction of the useful symbol 1/delta_f.
NORMAL_CP_RATIO = 0.0703


@dataclass(frozen=True)
class Waveform:
    """OFDM numerology shared by every grid in a run."""

    f_c_hz: float
    delta_f_hz: float
    n_subcarriers: int
    n_symbols: int
    cp_ratio: float = NORMAL_CP_RATIO

    def __post_init__(self) -> None:
        if self.f_c_hz <= 0:
            raise ValueError(f"carrier frequency must be positive, got {self.f_c_hz}")
        if self.delta_f_hz <= 0:
            raise ValueError(f"subcarrier spacing must be positive, got {self.delta_f_hz}")
        if self.n_subcarriers < 1 or self.n_symbols < 1:
            raise ValueError("grid must have at least one subcarrier and one symbol")
        if self.cp_ratio <= 0:
            raise ValueError("cp_ratio must be positive (symbol duration must exceed 1/delta_f)")

    @property
    def t_sym_s(self) -> float:
        """OFDM symbol duration including the cyclic prefix."""
        return (1.0 + self.cp_ratio) / self.delta_f_hz


@dataclass(frozen=True)
class PrsConfig:
    """Comb parameters of a PRS resource.

    ``comb_size`` selects one of the four standard combs; ``num_rb`` sets
    the occupied bandwidth (12 subcarriers per resource block);
    ``repetition_factor`` patterns are placed in time with
    ``comb_size*(time_gap-1)`` blank symbols between consecutive patterns.
    """

    comb_size: int
    num_rb: int
    time_gap: int = 1
    repetition_factor: int = 1
    start_symbol: int = 0
    sequence_seed: int = 0

    def __post_init__(self) -> None:
        if self.comb_size not in COMB_OFFSETS:
            raise ValueError(
                f"comb_size must be one of {sorted(COMB_OFFSETS)}, got {self.comb_size}"
            )
        if self.num_rb < 1:
            raise ValueError(f"num_rb must be >= 1, got {self.num_rb}")
        if self.time_gap < 1:
            raise ValueError(f"time_gap must be >= 1, got {self.time_gap}")
        if self.repetition_factor < 1:
            raise ValueError(f"repetition_factor must be >= 1, got {self.repetition_factor}")
        if self.start_symbol < 0:
            raise ValueError(f"start_symbol must be >= 0, got {self.start_symbol}")
        if self.sequence_seed < 0:
            raise ValueError(f"sequence_seed must be >= 0, got {self.sequence_seed}")

    @property
    def n_active_subcarriers(self) -> int:
        return 12 * self.num_rb

    @property
    def symbol_span(self) -> int:
        """Number of symbols from the first occupied one to the last, inclusive."""
        f, g, k = self.repetition_factor, self.time_gap, self.comb_size
        return k * (f + (f - 1) * (g - 1))


@dataclass(frozen=True)
class ResourceSet:
    """The set of (subcarrier, symbol) resource elements allocated to PRS."""

    entries: frozenset
    n_sc: int
    n_sy: int

    def __post_init__(self) -> None:
        for n, m in self.entries:
            if not (0 <= n < self.n_sc and 0 <= m < self.n_sy):
                raise ValueError(f"resource element ({n},{m}) outside {self.n_sc}x{self.n_sy} grid")

    def __len__(self) -> int:
        return len(self.entries)

    def mask(self) -> np.ndarray:
        """Boolean occupancy matrix, shape (n_sc, n_sy)."""
        m = np.zeros((self.n_sc, self.n_sy), dtype=bool)
        if self.entries:
            idx = np.asarray(sorted(self.entries), dtype=np.intp)
            m[idx[:, 0], idx[:, 1]] = True
        return m

    def sorted_pairs(self) -> np.ndarray:
        """Entries as an (L, 2) array of (n, m), symbol-major order."""
        pairs = sorted(self.entries, key=lambda nm: (nm[1], nm[0]))
        return np.asarray(pairs, dtype=np.intp).reshape(-1, 2)


@dataclass
class OfdmGrid:
    """Complex resource-element grid plus the waveform metadata needed to
    interpret it (subcarrier spacing, symbol duration with CP, carrier)."""

    values: np.ndarray
    delta_f_hz: float
    t_sym_s: float
    f_c_hz: float

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.ndim != 2:
            raise ValueError("grid values must be a 2-D matrix (subcarriers x symbols)")
        if self.delta_f_hz <= 0 or self.f_c_hz <= 0:
            raise ValueError("delta_f_hz and f_c_hz must be positive")
        if self.t_sym_s <= 1.0 / self.delta_f_hz:
            raise ValueError("t_sym_s must exceed 1/delta_f_hz (CP duration must be positive)")

    @property
    def n_sc(self) -> int:
        return self.values.shape[0]

    @property
    def n_sy(self) -> int:
        return self.values.shape[1]


def comb_offsets(comb_size: int) -> tuple:
    """Subcarrier offset used by each pattern-local symbol of a comb.

    Returns a permutation of ``0..comb_size-1``; entry ``j`` is the offset
    applied in the j-th symbol of the pattern.
    """
    try:
        return COMB_OFFSETS[comb_size]
    except KeyError:
        raise ValueError(
            f"comb_size must be one of {sorted(COMB_OFFSETS)}, got {comb_size}"
        ) from None


def generate_allocation(cfg: PrsConfig, n_sc: int, n_sy: int) -> ResourceSet:
    """Expand a comb configuration into the explicit resource-element set.

    The pattern occupying symbols ``start_symbol + r*comb_size*time_gap ..
    +comb_size-1`` (r = 0..repetition_factor-1) places subcarriers
    ``offset[j] + k*comb_size`` for ``k = 0..12*num_rb/comb_size - 1`` on
    its j-th symbol.
    """
    if cfg.n_active_subcarriers > n_sc:
        raise ValueError(
            f"allocation spans {cfg.n_active_subcarriers} subcarriers but grid has {n_sc}"
        )
    if cfg.start_symbol + cfg.symbol_span > n_sy:
        raise ValueError(
            f"allocation needs symbols {cfg.start_symbol}.."
            f"{cfg.start_symbol + cfg.symbol_span - 1} but grid has {n_sy}"
        )
    offsets = comb_offsets(cfg.comb_size)
    n_freq_rep = cfg.n_active_subcarriers // cfg.comb_size
    entries = set()
    for rep in range(cfg.repetition_factor):
        sym0 = cfg.start_symbol + rep * cfg.comb_size * cfg.time_gap
        for j, off in enumerate(offsets):
            m = sym0 + j
            for k in range(n_freq_rep):
                entries.add((off + k * cfg.comb_size, m))
    return ResourceSet(entries=frozenset(entries), n_sc=n_sc, n_sy=n_sy)


def full_allocation(n_sc: int, n_sy: int) -> ResourceSet:
    """Every resource element occupied (useful for dense-sampling studies)."""
    entries = frozenset((n, m) for n in range(n_sc) for m in range(n_sy))
    return ResourceSet(entries=entries, n_sc=n_sc, n_sy=n_sy)


def gold_sequence(c_init: int, length: int) -> np.ndarray:
    """Pseudo-random bit sequence from two degree-31 m-sequences.

    The first register has fixed initial state; the second is loaded with
    ``c_init``.  Both are advanced past a 1600-step warm-up and XOR-combined.
    Returns ``length`` bits as uint8.
    """
    if length < 0:
        raise ValueError("length must be >= 0")
    if length == 0:
        return np.zeros(0, dtype=np.uint8)
    warmup = 1600
    total = length + warmup + 31
    x1 = np.zeros(total, dtype=np.uint8)
    x2 = np.zeros(total, dtype=np.uint8)
    x1[0] = 1
    init = int(c_init) % (1 << 31)
    for i in range(31):
        x2[i] = (init >> i) & 1
    # Recurrences x1[i+31] = x1[i+3]^x1[i], x2[i+31] = x2[i+3]^x2[i+2]^x2[i+1]^x2[i];
    # outputs at i+31 only depend on taps <= i+3, so blocks of 28 are safe.
    step = 28
    for i in range(0, total - 31, step):
        j = min(i + step, total - 31)
        x1[i + 31:j + 31] = x1[i + 3:j + 3] ^ x1[i:j]
        x2[i + 31:j + 31] = x2[i + 3:j + 3] ^ x2[i + 2:j + 2] ^ x2[i + 1:j + 1] ^ x2[i:j]
    return (x1[warmup:warmup + length] ^ x2[warmup:warmup + length]).astype(np.uint8)


def qpsk_from_bits(bits: np.ndarray) -> np.ndarray:
    """Map bit pairs to unit-magnitude QPSK points (+-1 +-1j)/sqrt(2)."""
    bits = np.asarray(bits)
    if bits.size % 2:
        raise ValueError("need an even number of bits")
    re = 1.0 - 2.0 * bits[0::2].astype(np.float64)
    im = 1.0 - 2.0 * bits[1::2].astype(np.float64)
    return (re + 1j * im) / np.sqrt(2.0)


def generate_prs_symbols(seed: int, alloc: ResourceSet, waveform: Waveform) -> OfdmGrid:
    """Fill the allocated resource elements with seeded QPSK symbols.

    Symbols are assigned in symbol-major order over the allocation so the
    mapping is deterministic.  All unallocated cells are exactly zero.
    """
    if (waveform.n_subcarriers, waveform.n_symbols) != (alloc.n_sc, alloc.n_sy):
        raise ValueError(
            f"waveform grid {waveform.n_subcarriers}x{waveform.n_symbols} does not match "
            f"allocation grid {alloc.n_sc}x{alloc.n_sy}"
        )
    values = np.zeros((alloc.n_sc, alloc.n_sy), dtype=np.complex128)
    n_re = len(alloc)
    if n_re:
        bits = gold_sequence(seed, 2 * n_re)
        symbols = qpsk_from_bits(bits)
        pairs = alloc.sorted_pairs()
        values[pairs[:, 0], pairs[:, 1]] = symbols
    return OfdmGrid(
        values=values,
        delta_f_hz=waveform.delta_f_hz,
        t_sym_s=waveform.t_sym_s,
        f_c_hz=waveform.f_c_hz,
    )
