"""Shared helpers for the test suite."""
import numpy as np

from prs_sensing import Waveform, full_allocation
from prs_sensing.specest import ChannelEstimate

# Quarter-turn unit complex values, exact in binary floating point.
QUARTER = {0: 1.0 + 0.0j, 1: 0.0 - 1.0j, 2: -1.0 + 0.0j, 3: 0.0 + 1.0j}


def small_waveform(n_sc, n_sy, f_c_hz=26e9, delta_f_hz=120e3):
    return Waveform(f_c_hz=f_c_hz, delta_f_hz=delta_f_hz,
                    n_subcarriers=n_sc, n_symbols=n_sy)


def atom(n_sc, n_sy, range_bin, doppler_bin, amp=1.0, phase=0.0):
    """Separable on/off-grid target atom in the measurement domain."""
    n = np.arange(n_sc)[:, None]
    m = np.arange(n_sy)[None, :]
    return (amp * np.exp(1j * phase)
            * np.exp(-2j * np.pi * n * range_bin / n_sc)
            * np.exp(2j * np.pi * m * doppler_bin / n_sy))


def exact_atom(n_sc, n_sy, range_bin, doppler_bin, amp=1.0):
    """On-grid atom built from exact quarter-turn literals.

    Requires the bin to be a multiple of a quarter of the axis length, so
    the ramp phases are multiples of pi/2 and the values are exact; the
    unitary FFT of such an atom is an exact delta (zero leakage).
    """
    if n_sc % 4 or n_sy % 4:
        raise ValueError("axis lengths must be multiples of 4")
    if range_bin % (n_sc // 4) or doppler_bin % (n_sy // 4):
        raise ValueError("bin must be a multiple of a quarter axis")
    step_n = range_bin // (n_sc // 4)
    step_m = doppler_bin // (n_sy // 4)
    freq = np.array([QUARTER[(n * step_n) % 4] for n in range(n_sc)])
    time = np.array([QUARTER[(-m * step_m) % 4] for m in range(n_sy)])
    return amp * np.outer(freq, time)


def estimate_from_values(values, alloc=None, waveform=None):
    values = np.asarray(values, dtype=np.complex128)
    n_sc, n_sy = values.shape
    if alloc is None:
        alloc = full_allocation(n_sc, n_sy)
    if waveform is None:
        waveform = small_waveform(n_sc, n_sy)
    mask = alloc.mask()
    return ChannelEstimate(values=np.where(mask, values, 0), alloc=alloc,
                           delta_f_hz=waveform.delta_f_hz,
                           t_sym_s=waveform.t_sym_s, f_c_hz=waveform.f_c_hz)


def connected_components(mask2d):
    """4-connected component labels of a boolean grid."""
    lab = np.zeros(mask2d.shape, dtype=int)
    current = 0
    for i, j in np.argwhere(mask2d):
        if lab[i, j]:
            continue
        current += 1
        stack = [(i, j)]
        lab[i, j] = current
        while stack:
            a, b = stack.pop()
            for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                x, y = a + da, b + db
                if (0 <= x < mask2d.shape[0] and 0 <= y < mask2d.shape[1]
                        and mask2d[x, y] and not lab[x, y]):
                    lab[x, y] = current
                    stack.append((x, y))
    return lab


def brute_force_range_doppler(values, n_range, n_doppler):
    """Direct double-sum unitary DFT pair (inverse over subcarriers,
    forward over symbols), the independent oracle for the fast transform."""
    n_sc, n_sy = values.shape
    p = np.arange(n_range)[:, None]
    n = np.arange(n_sc)[None, :]
    inv = np.exp(2j * np.pi * p * n / n_range) / np.sqrt(n_range)
    q = np.arange(n_doppler)[:, None]
    m = np.arange(n_sy)[None, :]
    fwd = np.exp(-2j * np.pi * q * m / n_doppler) / np.sqrt(n_doppler)
    return inv @ values @ fwd.T
