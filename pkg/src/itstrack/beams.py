"""Surface configurations: DFT codebook, pilot-pair selection, SE payload beam.

During the pilot phase the surface plays L = 2 codewords from a DFT codebook;
during payload it applies the phase-conjugating configuration that maximises
the spectral efficiency for the current channel estimate.
"""

from dataclasses import dataclass
import math

import numpy as np

from .channel import ItsGeometry

# Codeword index used in records when no pilot was transmitted.
NO_CODEWORD = -1


@dataclass
class Codebook:
    """DFT codebook of M unit-modulus codewords (columns) and their beams."""

    codewords: np.ndarray
    beam_sines: np.ndarray
    beam_angles: np.ndarray

    @property
    def size(self) -> int:
        return self.codewords.shape[1]


def dft_codebook(geometry: ItsGeometry) -> Codebook:
    """Codebook c_k[m] = e^{j pi (m - (M-1)/2) (2k/M)}, k = -M/2 .. M/2 - 1.

    Column j holds the codeword for k = j - M/2; its beam points at
    arcsin(2k/M).
    """
    m = geometry.num_elements
    if m % 2 != 0:
        raise ValueError("codebook requires an even number of elements")
    k = np.arange(m) - m // 2
    sines = 2.0 * k / m
    centred = np.arange(m) - 0.5 * (m - 1)
    codewords = np.exp(1j * np.pi * np.outer(centred, sines))
    return Codebook(codewords=codewords, beam_sines=sines,
                    beam_angles=np.arcsin(sines))


@dataclass
class PilotConfigPair:
    """The two surface configurations used for one block's pilots."""

    theta1: np.ndarray
    theta2: np.ndarray
    codeword_indices: tuple[int, int]

    def __post_init__(self):
        if self.codeword_indices[0] == self.codeword_indices[1]:
            raise ValueError("pilot codewords must be distinct")

    def rows(self) -> np.ndarray:
        """Stacked (2, M) configuration matrix Theta."""
        return np.stack([self.theta1, self.theta2])


def se_max_config(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Phase-conjugating configuration e^{-j arg(h o g)}, the SE maximiser.

    Aligns every element's contribution of the cascaded channel h o g so the
    sum combines coherently; entries where h o g vanishes default to phase 0.
    """
    return np.exp(-1j * np.angle(np.asarray(h) * np.asarray(g)))


def myopic_select(codebook: Codebook, theta_bar: np.ndarray) -> PilotConfigPair:
    """Two codewords best aligned with the current payload configuration.

    Alignment of codeword c is |theta_bar^H c|; the two largest win, lower
    index first on ties.
    """
    align = np.abs(codebook.codewords.T @ np.conj(theta_bar))
    first = int(np.argmax(align))
    align = align.copy()
    align[first] = -np.inf
    second = int(np.argmax(align))
    return PilotConfigPair(theta1=codebook.codewords[:, first].copy(),
                           theta2=codebook.codewords[:, second].copy(),
                           codeword_indices=(first, second))


def exploratory_select(codebook: Codebook, theta_bar: np.ndarray,
                       phi_interval: tuple[float, float],
                       rng: np.random.Generator) -> PilotConfigPair:
    """Best-aligned codeword plus a random probe inside the search window.

    The second codeword is drawn uniformly from the codewords whose beam
    angle lies in ``phi_interval``, excluding the first pick; if that set is
    empty the selection degenerates to the myopic pair.
    """
    myopic = myopic_select(codebook, theta_bar)
    first = myopic.codeword_indices[0]
    lo, hi = phi_interval
    in_window = (codebook.beam_angles >= lo) & (codebook.beam_angles <= hi)
    in_window[first] = False
    candidates = np.flatnonzero(in_window)
    if candidates.size == 0:
        return myopic
    second = int(candidates[rng.integers(candidates.size)])
    return PilotConfigPair(theta1=codebook.codewords[:, first].copy(),
                           theta2=codebook.codewords[:, second].copy(),
                           codeword_indices=(first, second))


def spectral_efficiency(theta: np.ndarray, h: np.ndarray, g: np.ndarray,
                        power: float, sigma2: float) -> float:
    """Payload SE log2(1 + P |theta^T (h o g)|^2 / sigma^2) in bit/s/Hz."""
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    s = np.asarray(theta) @ (np.asarray(h) * np.asarray(g))
    return math.log2(1.0 + power * abs(s) ** 2 / sigma2)
