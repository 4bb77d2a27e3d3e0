"""Qutrit mutually unbiased bases and correlation coefficients."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UndefinedConditionalError
from ..qcore import OMEGA

_W, _WC = OMEGA, np.conj(OMEGA)
_RAW = {
    1: [(1, 0, 0), (0, 1, 0), (0, 0, 1)],
    2: [(1, 1, 1), (1, _W, _WC), (1, _WC, _W)],
    3: [(1, _W, 1), (1, _WC, _WC), (1, 1, _W)],
    4: [(1, _WC, 1), (1, 1, _WC), (1, _W, _W)],
}


@dataclass(frozen=True)
class MubBasis:
    """Four bases S_1..S_4, each as a 3x3 array of unnormalized row vectors."""
    vectors: dict

    def normalized(self, k: int) -> np.ndarray:
        v = np.asarray(self.vectors[k], complex)
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    def signal_unitary(self, k: int) -> np.ndarray:
        """Rows are bras <s_m| of S_k."""
        return self.normalized(k).conj()

    def idler_unitary(self, k: int) -> np.ndarray:
        """Rows are bras of I_k = S_k^*."""
        return self.normalized(k)


def mub_bases() -> MubBasis:
    return MubBasis({k: np.array(v, complex) for k, v in _RAW.items()})


def correlation_coefficient(counts, k: int | None = None) -> float:
    """Fraction of counts in the correlated cells (m, m) under the pair (S_k, I_k).

    With I_k = S_k^* the maximally entangled state only fires outcome pairs with
    equal index, in every k; the argument is kept for labelling.
    """
    c = np.asarray(counts, float)
    tot = c.sum()
    if tot <= 0:
        raise UndefinedConditionalError("zero total counts")
    return float(np.trace(c) / tot)


def balance_counts(counts, efficiencies) -> np.ndarray:
    """Divide each cell by the product of its signal and idler port efficiencies.

    `efficiencies` lists ports 1..6; relative values suffice.
    """
    e = np.asarray(efficiencies, float)
    return np.asarray(counts, float) / np.outer(e[0::2], e[1::2])


def efficiencies_from_singles(singles) -> np.ndarray:
    """Relative port efficiencies from singles on ports 1..6, scaled per side to max 1.

    Assumes each qutrit is evenly spread over its three paths in the calibration
    basis, so singles differences reflect transmission only.
    """
    s = np.asarray(singles, float)
    out = np.empty(6)
    out[0::2] = s[0::2] / s[0::2].max()
    out[1::2] = s[1::2] / s[1::2].max()
    return out
