"""CGLMP inequality for two qutrits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..experiment import coincidence_probs
from ..qcore import check_unitary

OFFSETS = {("A", 1): 0.0, ("A", 2): 0.5, ("B", 1): 0.25, ("B", 2): -0.25}


@dataclass(frozen=True)
class CglmpSetting:
    party: str
    index: int

    def __post_init__(self):
        if (self.party, self.index) not in OFFSETS:
            raise ValueError(f"no CGLMP setting {self.party}{self.index}")

    @property
    def offset(self) -> float:
        return OFFSETS[(self.party, self.index)]


def cglmp_kets(setting: CglmpSetting) -> np.ndarray:
    """Row K holds the basis ket; Alice uses +K, Bob -L in the exponent."""
    sign = 1 if setting.party == "A" else -1
    j = np.arange(3)
    k = np.arange(3)[:, None]
    return np.exp(1j * 2 * np.pi / 3 * j * (sign * k + setting.offset)) / np.sqrt(3)


def cglmp_bases(setting: CglmpSetting) -> np.ndarray:
    """Unitary whose row K is the bra <K|, so U @ psi gives outcome amplitudes."""
    return check_unitary(cglmp_kets(setting).conj(), 3)


def cglmp_probabilities(state, a: int, b: int) -> np.ndarray:
    """Joint table P[K, L] for Alice setting a and Bob setting b."""
    return coincidence_probs(state, cglmp_bases(CglmpSetting("A", a)),
                             cglmp_bases(CglmpSetting("B", b)))


def p_shift(table, k: int) -> float:
    """P(A = B + k mod 3) from a table P[K, L]."""
    t = np.asarray(table)
    return float(sum(t[(l + k) % 3, l] for l in range(3)))


# Table rows: (label, (a, b), k) meaning P(A_a = B_b + k); expected value for |Psi>.
TABLE_ROWS = (
    ("P(A1=B1)", (1, 1), 0),
    ("P(A1=B1-1)", (1, 1), -1),
    ("P(A1=B2)", (1, 2), 0),
    ("P(A1=B2+1)", (1, 2), 1),
    ("P(A2=B1-1)", (2, 1), -1),
    ("P(A2=B1)", (2, 1), 0),
    ("P(A2=B2)", (2, 2), 0),
    ("P(A2=B2-1)", (2, 2), -1),
)


def cglmp_i3(tables: dict) -> float:
    """I3 from the four tables keyed by (a, b); classical bound 2.

    I3 = P(A1=B1) + P(B1=A2+1) + P(A2=B2) + P(A1=B2)
       - P(A1=B1-1) - P(B1=A2) - P(A2=B2-1) - P(B2=A1-1)
    """
    t = tables
    plus = p_shift(t[1, 1], 0) + p_shift(t[2, 1], -1) + p_shift(t[2, 2], 0) + p_shift(t[1, 2], 0)
    minus = p_shift(t[1, 1], -1) + p_shift(t[2, 1], 0) + p_shift(t[2, 2], -1) + p_shift(t[1, 2], 1)
    return plus - minus


def all_tables(state) -> dict:
    return {(a, b): cglmp_probabilities(state, a, b) for a in (1, 2) for b in (1, 2)}


def cglmp_table(tables: dict) -> list[tuple[str, float]]:
    """The eight difference probabilities in table order."""
    return [(label, p_shift(tables[ab], k)) for label, ab, k in TABLE_ROWS]
