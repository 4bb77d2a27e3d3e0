"""Error rate of qutrit entanglement-based key distribution inferred from fidelity."""
from __future__ import annotations

# maximal tolerable error rate for three-dimensional keys against coherent attacks
SECURITY_BOUND = 0.1595


def qkd_error_rate(f: float) -> float:
    """ER = 3(1 - F)/4, valid when both parties measure in the same unbiased basis."""
    if not 0 <= f <= 1:
        raise ValueError("fidelity must lie in [0, 1]")
    return 3 * (1 - f) / 4


def qkd_report(f: float) -> dict:
    er = qkd_error_rate(f)
    return {"fidelity": f, "error_rate": er, "bound": SECURITY_BOUND, "secure": er < SECURITY_BOUND}
