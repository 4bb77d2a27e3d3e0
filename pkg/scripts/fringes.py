"""RHOM and qubit-interference fringes for every path pair, ideal and with white noise."""
import numpy as np

from qutritchip.experiment import NoiseModel, PAPER_FIDELITY, qubit_fringe, rhom_fringe, visibility
from qutritchip.qcore import white_noise_for_fidelity

scan = np.linspace(0, 2 * np.pi, 161)
noise = NoiseModel(white_noise_weight=white_noise_for_fidelity(PAPER_FIDELITY))
for pair in ("12", "13", "23"):
    for label, nm in (("ideal", None), ("noisy", noise)):
        r, q = rhom_fringe(pair, scan, nm), qubit_fringe(pair, scan, nm)
        vq = ", ".join(f"{k} {visibility(q, k):.4f}" for k in q.values)
        print(f"{pair} {label}: RHOM V {visibility(r):.4f} (period {r.period:.3f});  qubit {vq} "
              f"(period {q.period:.3f})")
