"""Pump-phase coincidence map, degenerate detector groups and cut sensitivity."""
from pathlib import Path

import numpy as np

from qutritchip.analysis import metrology
from qutritchip.experiment import NoiseModel, PAPER_FIDELITY
from qutritchip.qcore import white_noise_for_fidelity

out = Path("out/metrology")
out.mkdir(parents=True, exist_ok=True)
g = np.linspace(-np.pi, np.pi, 121)
maps = metrology.pump_phase_map(g, g)
np.savez(out / "pump_phase_map.npz", grid=g, **maps)
print("degenerate groups:", metrology.degenerate_groups(maps))
noise = NoiseModel(white_noise_weight=white_noise_for_fidelity(PAPER_FIDELITY))
for label, nm in (("ideal", None), ("noisy", noise)):
    s = metrology.sensitivity_scan(noise=nm)
    print(label, {k: round(v, 5) for k, v in s.sensitivity.items()}, s.averages)
print("benchmarks: two-path", metrology.TWO_PATH_BENCHMARK, "three-path", metrology.THREE_PATH_BENCHMARK)
