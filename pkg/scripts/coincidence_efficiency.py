"""Drop-drop coincidence efficiency against pump power at each operating point."""
import numpy as np

from qutritchip import ring
from qutritchip.errors import UndefinedEfficiencyError

powers = np.geomspace(0.01, 10, 13)
rng = np.random.default_rng(7)
for point in sorted(ring.OPERATING_POINTS):
    m = ring.pair_source_model(ring.paper_ring(point))
    print(f"# {point}: routing {m.routing()}")
    for pw in powers:
        try:
            sampled = f"{ring.coincidence_efficiency(*m.sample(pw, 60.0, rng)):.4f}"
        except UndefinedEfficiencyError:
            sampled = "no counts"
        print(f"  {pw:7.3f} mW  model {m.efficiency(pw):.4f}  sampled(60 s) {sampled}")
