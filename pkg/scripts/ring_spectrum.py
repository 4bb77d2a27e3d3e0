"""Drop/through spectrum of the tunable ring and a coupling map over the two MZI detunings."""
import argparse
from pathlib import Path

import numpy as np

from qutritchip import ring

ap = argparse.ArgumentParser()
ap.add_argument("--point", default="critical", choices=sorted(ring.OPERATING_POINTS))
ap.add_argument("--out", type=Path, default=Path("out/ring"))
ap.add_argument("--grid", type=int, default=41)
args = ap.parse_args()
args.out.mkdir(parents=True, exist_ok=True)

p = ring.paper_ring(args.point)
spec = ring.sweep_spectrum(p, 1540, 1565, 20001)
(args.out / f"spectrum_{args.point}.csv").write_text(spec.to_csv())
for r in ring.find_resonances(p, 1540, 1565):
    fwhm = ring.linewidth(p, r.wavelength_nm) * 1e3
    print(f"{r.wavelength_nm:10.4f} nm  drop {r.drop_power:.3f}  through {r.through_power:.2e}  "
          f"FWHM {fwhm:6.1f} pm  {ring.classify_coupling(p, r.wavelength_nm)}")

# through-port extinction at the pump over (phi1, phi2)
lam0 = p.reference_wavelength_nm
phis = np.linspace(0, 2 * np.pi, args.grid)
rows = ["phi1_rad,phi2_rad,through_power,drop_power"]
for a in phis:
    for b in phis:
        q = ring.set_mzi_detunings(p, a, b)
        e_d, e_t = ring.drop_through_amplitudes(q, lam0)
        rows.append(f"{a!r},{b!r},{abs(e_t) ** 2!r},{abs(e_d) ** 2!r}")
(args.out / "mzi_phase_map.csv").write_text("\n".join(rows) + "\n")
print(f"wrote {args.out}")
