"""CGLMP table, KS conditionals and QKD error rate, ideal and at the measured fidelity."""
from qutritchip.analysis import bell, contextuality, qkd
from qutritchip.experiment import PAPER_FIDELITY
from qutritchip.qcore import max_entangled, white_noise_for_fidelity, white_noise_state

psi = max_entangled()
for label, st in (("ideal", psi),
                  ("noisy", white_noise_state(psi, white_noise_for_fidelity(PAPER_FIDELITY)))):
    tabs = bell.all_tables(st)
    print(f"== {label}")
    for name, v in bell.cglmp_table(tabs):
        print(f"  {name:28s} {v:.5f}")
    print(f"  I3 = {bell.cglmp_i3(tabs):.5f}  (local bound 2)")
    lhs, cond = contextuality.ks_lhs(st)
    print(f"  KS LHS = {lhs:.5f}  conditionals {cond}")
er = qkd.qkd_error_rate(PAPER_FIDELITY)
print(f"QKD error rate at F={PAPER_FIDELITY}: {er:.5f}, bound {qkd.SECURITY_BOUND}")
