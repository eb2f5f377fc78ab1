"""Map the certificate boundary by sweeping the delayed-gain ratio beta0.

The certificate exists exactly while beta0 < sqrt(1 - d); this sweep crosses
that boundary (0.9 at d = 0.19) and records, for each grid point, whether a
certificate exists and the decay rate fitted from a short simulation.

Run:  python3 demos/stability_map.py
"""

import math

from piezobeam import SweepSpec, execute
from piezobeam.scenario import load_config

base = load_config("certified-decay")
base["weights"]["delta2"]["ratio"] = 0.1  # keep |delta2| under every beta0

values = (0.3, 0.6, 0.85, 0.95, 1.05)
spec = SweepSpec(base, axes=(("weights.beta0", values),), n=101, horizon=15.0)
print(f"sweeping beta0 over {values} at d = {base['delay']['slope_bound']} "
      f"(boundary sqrt(1-d) = {math.sqrt(1 - base['delay']['slope_bound']):.2f})")
print()
print(f"{'beta0':>6s} {'valid':>6s} {'status':>11s} {'H2':>8s} {'E(T)/E(0)':>10s}")
for rec in execute(spec):
    h2 = f"{rec.h2:.4f}" if rec.h2 == rec.h2 else "-"
    ratio = f"{rec.energy_ratio:.2e}" if rec.energy_ratio == rec.energy_ratio else "-"
    print(f"{rec.values[0]:6.2f} {str(rec.valid):>6s} {rec.status:>11s} "
          f"{h2:>8s} {ratio:>10s}")
