"""
Robustness as alpha -> 0
========================

Manufactured solution u = (E_a(-t^a) + t^3) sin x with the matching source.
At a fixed step the error does not grow as alpha shrinks.
"""

from thetacq import harness

cfg = harness.ExperimentConfig("alpha_sweep", taus=(2.0**-7,), M=1023)
res = harness.run_alpha_sweep(cfg)

for theta in harness.SWEEP_THETAS:
    errs = [res.error(a, theta) for a in harness.SWEEP_ALPHAS]
    print(f"theta={theta:5}: " + "  ".join(f"{e:.2e}" for e in errs)
          + f"   ratio(1e-3 / 0.5) = {res.ratio(theta):.3f}")
