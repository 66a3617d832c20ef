"""
Nonsmooth initial data
======================

Initial value is the indicator of (0, 1/2) on (0, 1). With no closed form the
error is measured against a run eight times finer in time on the same mesh.
"""

from thetacq import harness

table = harness.run_table2(harness.ExperimentConfig("table2", harness.TABLE2_CELLS, M=1023))
for r in table.rows:
    print(f"alpha={r.alpha} theta={r.theta:4} {r.scheme:9}  "
          + "  ".join(f"{e:.2e}" for e in r.errors) + f"   rate {r.rate:.2f}")

# the reference may also come from the scheme under test itself, which pulls
# the standard-scheme rates slightly above one
same = harness.run_table2(harness.ExperimentConfig(
    "table2", [(0.8, 0.5)], M=1023, reference_scheme="same"))
print("standard rate with a same-scheme reference:", round(same.row(0.8, 0.5, "standard").rate, 2))
