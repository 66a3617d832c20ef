"""
Decay of the shift weights
==========================

Only the first few coefficients of exp(theta delta(z)) matter in practice.
"""

from thetacq import harness, stepper

res = harness.run_weight_decay()
for theta in harness.DECAY_THETAS:
    w = res.weights[theta]
    print(f"theta={theta:5}: |t_10|={w[10]:.1e}  |t_30|={w[30]:.1e}  |t_60|={w[60]:.1e}  "
          f"slope {res.slopes[theta]:.2f}")

# a solve with the tail dropped below 1e-14 barely notices
problem = harness.example2(0.5)
space = stepper.Space.build(0.0, 3.141592653589793, 255)
full = stepper.solve(stepper.SchemeConfig.uniform(0.5, 0.4, 0.5, 64), problem, space)
cut = stepper.solve(stepper.SchemeConfig.uniform(0.5, 0.4, 0.5, 64, shift_cutoff=1e-14),
                    problem, space)
print("max difference after truncation:", abs(full.W - cut.W).max())
