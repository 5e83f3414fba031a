"""Derived sets: where difference quotients accumulate as t shrinks to 0."""

# %%
import numpy as np

from lipdiff import StepSchedule, catalog_get, delta_derived_set, derived_set_estimate

tsinlog = catalog_get("tsinlog")  # t sin(log|t|), zero at zero

# %% Raw quotients at 0 in direction 1 are sin(log t): they never settle
snap = delta_derived_set(tsinlog, [0.0], [1.0], delta=0.1, grid_count=12)
for t, q in zip(snap.steps, snap.quotients[:, 0]):
    print(f"t={t:.3e}  quotient={q:+.4f}  sin(log t)={np.sin(np.log(t)):+.4f}")

# %% Clustering the schedule tail reports a multivalued set filling [-1, 1]
s = derived_set_estimate(tsinlog, [0.0], [1.0], StepSchedule(), cluster_tol=0.05)
print(s.verdict, "hull:", [b.tolist() for b in s.hull()])

# %% A smooth map gives a singleton, the usual directional derivative
exp = catalog_get("exp-log").g
s = derived_set_estimate(exp, [0.0], [1.0])
print(s.verdict, s.value, "stability", s.stability)

# %% x**(1/3) at 0: quotients grow like t**(-2/3)
s = derived_set_estimate(catalog_get("cube").f, [0.0], [1.0])
print(s.verdict, np.linalg.norm(s.tail, axis=1)[-3:])
