"""Chain rule for derived sets, and the z_t construction behind dense range."""

# %%
import numpy as np

from lipdiff import EvaluableMap, MapPair, catalog_get, chain_rule_check, density_probe
from lipdiff.maps import Box, tsinlog_scalar, whole_space

# %% Smooth pair: both sides of the chain rule agree to rounding
rep = chain_rule_check(catalog_get("poly2"), [0.2, -0.5], [0.6, 0.8])
print("lhs", rep.lhs.value, "rhs", rep.rhs.value, "gap", rep.hausdorff_gap)
print("kappa", rep.kappa, "bound holds", rep.bound_holds)

# %% Oscillating composite: g(t) = (t, 0) then t sin(log|t|) on the first coordinate
g = EvaluableMap(whole_space(1, 1.0), 2, lambda t: np.array([t[0], 0.0]))
f = EvaluableMap(Box([-1.0, -1.0], [1.0, 1.0]), 1, lambda y: np.atleast_1d(tsinlog_scalar(y[0])))
rep = chain_rule_check(MapPair(g, f), [0.0], [1.0], cluster_tol=0.05, tol=0.05)
print(rep.lhs.verdict, rep.rhs.verdict, "hull gap", rep.hull_gap)

# %% Density probe on exp/log: z_t -> dg^-1 w and the gap closes
rep = density_probe(catalog_get("exp-log"), [0.0], [1.0])
for t, z, step1, gap in rep.trace[::4]:
    print(f"t={t:.2e}  z={z[0]:.8f}  step1={step1:.1e}  gap={gap:.2e}")

# %% On the cube pair z_t = t**(-2/3) escapes every multiple of |w|
rep = density_probe(catalog_get("cube"), [0.0], [1.0])
print("max |z_t|", rep.max_zt, "M_f |w|", rep.lipschitz_bound, "bound ok", rep.bound_ok)
