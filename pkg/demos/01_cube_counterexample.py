"""g(x) = x**3 is a smooth homeomorphism of (-1, 1) whose inverse is not differentiable at 0.

Walk through why the certifier refuses to call dg_0 an isomorphism.
"""

# %%
import numpy as np

from lipdiff import catalog_get, converse_ift_certify, fd_jacobian, lipschitz_estimate

pair = catalog_get("cube")
print(pair.g(np.array([0.5])))  # 0.125
print(pair.f(np.array([0.125])))  # 0.5

# %% The derivative of g at 0 vanishes
J = fd_jacobian(pair.g, [0.0])
print("J =", J.matrix, "sigma_min =", J.invertibility.sigma_min)

# %% The inverse is continuous but not Lipschitz near 0
est = lipschitz_estimate(pair.f, [0.0], [1e-2, 1e-4, 1e-6])
for r, m, n in est.profile:
    print(f"r={r:.0e}  M(r)={m:10.2f}  pairs={n}")
print("growth per two decades:", est.estimates[1] / est.estimates[0], "vs 100**(2/3) =", 100 ** (2 / 3))
print("verdict:", est.verdict)

# %% The full pipeline names the first clause that fails
cert = converse_ift_certify(pair, [0.0])
print(cert.verdict, cert.reason)
for name, status, detail in cert.clauses:
    print(f"  {name:24s} {status:8s} {detail}")
