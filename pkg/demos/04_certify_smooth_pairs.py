"""Certify C^1 inverse pairs and compare df_y with (dg_x)^-1."""

# %%
import numpy as np

from lipdiff import CertifyConfig, catalog_get, converse_ift_certify
from lipdiff.maps import rng_for

for name in ("exp-log", "affine", "poly2", "identity-3"):
    pair = catalog_get(name)
    for x in pair.g.domain.sample(rng_for(0, name), 3):
        cert = converse_ift_certify(pair, x)
        print(f"{name:10s} x={np.round(x, 3)}  {cert.verdict:9s} "
              f"cond={cert.jacobian.condition:.2f} consistency={cert.inverse_consistency:.1e}")

# %% df at the image of x for the diagonal affine map is diag(1/2, 1/3)
cert = converse_ift_certify(catalog_get("affine"), [0.3, -0.2])
print(cert.df)

# %% Tolerances live in one config object
cfg = CertifyConfig(consistency_tol=1e-8, lipschitz_pairs=128, seed=7)
print(converse_ift_certify(catalog_get("poly2"), [0.5, 0.5], cfg).verdict)
