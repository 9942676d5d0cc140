# %% [markdown]
# # The WKB kernel against the exact transition density
#
# The kernel is `(2 pi J)**-0.5 * exp(I / 2) * exp(-S)`. For the CEV model the exact
# law is known through the noncentral chi-square distribution, so the approximation
# can be checked pointwise.

# %%
import math

import numpy as np
from scipy import stats

from cev_wkb import CevParams, kernel_mass, stock_to_feller, wkb_kernel

p = CevParams(mu=0.03, sigma=0.3, alpha=-0.5)
T, s0 = 1.0, 100.0
x = stock_to_feller(s0, p)
ev = wkb_kernel(x, stock_to_feller(104.0, p), p.feller, T)
print(ev.value, ev.action, ev.exp_factor_integral, ev.vvm)

# %% [markdown]
# Exact density of `S_T`, differentiated from the distribution function.

# %%
beta = 2 * (p.alpha + 1)
k = 2 * p.mu / (p.sigma**2 * (2 - beta) * math.expm1(p.mu * (2 - beta) * T))
xx = k * s0 ** (2 - beta) * math.exp(p.mu * (2 - beta) * T)
nu = 2 / (2 - beta)


def below(s):
    return stats.ncx2.sf(2 * xx, nu, 2 * k * s ** (2 - beta))


for s_T in (85.0, 95.0, 100.0, 105.0, 115.0):
    h = 1e-5 * s_T
    dens_s = (below(s_T + h) - below(s_T - h)) / (2 * h)
    dx_ds = (stock_to_feller(s_T + h, p) - stock_to_feller(s_T - h, p)) / (2 * h)
    wkb = wkb_kernel(x, stock_to_feller(s_T, p), p.feller, T).value
    print(f"S_T={s_T:6.1f}  wkb/exact - 1 = {wkb / (dens_s / dx_ds) - 1:+.2e}")

# %% [markdown]
# Mass of the kernel as the maturity grows. It starts at 1 and drifts very slowly.

# %%
for T_ in (0.01, 0.1, 0.5, 1.0, 2.0):
    print(T_, kernel_mass(x, p.feller, T_))
