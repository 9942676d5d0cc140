# %% [markdown]
# # Monte Carlo oracle and parameter sweeps
#
# Euler-Maruyama with antithetic pairs, absorption at zero and a counter-based
# generator, so any prefix of the path stream is reproducible on its own.

# %%
import io

from cev_wkb import CevParams, MarketSpec, McConfig, SweepSpec, cev_call_price, mc_call_price, mc_convergence_curve, run_sweep

m = MarketSpec(100.0, 110.0, 0.03, 1.0)
p = CevParams(0.03, 0.3, -0.5)
est = mc_call_price(m, p, McConfig(n_pairs=50_000))
print(est)
print("WKB:", cev_call_price(m, p))

# %% [markdown]
# A running estimate over one stream. The standard error falls like `n**-0.5`.

# %%
m2 = MarketSpec(100.0, 110.0, 0.03, 2.0)
p2 = CevParams(0.03, 0.3, -0.4)
for n, mean, se in mc_convergence_curve(m2, p2, McConfig(n_pairs=20_000, steps_per_year=250),
                                         [1000, 4000, 16000, 40000]):
    print(n, mean, se)
print("WKB:", cev_call_price(m2, p2))

# %% [markdown]
# A small sweep along alpha written as CSV. Each row is reseeded from the base seed
# and its index, so adding rows never changes existing ones.

# %%
buf = io.StringIO()
run_sweep(SweepSpec("alpha", (-0.9, -0.7, -0.5, -0.3)), McConfig(n_pairs=10_000, steps_per_year=250), out=buf)
print(buf.getvalue())
