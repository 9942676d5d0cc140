# %% [markdown]
# # The classical path behind the kernel
#
# Under `x = S**(-2 alpha) / (sigma alpha)**2` the CEV diffusion becomes a Feller-type
# process with Hamiltonian `H = 2 x p**2 + (b x - a) p`. Between two endpoints there is
# one classical path, parameterised by two constants `D1` and `D2`.

# %%
import numpy as np
from scipy.integrate import solve_ivp

from cev_wkb import CevParams, stock_to_feller
from cev_wkb import classical as cl

p = CevParams(mu=0.03, sigma=0.3, alpha=-0.7)
fp = p.feller
x, x_T, T = stock_to_feller(100.0, p), stock_to_feller(106.0, p), 1.0
ec = cl.constants_from_endpoints(x, x_T, fp, T)
print(fp)
print(f"D1={ec.d1:.6g}  D2={ec.d2:.6g}")

# %% [markdown]
# The path starts at `x_T` for `tau = 0` and ends at `x` for `tau = T`.

# %%
tau = np.linspace(0.0, T, 6)
print(np.c_[tau, cl.path_position(tau, ec), cl.path_momentum(tau, ec)])

# %% [markdown]
# Integrating Hamilton's equations numerically from the initial phase point gives the
# same endpoint, and H stays constant along the way.

# %%
p_T = cl.path_momentum(0.0, ec)
sol = solve_ivp(lambda t, y: cl.hamilton_rhs(y[0], y[1], fp), (0, T), [x_T, p_T],
                method="DOP853", rtol=1e-12, atol=1e-12)
print(sol.y[0, -1], x)
H = cl.hamiltonian(cl.path_position(tau, ec), cl.path_momentum(tau, ec), fp)
print("H spread:", np.ptp(H))

# %% [markdown]
# Three ingredients of the kernel: the action, the integral of `4p + b` and the
# Van Vleck-Morette determinant J. J has a closed form, a phase-space form and a
# numerical one from the variational equations.

# %%
from cev_wkb.variational import vvm_via_variational

print("action        ", cl.action(ec))
print("exp factor    ", cl.mixed_derivative_integral(ec))
print("J closed      ", cl.vvm_determinant(ec))
print("J phase space ", cl.vvm_determinant_phase(x_T, p_T, fp, T))
print("J variational ", vvm_via_variational(ec))
