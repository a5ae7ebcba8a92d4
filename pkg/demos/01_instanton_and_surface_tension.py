"""Solve the instanton and measure the surface tension.

The interface profile is the antisymmetric monotone fixed point of
q = tanh(beta J*q). Its short-range energy is the surface tension tau, the
price of one sign change, and its tail decays exponentially at a rate set by
the linearization around the plateau.

Run:  python demos/01_instanton_and_surface_tension.py
"""

from froth1d import ModelParams, save_profile, solve_instanton, tail_rate

params = ModelParams.create(beta=2.0, gamma=1e-2)
print(f"model: beta=2, J0_hat=1  ->  m_beta = {params.m_beta:.12f}")
print(f"double-well height F(0) = {params.f0:.12f}")

inst = solve_instanton(params, half_width=30.0, dx=1.0 / 64.0, tol=1e-10)
print(f"\nfixed point reached: residual = {inst.residual:.2e}")
print(f"surface tension tau = {inst.tau:.12f}")

# stability of tau under a wider window: the tails are already converged
inst40 = solve_instanton(params, half_width=40.0, dx=1.0 / 64.0, tol=1e-10)
print(f"tau(W=40) - tau(W=30) = {inst40.tau - inst.tau:+.2e}")

rate, rms, window = tail_rate(inst)
print(f"\ntail: m_beta - q(x) ~ exp(-{rate:.3f} x)  "
      f"(log-linear fit on x in [{window[0]:.2f}, {window[1]:.2f}], "
      f"rms {rms:.1e})")
print("note: the deviation drops below double resolution beyond x ~ 7, so")
print("the fit window sits just outside the interface core.")

# a few profile values across the interface
print("\n   x      q(x)")
for x in (-4.0, -1.0, -0.25, 0.25, 1.0, 4.0):
    print(f" {x:5.2f}  {inst(x):+.9f}")

save_profile(inst.to_profile(), "instanton.profile",
             extra_headers={"tau": inst.tau, "tail_rate": rate})
print("\nsaved instanton.profile (domain shifted to [0, 2W])")
