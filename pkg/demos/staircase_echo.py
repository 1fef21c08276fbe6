# %% [markdown]
# # Echo staircase of a single packet
#
# A coherent packet with energy 200.5 swings through the avoided crossing
# twice per period.  Each passage leaves part of the packet on the other spin
# state, so the echo drops in steps whose depth is the Landau-Zener
# probability of staying put.

# %%
import math

import numpy as np

from fockecho import (EvolutionConfig, analytic_timescales, crossing_parameters, crossing_times,
                      find_step_drops, first_step_depth, gaussian_timescale_fit, le_trace,
                      markov_reference_curve, revival_between)
from fockecho.model import default_params

e0 = 200.5
alpha = math.sqrt(e0 - 0.5)
p = default_params().with_cutoff_for(e0, (alpha,))
print(f"cutoff {p.cutoff}, Hilbert space dimension {p.dim}")

# %%
trace = le_trace("coherent", alpha, p, EvolutionConfig(t_max=20.0))
info = crossing_parameters(p, e0)
print(f"crossing at q = {info.q_c:.4f}, speed there {info.q_dot_c:.3f}, P_LZ = {info.p_lz:.5f}")

# %% [markdown]
# Step edges versus the classical passage times of sqrt(2) alpha cos(t):

# %%
passes = crossing_times(info.q_c, alpha, 20.0)
for drop, t_c in zip(find_step_drops(trace), passes):
    print(f"passage {t_c:6.3f}   drop onset {drop.onset:6.3f}   depth {drop.depth:.4f}")
print("first plateau", round(first_step_depth(trace, info, alpha), 5))

drops = find_step_drops(trace)
print("revival before the third step at t =", revival_between(trace, drops[1].end, drops[2].onset))

# %% [markdown]
# Two decay laws: the Markovian exp(-t / tau_phi) built from independent
# passages, and a Gaussian fitted to the decay.  The Gaussian time comes out
# near a third of tau_phi.

# %%
ts = analytic_timescales(p, e0)
tau_g = gaussian_timescale_fit(trace)
print(f"tau_phi = {ts.tau_phi:.3f}, tau_G = {tau_g:.3f}, ratio {tau_g / ts.tau_phi:.3f}")
markov = markov_reference_curve(ts, trace.times)
for t in (2.0, 6.0, 10.0, 14.0, 18.0):
    i = int(np.argmin(np.abs(trace.times - t)))
    print(f"t={t:5.1f}  M={trace.m[i]:.4f}  markov={markov[i]:.4f}  gauss={math.exp(-0.5 * (t / tau_g) ** 2):.4f}")
