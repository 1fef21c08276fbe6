# %% [markdown]
# # Fragility against energy separation
#
# For each mean energy, the fragility grows roughly exponentially with the
# energy separation once it exceeds ~100.  The slope of ln(fragility) shrinks
# as the mean energy grows; its power law in the mean energy is the exponent
# nu.  This runs the small 2 x 3 grid (about a minute).

# %%
from fockecho import EvolutionConfig, fragility_scan
from fockecho.model import default_params

records, fit = fragility_scan([150.0, 300.0], [0.0, 100.0, 200.0], default_params(),
                              EvolutionConfig(t_max=20.0))
for r in records:
    print(f"E_bar={r.e_bar:5.0f}  dE={r.delta_e:5.0f}  cat={r.m_bar_cat:.5f}  "
          f"incoherent={r.m_bar_inc:.5f}  fragility={r.delta_m:.3e}")

# %%
if fit is not None:
    for e_bar, slope in sorted(fit.slope_per_ebar.items()):
        print(f"E_bar={e_bar:5.0f}  d ln(fragility) / d dE = {slope:.3e}")
    print(f"nu = {fit.nu:.3f}")
