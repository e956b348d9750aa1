# %% [markdown]
# # One antenna, one surrogate
#
# The gain seen by one BS antenna is a sum of sinusoids in its position.
# The optimizer replaces it by a concave quadratic that touches it at the
# current position and lies below it everywhere, then maximizes that
# quadratic. Here we check both properties along a line.

# %%
import numpy as np

from faswipt import (
    Scenario,
    assemble_channels,
    build_surrogate,
    decompose_objective,
    design_beamformer,
    initialize_placement,
    sample_scenario_paths,
    surrogate_eval,
)
from faswipt.position import exact_functional

sc = Scenario()
paths_I, paths_E = sample_scenario_paths(sc, seed=4)
pl = initialize_placement(sc)
ch = assemble_channels(pl, paths_I, paths_E, sc.wavelength)
W = design_beamformer(ch.h_I, ch.h_E, sc, seed=0).W

dec = decompose_objective(W, paths_I, pl, 0, sc.wavelength)
model = build_surrogate(dec, paths_I, pl.t[0], sc.wavelength)
print("expansion point", pl.t[0], "kappa", round(model.kappa, 2), "gradient", np.round(model.gradient, 3))

# %%
for dx in np.linspace(-0.3, 0.3, 13):
    t = pl.t[0] + [dx, 0.0]
    exact = exact_functional(dec, paths_I, t, sc.wavelength)
    sur = surrogate_eval(model, t)
    print(f"dx = {dx:+.2f}   exact {exact:8.3f}   surrogate {sur:8.3f}   gap {exact - sur:7.3f}")

# %% [markdown]
# The curvature bound is conservative, so each surrogate step is short;
# the inner loop repeats it until the gain stops improving.

# %%
from faswipt.position import optimize_transmit_positions

new, sweeps, _ = optimize_transmit_positions(W, paths_I, paths_E, pl, sc)
h_new = assemble_channels(new, paths_I, paths_E, sc.wavelength).h_I
print(f"{sweeps} sweeps: h_I W h_I^H {np.real(ch.h_I @ W @ ch.h_I.conj()):.3f} -> {np.real(h_new @ W @ h_new.conj()):.3f}")
print(np.round(new.t, 3))
