# %% [markdown]
# # Rate versus transmit SNR for all four schemes
#
# A small Monte-Carlo sweep (20 channel draws per point, same draws for
# every scheme). The full-size run is
# `faswipt sweep --config sweep_pmax.yaml` with 100 trials.

# %%
from faswipt import load_config, run_experiment

config = load_config("""
sweep_axis: pmax_db
sweep_values: [0, 5, 10, 15]
trials: 20
""")
result = run_experiment(config)

# %%
print(f"{'P/sigma2':>9s}" + "".join(f"{s:>10s}" for s in config.schemes))
for value, _ in config.points:
    row = {r.scheme: r.mean_rate for r in result.rows if r.sweep_value == value}
    print(f"{value:7.0f}dB" + "".join(f"{row[s]:10.3f}" for s in config.schemes))

# %% [markdown]
# Infeasible draws (the ER cannot reach Q_bar even with all power on it)
# are left out of the means and counted separately.

# %%
for r in result.rows:
    if r.n_infeasible:
        print(f"{r.sweep_value:g} dB {r.scheme}: {r.n_infeasible} of {r.n_trials} draws infeasible")
