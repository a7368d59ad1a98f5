# coding: utf-8

# # Spreading subarrays apart raises the channel rank
#
# A compact 64-element array facing another one across a 60 m gap sees
# essentially plane waves.  With a LoS ray and a ground bounce the channel
# has rank 2, one stream per path.  Splitting each array into k subarrays
# placed d_s apart lets the wavefront curvature between subarrays carry
# k streams per path.

# %%

import numpy as np

from wsms import (
    ScenarioConfig,
    aperture_and_rayleigh,
    assemble_planar_channel,
    assemble_wsms_channel,
    build_layout,
    numerical_rank,
)

cfg = ScenarioConfig()
lam = cfg.wavelength
paths = cfg.paths()
print(f"wavelength {lam * 1e3:.3f} mm, {len(paths)} paths")
for p in paths:
    print(f"  {p.kind.value:<18} |gain| {abs(p.gain):.3e}  length {p.length:.3f} m")

# %% [markdown]
# The planar reference: one contiguous 8x8 array at each end.

# %%

planar = assemble_planar_channel(paths, cfg.n_tx, cfg.n_rx, lam)
print("planar rank:", numerical_rank(planar))

# %% [markdown]
# Now the same 64 antennas as k subarrays.  Spacing matters: packed
# tightly the subarrays reproduce the planar array, spread out they
# resolve the curvature.

# %%

for k in (1, 2, 4, 8):
    for d_s in (None, 0.15, 0.3):
        tx = build_layout(cfg.n_tx, k, d_s, lam, 0.0)
        rx = build_layout(cfg.n_rx, k, d_s, lam, cfg.distance)
        h = assemble_wsms_channel(paths, tx, rx, lam)
        s = np.linalg.svd(h.entries, compute_uv=False)
        ap, rayleigh = aperture_and_rayleigh(tx, lam)
        label = "packed" if d_s is None else f"{d_s:.2f} m"
        print(
            f"k={k}  d_s={label:<8} rank={numerical_rank(h):>2}  "
            f"aperture={ap:.3f} m  Rayleigh={rayleigh:7.1f} m  "
            f"s_min/s_max over k*N_p: {s[k * len(paths) - 1] / s[0]:.3f}"
        )

# %% [markdown]
# Once the subarrays are spread out the rank is k times the path count;
# packed side by side they can lose a dimension.  How evenly the singular
# values spread depends on d_s, which is what the spacing optimiser tunes
# (see 03_spacing_selection.py).
